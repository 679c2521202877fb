#include "mdef/payoff.hpp"

#include <cmath>
#include <sstream>

#include "mdef/common.hpp"

namespace mdef {

std::string payoff_kind_name(PayoffKind kind) {
    switch (kind) {
        case PayoffKind::constant: return "constant";
        case PayoffKind::survival: return "survival";
        case PayoffKind::all_survive: return "all-survive";
        case PayoffKind::default_by: return "default-by";
        case PayoffKind::count_defaults: return "count-defaults";
        case PayoffKind::point_indicator: return "point-indicator";
        case PayoffKind::table: return "table";
        case PayoffKind::callable: return "callable";
    }
    return "unknown";
}

Payoff::Payoff(PayoffKind kind, double maturity)
    : kind_(kind), maturity_(maturity) {
    require(maturity >= 0.0, "maturity must be nonnegative");
}

Payoff Payoff::constant(double maturity, double value) {
    Payoff p(PayoffKind::constant, maturity);
    p.value_ = value;
    return p;
}

Payoff Payoff::survival(double maturity, int coord, double threshold) {
    require(coord >= 0, "coordinate must be nonnegative");
    Payoff p(PayoffKind::survival, maturity);
    p.coord_ = coord;
    p.threshold_ = threshold;
    return p;
}

Payoff Payoff::all_survive(double maturity, double threshold, int counted) {
    require(counted >= 0, "counted coordinates must be nonnegative");
    Payoff p(PayoffKind::all_survive, maturity);
    p.threshold_ = threshold;
    p.counted_ = counted;
    return p;
}

Payoff Payoff::default_by(double maturity, int coord, double threshold) {
    require(coord >= 0, "coordinate must be nonnegative");
    Payoff p(PayoffKind::default_by, maturity);
    p.coord_ = coord;
    p.threshold_ = threshold;
    return p;
}

Payoff Payoff::count_defaults(double maturity, double threshold, int counted) {
    require(counted >= 0, "counted coordinates must be nonnegative");
    Payoff p(PayoffKind::count_defaults, maturity);
    p.threshold_ = threshold;
    p.counted_ = counted;
    return p;
}

Payoff Payoff::point_indicator(double maturity, std::vector<double> point) {
    require(!point.empty(), "target point required");
    Payoff p(PayoffKind::point_indicator, maturity);
    p.point_ = std::move(point);
    return p;
}

Payoff Payoff::table(double maturity,
                     std::vector<std::vector<double>> values) {
    require(!values.empty() && !values[0].empty(), "value table required");
    for (const auto& row : values)
        require(row.size() == values[0].size(),
                "table rows must have equal length");
    Payoff p(PayoffKind::table, maturity);
    p.table_ = std::move(values);
    return p;
}

Payoff Payoff::callable(double maturity,
                        std::function<double(int, std::span<const double>)> fn,
                        std::string label) {
    require(static_cast<bool>(fn), "callable required");
    Payoff p(PayoffKind::callable, maturity);
    p.fn_ = std::move(fn);
    p.label_ = std::move(label);
    return p;
}

Payoff Payoff::with_rate(double rate) const {
    Payoff p = *this;
    p.rate_ = rate;
    return p;
}

double Payoff::discount(double t) const {
    return std::exp(-rate_ * (maturity_ - t));
}

std::string Payoff::describe() const {
    std::ostringstream os;
    os << payoff_kind_name(kind_) << " T=" << format_double(maturity_);
    switch (kind_) {
        case PayoffKind::constant:
            os << " value=" << format_double(value_);
            break;
        case PayoffKind::survival:
        case PayoffKind::default_by:
            os << " coord=" << coord_ << " S=" << format_double(threshold_);
            break;
        case PayoffKind::all_survive:
        case PayoffKind::count_defaults:
            os << " S=" << format_double(threshold_);
            break;
        case PayoffKind::point_indicator: {
            os << " x=(";
            for (std::size_t i = 0; i < point_.size(); ++i)
                os << (i ? "," : "") << format_double(point_[i]);
            os << ")";
            break;
        }
        case PayoffKind::table:
            os << " rows=" << table_.size();
            break;
        case PayoffKind::callable:
            os << " " << label_;
            break;
    }
    if (rate_ != 0.0) os << " r=" << format_double(rate_);
    return os.str();
}

bool Payoff::scenario_dependent() const {
    return (kind_ == PayoffKind::table && table_.size() > 1) ||
           kind_ == PayoffKind::callable;
}

double Payoff::eval_point(int node, std::span<const double> x) const {
    switch (kind_) {
        case PayoffKind::constant:
            return value_;
        case PayoffKind::survival:
            require(coord_ < static_cast<int>(x.size()), "coordinate outside point");
            return x[coord_] > threshold_ ? 1.0 : 0.0;
        case PayoffKind::default_by:
            require(coord_ < static_cast<int>(x.size()), "coordinate outside point");
            return x[coord_] <= threshold_ ? 1.0 : 0.0;
        case PayoffKind::all_survive: {
            const std::size_t m =
                counted_ > 0 ? static_cast<std::size_t>(counted_) : x.size();
            require(m <= x.size(), "counted coordinates outside point");
            for (std::size_t i = 0; i < m; ++i)
                if (x[i] <= threshold_) return 0.0;
            return 1.0;
        }
        case PayoffKind::count_defaults: {
            const std::size_t m =
                counted_ > 0 ? static_cast<std::size_t>(counted_) : x.size();
            require(m <= x.size(), "counted coordinates outside point");
            double c = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                if (x[i] <= threshold_) c += 1.0;
            return c;
        }
        case PayoffKind::point_indicator: {
            if (x.size() != point_.size()) return 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (std::abs(x[i] - point_[i]) > grid_tol) return 0.0;
            return 1.0;
        }
        case PayoffKind::table:
            throw std::invalid_argument(
                "table payoffs are indexed by grid position");
        case PayoffKind::callable:
            return fn_(node, x);
    }
    return 0.0;
}

double Payoff::eval_grid(int node, std::size_t k,
                         const ReferenceMeasure& reference) const {
    if (kind_ == PayoffKind::table) {
        require(k < table_[0].size(), "grid index outside table");
        if (table_.size() == 1) return table_[0][k];
        require(node >= 0 && node < static_cast<int>(table_.size()),
                "node outside table");
        return table_[node][k];
    }
    return eval_point(node, reference.point(k));
}

}  // namespace mdef
