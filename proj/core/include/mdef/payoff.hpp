#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mdef/reference_measure.hpp"

namespace mdef {

enum class PayoffKind {
    constant,
    survival,         // 1 if coordinate j stays above the threshold
    all_survive,      // 1 if every counted coordinate stays above it
    default_by,       // 1 if coordinate j is at or below the threshold
    count_defaults,   // number of counted coordinates at or below it
    point_indicator,  // 1 on a single grid point
    table,            // tabulated values per grid point (optionally per node)
    callable,
};

std::string payoff_kind_name(PayoffKind kind);

// Terminal claim Y_T(x). The outcome argument is the full grid point, so for
// marked models the threshold kinds read the leading time coordinates and a
// table row covers the whole point list. `counted` limits all_survive and
// count_defaults to the first coordinates; zero means all of them.
class Payoff {
  public:
    static Payoff constant(double maturity, double value);
    static Payoff survival(double maturity, int coord, double threshold);
    static Payoff all_survive(double maturity, double threshold,
                              int counted = 0);
    static Payoff default_by(double maturity, int coord, double threshold);
    static Payoff count_defaults(double maturity, double threshold,
                                 int counted = 0);
    static Payoff point_indicator(double maturity, std::vector<double> point);
    // values[0] is shared across scenarios; otherwise one row per leaf node id
    static Payoff table(double maturity,
                        std::vector<std::vector<double>> values);
    static Payoff callable(
        double maturity,
        std::function<double(int, std::span<const double>)> fn,
        std::string label);

    PayoffKind kind() const { return kind_; }
    double maturity() const { return maturity_; }
    double rate() const { return rate_; }
    Payoff with_rate(double rate) const;
    double discount(double t) const;
    std::string describe() const;
    bool scenario_dependent() const;

    int coord() const { return coord_; }
    int counted() const { return counted_; }
    double threshold() const { return threshold_; }
    double value() const { return value_; }

    double eval_point(int node, std::span<const double> x) const;
    double eval_grid(int node, std::size_t k,
                     const ReferenceMeasure& reference) const;

  private:
    explicit Payoff(PayoffKind kind, double maturity);

    PayoffKind kind_;
    double maturity_;
    double rate_ = 0.0;
    double value_ = 0.0;
    int coord_ = 0;
    double threshold_ = 0.0;
    int counted_ = 0;
    std::vector<double> point_;
    std::vector<std::vector<double>> table_;
    std::function<double(int, std::span<const double>)> fn_;
    std::string label_;
};

}  // namespace mdef
