#include "mdef/density_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdef/quadrature.hpp"

namespace mdef {

namespace {

class IndependentExponential final : public ParametricFamily {
  public:
    explicit IndependentExponential(std::vector<double> lambda)
        : lambda_(std::move(lambda)) {
        require(!lambda_.empty(), "need at least one rate");
        for (double l : lambda_) require(l > 0.0, "rates must be positive");
    }

    std::string name() const override { return "exponential"; }
    std::vector<double> params() const override { return lambda_; }
    int n() const override { return static_cast<int>(lambda_.size()); }
    bool ordered() const override { return false; }

    double density(std::span<const double> u) const override {
        require(u.size() == lambda_.size(), "dimension mismatch");
        double v = 1.0;
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            if (u[i] < 0.0) return 0.0;
            v *= lambda_[i] * std::exp(-lambda_[i] * u[i]);
        }
        return v;
    }

    double tail_analytic(std::span<const std::pair<int, double>> pins,
                         double a) const override {
        double v = 1.0;
        std::vector<bool> pinned(lambda_.size(), false);
        for (auto [i, x] : pins) {
            require(i >= 0 && i < n() && !pinned[i], "bad pin");
            pinned[i] = true;
            if (x < 0.0) return 0.0;
            v *= lambda_[i] * std::exp(-lambda_[i] * x);
        }
        for (std::size_t i = 0; i < lambda_.size(); ++i)
            if (!pinned[i]) v *= std::exp(-lambda_[i] * std::max(a, 0.0));
        return v;
    }

    double tail_coordinate(std::span<const std::pair<int, double>> pins,
                           double cut, int coord, double s) const override {
        double v = 1.0;
        std::vector<bool> pinned(lambda_.size(), false);
        for (auto [i, x] : pins) {
            require(i >= 0 && i < n() && !pinned[i], "bad pin");
            pinned[i] = true;
            if (x < 0.0) return 0.0;
            v *= lambda_[i] * std::exp(-lambda_[i] * x);
        }
        require(coord >= 0 && coord < n() && !pinned[coord],
                "coordinate must be free");
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            if (pinned[i]) continue;
            const double lo = static_cast<int>(i) == coord
                                  ? std::max({s, cut, 0.0})
                                  : std::max(cut, 0.0);
            v *= std::exp(-lambda_[i] * lo);
        }
        return v;
    }

    double tail_numeric(std::span<const std::pair<int, double>> pins, double a,
                        const ReferenceMeasure& ref) const {
        const double U = ref.u_max();
        const int q = ref.quad_order();
        double v = 1.0;
        std::vector<bool> pinned(lambda_.size(), false);
        for (auto [i, x] : pins) {
            pinned[i] = true;
            if (x < 0.0) return 0.0;
            v *= lambda_[i] * std::exp(-lambda_[i] * x);
        }
        const double lo = std::max(a, 0.0);
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            if (pinned[i]) continue;
            const double l = lambda_[i];
            double bulk = integrate(
                [l](double x) { return l * std::exp(-l * x); }, lo, U, q);
            v *= bulk + std::exp(-l * U);  // analytic remainder past u_max
        }
        return v;
    }

    std::vector<double> sample(SplitMix64& rng) const override {
        std::vector<double> u(lambda_.size());
        for (std::size_t i = 0; i < lambda_.size(); ++i)
            u[i] = -std::log1p(-rng.uniform01()) / lambda_[i];
        return u;
    }

  private:
    std::vector<double> lambda_;
};

class ExchangeableExponentialOrdered final : public ParametricFamily {
  public:
    ExchangeableExponentialOrdered(int n, double lambda)
        : n_(n), lambda_(lambda) {
        require(n >= 1, "need at least one coordinate");
        require(lambda > 0.0, "rate must be positive");
        fact_ = 1.0;
        for (int i = 2; i <= n; ++i) fact_ *= i;
    }

    std::string name() const override { return "exchangeable-exponential"; }
    std::vector<double> params() const override {
        return {static_cast<double>(n_), lambda_};
    }
    int n() const override { return n_; }
    bool ordered() const override { return true; }

    double density(std::span<const double> u) const override {
        require(static_cast<int>(u.size()) == n_, "dimension mismatch");
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            if (u[i] < 0.0 || (i > 0 && u[i] < u[i - 1])) return 0.0;
            s += u[i];
        }
        return fact_ * std::pow(lambda_, n_) * std::exp(-lambda_ * s);
    }

    // pins must be the leading coordinates of the chamber
    double tail_analytic(std::span<const std::pair<int, double>> pins,
                         double a) const override {
        double v = fact_;
        double prev = 0.0;
        for (std::size_t j = 0; j < pins.size(); ++j) {
            auto [i, x] = pins[j];
            require(i == static_cast<int>(j), "pins must form a prefix");
            if (x < prev) return 0.0;
            prev = x;
            v *= lambda_ * std::exp(-lambda_ * x);
        }
        const int m = n_ - static_cast<int>(pins.size());
        const double lo = std::max(a, prev);
        double mfact = 1.0;
        for (int i = 2; i <= m; ++i) mfact *= i;
        return v * std::pow(std::exp(-lambda_ * lo), m) / mfact;
    }

    double tail_numeric(std::span<const std::pair<int, double>> pins, double a,
                        const ReferenceMeasure& ref) const {
        const double U = ref.u_max();
        const int q = ref.quad_order();
        const double l = lambda_;
        double v = fact_;
        double prev = 0.0;
        for (std::size_t j = 0; j < pins.size(); ++j) {
            auto [i, x] = pins[j];
            require(i == static_cast<int>(j), "pins must form a prefix");
            if (x < prev) return 0.0;
            prev = x;
            v *= l * std::exp(-l * x);
        }
        const int m = n_ - static_cast<int>(pins.size());
        const double lo = std::max(a, prev);
        if (m == 0) return v;
        if (lo >= U) return tail_analytic(pins, a);
        auto exp1 = [l](double x) { return l * std::exp(-l * x); };
        if (m == 1) {
            return v * (integrate(exp1, lo, U, q) + std::exp(-l * U));
        }
        if (m == 2) {
            double outer = integrate(
                [&](double x) {
                    double inner =
                        integrate(exp1, x, U, q) + std::exp(-l * U);
                    return exp1(x) * inner;
                },
                lo, U, q);
            return v * (outer + 0.5 * std::exp(-2.0 * l * U));
        }
        throw std::invalid_argument(
            "quadrature tails support at most two free coordinates");
    }

    double tail_coordinate(std::span<const std::pair<int, double>> pins,
                           double cut, int coord, double s) const override {
        const double l = lambda_;
        double v = fact_;
        double prev = 0.0;
        for (std::size_t j = 0; j < pins.size(); ++j) {
            auto [i, x] = pins[j];
            require(i == static_cast<int>(j), "pins must form a prefix");
            if (x < prev) return 0.0;
            prev = x;
            v *= l * std::exp(-l * x);
        }
        const int i = static_cast<int>(pins.size());
        const int m = n_ - i;
        require(coord >= i && coord < n_, "coordinate must be free");
        const double lo = std::max(cut, prev);
        const double sp = std::max(s, lo);
        if (m == 1) return v * std::exp(-l * sp);
        if (m == 2) {
            if (coord == i) return v * 0.5 * std::exp(-2.0 * l * sp);
            return v * (std::exp(-l * sp) *
                            (std::exp(-l * lo) - std::exp(-l * sp)) +
                        0.5 * std::exp(-2.0 * l * sp));
        }
        throw std::invalid_argument(
            "coordinate tails support at most two free coordinates");
    }

    std::vector<double> sample(SplitMix64& rng) const override {
        std::vector<double> u(n_);
        for (int i = 0; i < n_; ++i)
            u[i] = -std::log1p(-rng.uniform01()) / lambda_;
        std::sort(u.begin(), u.end());
        return u;
    }

  private:
    int n_;
    double lambda_;
    double fact_;
};

}  // namespace

std::shared_ptr<const ParametricFamily> independent_exponential(
    std::vector<double> lambda) {
    return std::make_shared<IndependentExponential>(std::move(lambda));
}

std::shared_ptr<const ParametricFamily> exchangeable_exponential_ordered(
    int n, double lambda) {
    return std::make_shared<ExchangeableExponentialOrdered>(n, lambda);
}

double tail_quadrature(const ParametricFamily& family,
                       std::span<const std::pair<int, double>> pins, double a,
                       const ReferenceMeasure& reference) {
    require(reference.kind() == ReferenceKind::lebesgue_truncated,
            "quadrature tails need a truncated Lebesgue reference");
    if (auto* f = dynamic_cast<const IndependentExponential*>(&family))
        return f->tail_numeric(pins, a, reference);
    if (auto* f = dynamic_cast<const ExchangeableExponentialOrdered*>(&family))
        return f->tail_numeric(pins, a, reference);
    throw std::invalid_argument("unknown parametric family");
}

DensityModel DensityModel::grid(
    ReferenceMeasure reference, ScenarioTree tree,
    std::vector<std::vector<std::vector<double>>> alpha, int n, bool ordered,
    bool marks) {
    require(reference.is_grid(), "grid model needs a finite grid reference");
    require(n >= 1, "need at least one coordinate");
    const std::size_t want_dim = marks ? std::size_t(2 * n) : std::size_t(n);
    require(reference.dim() == want_dim,
            "grid dimension does not match coordinate count");
    const int t_max = tree.t_max();
    require(static_cast<int>(alpha.size()) == t_max + 1,
            "density table must cover every grid time");
    for (int t = 0; t <= t_max; ++t) {
        require(alpha[t].size() == static_cast<std::size_t>(tree.node_count()),
                "density table rows must be indexed by node id");
        for (int id : tree.nodes_at(t)) {
            require(alpha[t][id].size() == reference.size(),
                    "density table must cover the whole grid");
            for (double v : alpha[t][id])
                require(v >= 0.0, "densities must be nonnegative");
        }
    }
    for (std::size_t k = 0; k < reference.size(); ++k) {
        const auto& pt = reference.point(k);
        if (ordered) {
            for (int j = 1; j < n; ++j)
                require(pt[j] >= pt[j - 1],
                        "ordered grid points must be nondecreasing");
        }
        if (marks) {
            for (int j = 0; j < n; ++j)
                require(pt[n + j] != 0.0, "marks must be nonzero");
        }
    }
    const bool deterministic = tree.node_count() == t_max + 1;
    DensityModel m(std::move(reference), std::move(tree));
    m.deterministic_ = deterministic;  // single branch carries no randomness
    m.alpha_ = std::move(alpha);
    m.n_ = n;
    m.ordered_ = ordered;
    m.marks_ = marks;
    return m;
}

DensityModel DensityModel::parametric(
    ReferenceMeasure reference, std::shared_ptr<const ParametricFamily> family,
    int t_max) {
    require(reference.kind() == ReferenceKind::lebesgue_truncated,
            "parametric model needs a truncated Lebesgue reference");
    require(family != nullptr, "family required");
    DensityModel m(std::move(reference), ScenarioTree::trivial(t_max));
    m.n_ = family->n();
    m.ordered_ = family->ordered();
    m.marks_ = false;
    m.deterministic_ = true;
    m.family_ = std::move(family);
    return m;
}

DensityModel::DensityModel(const DensityModel& other)
    : reference_(other.reference_),
      tree_(other.tree_),
      alpha_(other.alpha_),
      family_(other.family_),
      n_(other.n_),
      ordered_(other.ordered_),
      marks_(other.marks_),
      deterministic_(other.deterministic_) {}

double DensityModel::alpha(int t, int node, std::size_t k) const {
    require(is_grid(), "tabulated densities exist on grid models only");
    require(t >= 0 && t <= t_max(), "time outside the grid");
    return alpha_[t][node][k];
}

double DensityModel::alpha_point(double t, int node,
                                 std::span<const double> pt) const {
    (void)t;
    (void)node;
    require(family_ != nullptr,
            "pointwise densities exist on parametric models only");
    return family_->density(pt);
}

double DensityModel::eta(std::size_t k) const {
    require(is_grid(), "prior masses exist on grid models only");
    return alpha_[0][tree_.nodes_at(0)[0]][k] * reference_.weight(k);
}

std::vector<double> DensityModel::prior() const {
    std::vector<double> p(reference_.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = eta(k);
    return p;
}

Partition DensityModel::partition(const ObservationScheme& scheme,
                                  double t) const {
    check_scheme_compatible(scheme, n_, ordered_, marks_);
    return observation_partition(scheme, reference_, t, n_, marks_);
}

const ValidationReport& DensityModel::ensure_validated(double tol) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (!cached_report_ || cached_tol_ != tol) {
        cached_report_ = validate_density_model(*this, tol);
        cached_tol_ = tol;
    }
    if (!cached_report_->pass) {
        std::ostringstream os;
        os << "density model failed validation:"
           << " normalization defect " << cached_report_->max_normalization_defect
           << ", martingale defect " << cached_report_->max_martingale_defect
           << ", expectation defect " << cached_report_->max_beta_defect;
        throw std::runtime_error(os.str());
    }
    return *cached_report_;
}

ValidationReport validate_density_model(const DensityModel& model, double tol) {
    ValidationReport rep;
    rep.tol = tol > 0.0 ? tol : (model.is_grid() ? grid_tol : quadrature_tol);
    const ScenarioTree& tree = model.tree();

    if (model.is_grid()) {
        const auto& ref = model.reference();
        const std::size_t K = ref.size();
        // per-(t,node) normalization of the conditional density
        for (int t = 0; t <= model.t_max(); ++t) {
            for (int id : tree.nodes_at(t)) {
                std::vector<double> terms(K);
                for (std::size_t k = 0; k < K; ++k)
                    terms[k] = model.alpha(t, id, k) * ref.weight(k);
                const double defect = std::abs(pairwise_sum(terms) - 1.0);
                rep.max_normalization_defect =
                    std::max(rep.max_normalization_defect, defect);
                if (defect > rep.tol)
                    rep.normalization.push_back({t, id, -1, defect});
            }
        }
        // one-step martingale property per outcome
        for (int t = 0; t < model.t_max(); ++t) {
            for (int id : tree.nodes_at(t)) {
                for (std::size_t k = 0; k < K; ++k) {
                    double s = 0.0;
                    for (int c : tree.node(id).children)
                        s += tree.node(c).edge_prob * model.alpha(t + 1, c, k);
                    const double defect = std::abs(s - model.alpha(t, id, k));
                    rep.max_martingale_defect =
                        std::max(rep.max_martingale_defect, defect);
                    if (defect > rep.tol)
                        rep.martingale.push_back(
                            {t, id, static_cast<long long>(k), defect});
                }
            }
        }
        // terminal expectation of beta per outcome with positive prior density
        const int T = model.t_max();
        bool mass_zero = false;
        for (std::size_t k = 0; k < K; ++k) {
            const double a0 = model.alpha(0, tree.nodes_at(0)[0], k);
            if (a0 <= 0.0) {
                mass_zero = true;
                continue;
            }
            double s = 0.0;
            for (int leaf : tree.nodes_at(T))
                s += tree.path_prob(leaf) * model.alpha(T, leaf, k);
            const double defect = std::abs(s / a0 - 1.0);
            rep.max_beta_defect = std::max(rep.max_beta_defect, defect);
            if (defect > rep.tol)
                rep.beta_condition.push_back(
                    {T, -1, static_cast<long long>(k), defect});
        }
        if (mass_zero)
            rep.notes.push_back(
                "mass-zero branch: some grid points carry zero prior density");
    } else {
        const ParametricFamily& fam = *model.family();
        const double numeric = tail_quadrature(fam, {}, 0.0, model.reference());
        const double analytic = fam.tail_analytic({}, 0.0);
        rep.max_normalization_defect =
            std::max(std::abs(numeric - 1.0), std::abs(analytic - 1.0));
        if (rep.max_normalization_defect > rep.tol)
            rep.normalization.push_back({0, 0, -1, rep.max_normalization_defect});
        rep.notes.push_back(
            "deterministic density: martingale and expectation conditions hold "
            "identically in time");
    }

    rep.pass = rep.max_normalization_defect <= rep.tol &&
               rep.max_martingale_defect <= rep.tol &&
               rep.max_beta_defect <= rep.tol;
    return rep;
}

double JointMeasure::scenario_marginal(std::size_t node_pos) const {
    return pairwise_sum(mass[node_pos]);
}

double JointMeasure::outcome_marginal(std::size_t k) const {
    std::vector<double> col(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) col[i] = mass[i][k];
    return pairwise_sum(col);
}

JointMeasure build_joint_measure(const DensityModel& model, int t) {
    require(model.is_grid(), "the joint measure is tabulated on grids only");
    require(t >= 0 && t <= model.t_max(), "time outside the grid");
    model.ensure_validated();
    const ScenarioTree& tree = model.tree();
    const auto& ref = model.reference();
    JointMeasure jm;
    jm.t = t;
    jm.nodes = tree.nodes_at(t);
    jm.mass.resize(jm.nodes.size());
    std::vector<double> all;
    all.reserve(jm.nodes.size() * ref.size());
    for (std::size_t i = 0; i < jm.nodes.size(); ++i) {
        const int id = jm.nodes[i];
        const double pp = tree.path_prob(id);
        jm.mass[i].resize(ref.size());
        for (std::size_t k = 0; k < ref.size(); ++k) {
            // P(path) * beta_t * eta({x}) collapses to P(path) * alpha_t * w
            jm.mass[i][k] = pp * model.alpha(t, id, k) * ref.weight(k);
            all.push_back(jm.mass[i][k]);
            if (model.eta(k) == 0.0) jm.mass_zero_branch = true;
        }
    }
    jm.total = pairwise_sum(all);
    require(std::abs(jm.total - 1.0) <= 1e-12,
            "joint measure mass must be one");
    return jm;
}

}  // namespace mdef
