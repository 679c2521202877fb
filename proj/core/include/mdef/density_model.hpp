#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdef/common.hpp"
#include "mdef/observation_scheme.hpp"
#include "mdef/reference_measure.hpp"
#include "mdef/scenario_tree.hpp"

namespace mdef {

// Time-constant parametric density over the outcome space, used with the
// truncated Lebesgue reference.  Tail integrals fix a set of coordinates
// (pins) and integrate the free ones over (a, infinity); analytic tails are
// exact, the quadrature route covers [a, u_max] with the analytic remainder
// beyond u_max folded in, matching how the truncated measure assigns mass to
// its last cell.
class ParametricFamily {
  public:
    virtual ~ParametricFamily() = default;
    virtual std::string name() const = 0;
    // constructor arguments, enough to rebuild the family from a config
    virtual std::vector<double> params() const = 0;
    virtual int n() const = 0;
    virtual bool ordered() const = 0;
    virtual double density(std::span<const double> u) const = 0;
    virtual double tail_analytic(
        std::span<const std::pair<int, double>> pins, double a) const = 0;

    // Unnormalized mass of {coordinate `coord` above s, every other free
    // coordinate above `cut`}, with pinned coordinates folded in as density
    // factors. The coordinate must be free.
    virtual double tail_coordinate(std::span<const std::pair<int, double>> pins,
                                   double cut, int coord, double s) const = 0;
    virtual std::vector<double> sample(SplitMix64& rng) const = 0;
};

// alpha(u) = prod_i lambda_i exp(-lambda_i u_i) on (0,inf)^n
std::shared_ptr<const ParametricFamily> independent_exponential(
    std::vector<double> lambda);

// alpha(u) = n! lambda^n exp(-lambda sum u_i) on the ordered chamber
std::shared_ptr<const ParametricFamily> exchangeable_exponential_ordered(
    int n, double lambda);

double tail_quadrature(const ParametricFamily& family,
                       std::span<const std::pair<int, double>> pins, double a,
                       const ReferenceMeasure& reference);

struct DefectEntry {
    int t = 0;
    int node = 0;
    long long k = -1;  // grid index, -1 when not point-specific
    double defect = 0.0;
};

struct ValidationReport {
    bool pass = false;
    double tol = grid_tol;
    double max_normalization_defect = 0.0;
    double max_martingale_defect = 0.0;
    double max_beta_defect = 0.0;  // worst |E[beta_T(x)] - 1| over outcomes
    std::vector<DefectEntry> normalization;
    std::vector<DefectEntry> martingale;
    std::vector<DefectEntry> beta_condition;
    std::vector<std::string> notes;
};

// Conditional density family alpha_t(x) of the outcome given F_t, with the
// scenario tree as reference filtration.  Either a finite table on a grid
// (possibly scenario-dependent) or a deterministic parametric family.
// Immutable once built; validation results are cached.
class DensityModel {
  public:
    // alpha[t][node id][grid index]; nodes not at depth t are ignored
    static DensityModel grid(ReferenceMeasure reference, ScenarioTree tree,
                             std::vector<std::vector<std::vector<double>>> alpha,
                             int n, bool ordered, bool marks);

    // deterministic model: trivial scenario tree, time-constant density
    static DensityModel parametric(ReferenceMeasure reference,
                                   std::shared_ptr<const ParametricFamily> family,
                                   int t_max);

    DensityModel(const DensityModel& other);
    DensityModel& operator=(const DensityModel&) = delete;

    int n() const { return n_; }
    bool ordered() const { return ordered_; }
    bool marks() const { return marks_; }
    int t_max() const { return tree_.t_max(); }
    bool is_grid() const { return reference_.is_grid(); }
    bool deterministic() const { return deterministic_; }

    const ReferenceMeasure& reference() const { return reference_; }
    const ScenarioTree& tree() const { return tree_; }
    const ParametricFamily* family() const { return family_.get(); }

    double alpha(int t, int node, std::size_t k) const;
    double alpha_point(double t, int node, std::span<const double> pt) const;

    // prior outcome law: eta({x_k}) = alpha_0(x_k) * w_k
    double eta(std::size_t k) const;
    std::vector<double> prior() const;

    Partition partition(const ObservationScheme& scheme, double t) const;

    // Runs validation once and caches the report; throws on hard defects
    // (negative densities) during construction instead.
    const ValidationReport& ensure_validated(double tol = 0.0) const;

  private:
    DensityModel(ReferenceMeasure reference, ScenarioTree tree)
        : reference_(std::move(reference)), tree_(std::move(tree)) {}

    ReferenceMeasure reference_;
    ScenarioTree tree_;
    std::vector<std::vector<std::vector<double>>> alpha_;
    std::shared_ptr<const ParametricFamily> family_;
    int n_ = 1;
    bool ordered_ = false;
    bool marks_ = false;
    bool deterministic_ = false;

    mutable std::mutex cache_mutex_;
    mutable std::optional<ValidationReport> cached_report_;
    mutable double cached_tol_ = 0.0;
};

ValidationReport validate_density_model(const DensityModel& model,
                                        double tol = 0.0);

// Joint law of (scenario at depth t, outcome) on the product space:
// mass(path, x) = P(path) * beta_t(path, x) * eta({x}).
struct JointMeasure {
    int t = 0;
    std::vector<int> nodes;                   // depth-t node ids
    std::vector<std::vector<double>> mass;    // [node position][grid index]
    double total = 0.0;
    bool mass_zero_branch = false;            // some 0/0 cell was zeroed

    double scenario_marginal(std::size_t node_pos) const;
    double outcome_marginal(std::size_t k) const;
};

// Requires a model that passes validation at the default tolerance.
JointMeasure build_joint_measure(const DensityModel& model, int t);

}  // namespace mdef
