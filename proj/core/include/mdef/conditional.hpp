#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdef/density_model.hpp"
#include "mdef/observation_scheme.hpp"
#include "mdef/payoff.hpp"
#include "mdef/prediction.hpp"

namespace mdef {

// Mass of the running density over the free coordinates restricted to
// (t, infinity), with the pinned coordinates substituted. Grid models sum
// exactly at integer time s; parametric models integrate by quadrature with
// the analytic remainder folded past u_max. For marked models only the time
// part is restricted; unpinned marks stay free.
double tail_integral(const DensityModel& model, double t,
                     std::span<const std::pair<int, double>> pins, double s,
                     int node = 0);

// A family of scenario-tree martingales indexed by grid point: value[t][node
// id][grid index]. Built by backward induction from terminal data, so each
// slice in the grid index is a martingale for the tree filtration by
// construction.
struct ParametrizedMartingale {
    std::vector<std::vector<std::vector<double>>> value;

    double at(int t, int node, std::size_t k) const {
        return value[t][node][k];
    }
};

ParametrizedMartingale parametrized_expectation(
    const DensityModel& model,
    const std::vector<std::vector<double>>& terminal);

// E[Y(chi) | F_t v sigma(chi)] tabulated per (t, node, grid index):
// numerator over the running density, zero where the state itself carries no
// mass (those entries are counted, not errors).
struct FullInfoTable {
    ParametrizedMartingale numerator;
    std::vector<std::vector<std::vector<double>>> value;
    long long undefined_states = 0;
};

FullInfoTable condexp_full_info(const DensityModel& model,
                                const Payoff& payoff);

struct HSnapshot {
    int t = 0;
    std::vector<std::vector<double>> value;  // [node id][grid index]
    long long undefined_states = 0;
};

HSnapshot condexp_H(const DensityModel& model, const Payoff& payoff, int t);

enum class CondexpMethod { direct, bayes };

// E[Y(chi) | observations + tree] per (depth-t node, observation atom).
struct CondexpTable {
    int t = 0;
    CondexpMethod method = CondexpMethod::direct;
    Partition partition;
    std::vector<int> nodes;
    std::vector<std::vector<double>> value;    // [node position][atom]
    std::vector<std::vector<char>> undefined;  // zero-mass atoms

    // value for the atom containing grid point k
    double at_point(std::size_t node_pos, std::size_t k) const {
        return value[node_pos][partition.atom_of[k]];
    }
};

// Partition route on grid models. The direct method forms the ratio of the
// payoff-weighted and plain density masses on each atom; the bayes method
// first conditions on the full outcome and then averages under the
// beta-reweighted observation law. Both land on the same numbers.
CondexpTable condexp_G(const DensityModel& model,
                       const ObservationScheme& scheme, const Payoff& payoff,
                       int t, CondexpMethod method = CondexpMethod::direct);

// Closed form for parametric models in the regime described by the
// prediction measure. Threshold payoffs reduce to analytic tail ratios.
double condexp_G_lebesgue(const DensityModel& model, const Payoff& payoff,
                          const PredictionMeasure& pm);

// Specialized regime-indexed paths. On grids they enumerate the regimes
// present at time t by pin matching, sharing the tail_integral kernel with
// the prediction module and bypassing observation_partition entirely.
struct RegimeValue {
    std::string regime;
    unsigned code = 0;  // default count (ordered) or subset mask
    std::vector<double> pins;
    std::vector<double> value;  // per depth-t node position
    std::vector<char> undefined;
};

std::vector<RegimeValue> condexp_G_ordered(const DensityModel& model,
                                           const Payoff& payoff, int t);
double condexp_G_ordered(const DensityModel& model, const Payoff& payoff,
                         double t, std::span<const double> realized);
std::vector<RegimeValue> condexp_G_nonordered(const DensityModel& model,
                                              const Payoff& payoff, int t);
double condexp_G_nonordered(const DensityModel& model, const Payoff& payoff,
                            double t, std::span<const double> realized);

// Normalized beta-weighted restriction of the prior to one atom.
struct AtomLaw {
    std::vector<double> weights;
    bool mass_zero = false;
};

AtomLaw atom_law(const DensityModel& model, int t, int node,
                 std::span<const std::size_t> atom);

// Conditional law of the outcome given observations and the tree, tabulated
// for every (node, atom) as a vector over the whole grid.
struct ConditionalLawG {
    int t = 0;
    Partition partition;
    std::vector<int> nodes;
    std::vector<std::vector<std::vector<double>>> weights;
    std::vector<std::vector<char>> mass_zero;
};

ConditionalLawG conditional_law_G(const DensityModel& model,
                                  const ObservationScheme& scheme, int t);

// Sum of a density evaluator over all permutations of the coordinates,
// nonzero only on the ordered chamber.
std::function<double(std::span<const double>)> symmetrize_density(
    std::function<double(std::span<const double>)> f, int n);

}  // namespace mdef
