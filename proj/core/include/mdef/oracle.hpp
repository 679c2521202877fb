#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mdef/conditional.hpp"
#include "mdef/density_model.hpp"
#include "mdef/observation_scheme.hpp"
#include "mdef/payoff.hpp"

namespace mdef {

// Ground truth by exhaustive conditioning of the terminal joint law, plus a
// Monte Carlo layer for models without a finite grid. Nothing here shares
// code with the production routes; that separation is the point.

// One sigma-algebra atom: its member cells of the joint support, addressed by
// (position in jm.nodes, grid index), and its total mass.
struct AtomMember {
    std::size_t node_pos = 0;
    std::size_t k = 0;
};

struct SupportAtom {
    std::string id;
    std::vector<AtomMember> members;
    double mass = 0.0;
};

// Atoms partition the whole joint support and their masses sum to one.
struct AtomTable {
    std::vector<SupportAtom> atoms;
};

AtomTable atoms_trivial(const JointMeasure& jm);
// Time-t scenario information only: one atom per time-t node.
AtomTable atoms_F(const JointMeasure& jm, const DensityModel& model, int t);
// Scenario plus observations: one atom per (time-t node, observation atom),
// ordered node-major so callers can index as node_pos * atom_count + a.
AtomTable atoms_G(const JointMeasure& jm, const DensityModel& model,
                  const ObservationScheme& scheme, int t);
// Scenario plus the full outcome: one atom per (time-t node, grid point).
AtomTable atoms_H(const JointMeasure& jm, const DensityModel& model, int t);

struct BruteValue {
    double value = 0.0;
    bool mass_zero = false;
};

// Mass-weighted average of `values` over each atom. `values` must be shaped
// like jm.mass. Verifies that the table really partitions the support.
std::vector<BruteValue> brute_force_condexp(
    const JointMeasure& jm, const AtomTable& atoms,
    const std::vector<std::vector<double>>& values);

// Payoff evaluated on every cell of the joint support, shaped like jm.mass.
std::vector<std::vector<double>> payoff_values(const JointMeasure& jm,
                                               const DensityModel& model,
                                               const Payoff& payoff);

// E[Y(chi) | observations + tree] by conditioning the depth-T joint measure
// on time-t information, atom by atom.
CondexpTable oracle_condexp_G(const DensityModel& model,
                              const ObservationScheme& scheme,
                              const Payoff& payoff, int t);

// One draw of the system: terminal scenario, outcome, and what the observer
// saw at each integer time. Grid draws fill `leaf` and `k`; models given by a
// density fill `x` directly and keep the trivial scenario.
struct SystemSample {
    int leaf = 0;
    std::size_t k = 0;
    std::vector<double> x;
    std::vector<std::string> observations;
};

std::vector<SystemSample> sample_system(const DensityModel& model,
                                        const ObservationScheme& scheme,
                                        std::uint64_t seed, long long count);

// Sample mean over the draws selected by `in_atom`, with a z * stderr band.
struct McEstimate {
    double mean = 0.0;
    double half_width = 0.0;
    long long count = 0;
};

McEstimate mc_conditional(
    const std::vector<SystemSample>& samples,
    const std::function<double(const SystemSample&)>& value,
    const std::function<bool(const SystemSample&)>& in_atom, double z = 3.0);

}  // namespace mdef
