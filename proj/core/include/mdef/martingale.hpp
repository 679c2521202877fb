#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mdef/conditional.hpp"
#include "mdef/density_model.hpp"
#include "mdef/observation_scheme.hpp"
#include "mdef/payoff.hpp"

namespace mdef {

// What the observer has seen of the outcome by some time: how many (or
// which) coordinates have defaulted, and at which values. For marked flows
// the pins interleave (time, mark) pairs.
struct RegimeSignature {
    unsigned code = 0;         // count when ordered, bitmask otherwise
    std::vector<double> pins;  // revealed values in canonical order
    std::string key() const;
};

RegimeSignature signature_of_point(const ObservationScheme& scheme,
                                   std::span<const double> point, double t,
                                   int n, bool marks);

// Signature shared by every point of one observation atom.
RegimeSignature atom_signature(const ObservationScheme& scheme,
                               const ReferenceMeasure& reference,
                               std::span<const std::size_t> atom, double t,
                               int n, bool marks);

// The default-indicator flow that matches the model's coordinates.
ObservationScheme scheme_for_model(const DensityModel& model);

// Candidate observer-level process, one evaluator covering all regimes.
// Pieces return NaN where a construction divides by a vanishing density;
// checks skip those states and count them.
struct GMartingaleCandidate {
    int n = 1;
    bool ordered = false;
    bool marks = false;
    bool adapted = true;  // candidates that peek ahead are refused
    std::string label;
    std::function<double(double t, int node, const RegimeSignature&)> piece;
    double at(double t, int node, const RegimeSignature& sig) const {
        return piece(t, node, sig);
    }
};

GMartingaleCandidate candidate_constant(const DensityModel& model, double c);
// The running conditional expectation of a terminal payoff, a martingale by
// the tower property. Used to seed passing candidates on any grid fixture.
GMartingaleCandidate candidate_from_payoff(const DensityModel& model,
                                           const ObservationScheme& scheme,
                                           const Payoff& payoff);
GMartingaleCandidate candidate_drift(const DensityModel& model);
// Scales the value at one seeded (time, node, regime) state by 1 + eps.
GMartingaleCandidate perturb_candidate(GMartingaleCandidate base,
                                       const DensityModel& model,
                                       const ObservationScheme& scheme,
                                       std::uint64_t seed, double eps = 1e-3);

struct CheckRow {
    double t = 0.0;
    int node = 0;
    std::string state;
    double defect = 0.0;
};

struct CheckReport {
    std::string criterion;
    double tol = 1e-10;
    double max_defect = 0.0;
    long long skipped = 0;  // undefined pieces or zero-mass states
    bool pass = true;
    std::vector<CheckRow> rows;
    std::vector<std::string> notes;

    void add(double t, int node, std::string state, double defect);
    void finish();
};

// The reweighted terminal identity, plus the direct statement it implies.
struct MtildeReport {
    CheckReport condition;
    CheckReport direct;
    bool pass() const { return condition.pass && direct.pass; }
};

MtildeReport check_mtilde_condition(const GMartingaleCandidate& candidate,
                                    const DensityModel& model,
                                    const ObservationScheme& scheme,
                                    std::span<const double> times,
                                    double tol = 1e-10);

// Two-name coordinatewise recursion. Inputs are reference-filtration
// martingales, one per regime: a scalar series, one series per revealed
// value of each single coordinate, and a grid-indexed series for the pair.
struct PinnedSeries {
    std::vector<double> pins;
    std::vector<std::vector<std::vector<double>>> l;  // [t][node][pin index]
};

struct ConstructorInputs {
    std::vector<std::vector<double>> l0;  // [t][node]
    std::array<PinnedSeries, 2> single;
    ParametrizedMartingale both;
};

ConstructorInputs random_constructor_inputs(const DensityModel& model,
                                            std::uint64_t seed);

GMartingaleCandidate construct_G_martingale(ConstructorInputs inputs,
                                            const DensityModel& model);

// Same recursion for a deterministic two-name density, where reference
// martingales are constants in time. Integrals run over finite windows.
struct LebesgueConstructorInputs {
    double l0 = 0.0;
    std::array<std::function<double(double)>, 2> single;
    std::function<double(double, double)> both;
};

GMartingaleCandidate construct_G_martingale_lebesgue(
    LebesgueConstructorInputs inputs, const DensityModel& model);

// Whether the time-t outcome masses already equal their terminal values,
// atom by atom; when they do, reference martingales stay martingales for
// the observer, which the report verifies on seeded examples.
struct ImmersionReport {
    CheckReport equality;
    CheckReport reference_martingales;
    bool immersed = false;
};

ImmersionReport check_immersion(const DensityModel& model,
                                const ObservationScheme& scheme,
                                std::span<const double> times,
                                double tol = 1e-10);

// Per-regime identities (a) and the compensated reference-martingale form
// (b); the two sub-reports must agree on every fixture.
struct CharacterizationReport {
    CheckReport a;
    CheckReport b;
    bool equivalent = false;
    bool pass() const { return a.pass && b.pass; }
};

CharacterizationReport check_ordered_characterization(
    const GMartingaleCandidate& candidate, const DensityModel& model,
    std::span<const double> times, double tol = 1e-10);

CharacterizationReport check_nonordered_characterization(
    const GMartingaleCandidate& candidate, const DensityModel& model,
    std::span<const double> times, double tol = 1e-10);

// Outcome-indexed processes, the inputs of the initial-information checks
// and of the measure change. Evaluated per (time, node, grid index).
using ParametrizedEvaluator = std::function<double(int, int, std::size_t)>;

// Observer-level candidate read as an outcome-indexed process.
ParametrizedEvaluator as_parametrized(const GMartingaleCandidate& candidate,
                                      const DensityModel& model);

// Reweighted outcome density at one time, row-normalized per node.
struct MeasureChange {
    int t = 0;
    std::vector<int> nodes;
    std::vector<std::vector<double>> alpha_q;  // [node position][k]
    std::vector<double> normalizer;            // [node position]
    double mean = 1.0;                         // expectation of the weight
};

MeasureChange change_measure_density(const ParametrizedEvaluator& m,
                                     const DensityModel& model, int t,
                                     double tol = 1e-8);

// Single-coordinate deterministic variant: returns the reweighted density
// u -> m(u) alpha(u) / Z with Z computed by quadrature.
std::function<double(double)> change_measure_density_1d(
    const std::function<double(double)>& m, const DensityModel& model,
    double tol = 1e-6);

// Full reweighted model: tilted edge probabilities and outcome densities
// built from the candidate's terminal slice, so that prices under the new
// model match weight-adjusted prices under the old one.
DensityModel apply_change_of_measure(const GMartingaleCandidate& candidate,
                                     const DensityModel& model);

// Initial-information criterion: the product with the outcome density must
// be a reference martingale per grid point, if and only if the process is a
// martingale for an observer who knows the outcome from the start.
struct InitialReport {
    CheckReport parametrized;
    CheckReport direct;
    bool agree = false;
    bool pass() const { return parametrized.pass && direct.pass; }
};

InitialReport check_initial_enlargement_martingale(
    const ParametrizedEvaluator& m, const DensityModel& model,
    std::span<const double> times, double tol = 1e-10);

// Worst one-step tower defect of a node-indexed series, and of a
// grid-indexed family.
double tower_defect(const ScenarioTree& tree,
                    const std::vector<std::vector<double>>& series);
double tower_defect(const ScenarioTree& tree,
                    const ParametrizedMartingale& series, std::size_t k_count);

}  // namespace mdef
