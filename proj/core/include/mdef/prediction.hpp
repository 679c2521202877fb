#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdef/density_model.hpp"
#include "mdef/observation_scheme.hpp"

namespace mdef {

// Conditional law of the default times given the observations up to time t.
// On a grid it is a weight vector over the grid points. For parametric models
// it is kept in closed form: Dirac pins for the defaults seen so far, and the
// prior density of the remaining coordinates restricted beyond the cut and
// renormalized.
struct PredictionMeasure {
    double t = 0.0;
    std::string regime;
    bool on_grid = true;
    std::vector<double> weights;  // grid form, sums to 1 unless mass_zero
    bool mass_zero = false;       // observed regime carries zero prior mass

    std::vector<std::pair<int, double>> pins;  // closed form
    double cut = 0.0;          // free coordinates conditioned to exceed this
    double normalizer = 1.0;   // prior mass of the observed regime

    double mass(std::size_t k) const { return weights[k]; }
};

// Partition route, any scheme, grid models.
PredictionMeasure predict_generic(const DensityModel& model,
                                  const ObservationScheme& scheme, double t,
                                  std::size_t realized_k);

// Closed forms per observation flow. On grid models these must agree with the
// partition route; for parametric models they are the only representation.
PredictionMeasure predict_single_default(
    const DensityModel& model, double t, double tau,
    std::optional<double> t0 = std::nullopt);
PredictionMeasure predict_ordered(const DensityModel& model, double t,
                                  std::span<const double> realized);
PredictionMeasure predict_nonordered(const DensityModel& model, double t,
                                     std::span<const double> realized);
PredictionMeasure predict_marked(const DensityModel& model, double t,
                                 std::span<const double> realized);

}  // namespace mdef
