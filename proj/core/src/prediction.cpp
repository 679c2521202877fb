#include "mdef/prediction.hpp"

#include <cmath>

#include "mdef/conditional.hpp"

namespace mdef {

namespace {

// Normalize the selected prior masses in place; flags a zero-mass regime.
void finish_grid(PredictionMeasure& pm) {
    const double z = pairwise_sum(pm.weights);
    pm.normalizer = z;
    if (z <= 0.0) {
        pm.mass_zero = true;
        std::fill(pm.weights.begin(), pm.weights.end(), 0.0);
        return;
    }
    for (double& w : pm.weights) w /= z;
}

bool close(double a, double b) { return std::abs(a - b) <= grid_tol; }

}  // namespace

PredictionMeasure predict_generic(const DensityModel& model,
                                  const ObservationScheme& scheme, double t,
                                  std::size_t realized_k) {
    require(model.is_grid(), "partition route needs a grid model");
    require(realized_k < model.reference().size(), "grid index out of range");
    const Partition part = model.partition(scheme, t);
    const int a = part.atom_of[realized_k];
    PredictionMeasure pm;
    pm.t = t;
    pm.regime = part.labels[a];
    pm.weights.assign(model.reference().size(), 0.0);
    for (std::size_t k : part.atoms[a]) pm.weights[k] = model.eta(k);
    finish_grid(pm);
    return pm;
}

PredictionMeasure predict_single_default(const DensityModel& model, double t,
                                         double tau,
                                         std::optional<double> t0) {
    require(model.n() == 1 && !model.marks(), "single-name flow");
    require(tau >= 0.0, "default time must be nonnegative");
    const bool split = t0.has_value() && tau > t && t < *t0;
    PredictionMeasure pm;
    pm.t = t;
    if (model.is_grid()) {
        const auto& ref = model.reference();
        pm.weights.assign(ref.size(), 0.0);
        if (tau <= t) {
            pm.regime = "default@" + format_double(tau);
            for (std::size_t k = 0; k < ref.size(); ++k)
                if (close(ref.point(k)[0], tau)) pm.weights[k] = model.eta(k);
        } else if (split) {
            // the holder of the t0 indicator sees which side tau falls on
            const bool by_t0 = tau <= *t0;
            pm.regime = by_t0 ? "alive-cut-lo" : "alive-cut-hi";
            for (std::size_t k = 0; k < ref.size(); ++k) {
                const double u = ref.point(k)[0];
                if (u > t && (by_t0 ? u <= *t0 : u > *t0))
                    pm.weights[k] = model.eta(k);
            }
        } else {
            pm.regime = "alive";
            for (std::size_t k = 0; k < ref.size(); ++k)
                if (ref.point(k)[0] > t) pm.weights[k] = model.eta(k);
        }
        finish_grid(pm);
        return pm;
    }
    pm.on_grid = false;
    if (tau <= t) {
        pm.regime = "default@" + format_double(tau);
        pm.pins = {{0, tau}};
        pm.normalizer = 1.0;
        return pm;
    }
    pm.cut = t;
    const double above_t = tail_integral(model, t, {}, t);
    if (split) {
        const bool by_t0 = tau <= *t0;
        pm.regime = by_t0 ? "alive-cut-lo" : "alive-cut-hi";
        const double above_t0 = tail_integral(model, *t0, {}, *t0);
        pm.normalizer = by_t0 ? above_t - above_t0 : above_t0;
    } else {
        pm.regime = "alive";
        pm.normalizer = above_t;
    }
    return pm;
}

PredictionMeasure predict_ordered(const DensityModel& model, double t,
                                  std::span<const double> realized) {
    require(model.ordered() && !model.marks(), "ordered flow");
    require(static_cast<int>(realized.size()) == model.n(),
            "realized point has wrong dimension");
    for (std::size_t j = 1; j < realized.size(); ++j)
        require(realized[j] >= realized[j - 1],
                "realized defaults must be nondecreasing");
    int count = 0;
    while (count < model.n() && realized[count] <= t) ++count;
    PredictionMeasure pm;
    pm.t = t;
    std::string lbl = "count=" + std::to_string(count) + ";pins=";
    for (int j = 0; j < count; ++j)
        lbl += (j ? "," : "") + format_double(realized[j]);
    pm.regime = lbl;
    if (model.is_grid()) {
        const auto& ref = model.reference();
        pm.weights.assign(ref.size(), 0.0);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            const auto& pt = ref.point(k);
            bool match = true;
            for (int j = 0; j < count && match; ++j)
                match = close(pt[j], realized[j]);
            for (int j = count; j < model.n() && match; ++j)
                match = pt[j] > t;
            if (match) pm.weights[k] = model.eta(k);
        }
        finish_grid(pm);
        return pm;
    }
    pm.on_grid = false;
    for (int j = 0; j < count; ++j) pm.pins.emplace_back(j, realized[j]);
    pm.cut = t;
    pm.normalizer = tail_integral(model, t, pm.pins, t);
    return pm;
}

PredictionMeasure predict_nonordered(const DensityModel& model, double t,
                                     std::span<const double> realized) {
    require(!model.ordered() && !model.marks(), "coordinatewise flow");
    require(static_cast<int>(realized.size()) == model.n(),
            "realized point has wrong dimension");
    PredictionMeasure pm;
    pm.t = t;
    std::vector<int> defaulted;
    for (int j = 0; j < model.n(); ++j)
        if (realized[j] <= t) defaulted.push_back(j);
    std::string lbl = "set={";
    for (std::size_t i = 0; i < defaulted.size(); ++i)
        lbl += (i ? "," : "") + std::to_string(defaulted[i] + 1);
    lbl += "};pins=";
    for (std::size_t i = 0; i < defaulted.size(); ++i)
        lbl += (i ? "," : "") + format_double(realized[defaulted[i]]);
    pm.regime = lbl;
    if (model.is_grid()) {
        const auto& ref = model.reference();
        pm.weights.assign(ref.size(), 0.0);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            const auto& pt = ref.point(k);
            bool match = true;
            for (int j = 0; j < model.n() && match; ++j) {
                if (realized[j] <= t)
                    match = close(pt[j], realized[j]);
                else
                    match = pt[j] > t;
            }
            if (match) pm.weights[k] = model.eta(k);
        }
        finish_grid(pm);
        return pm;
    }
    pm.on_grid = false;
    for (int j : defaulted) pm.pins.emplace_back(j, realized[j]);
    pm.cut = t;
    pm.normalizer = tail_integral(model, t, pm.pins, t);
    return pm;
}

PredictionMeasure predict_marked(const DensityModel& model, double t,
                                 std::span<const double> realized) {
    require(model.marks(), "marked flow");
    require(model.is_grid(), "marked models are tabulated");
    const int n = model.n();
    require(static_cast<int>(realized.size()) == 2 * n,
            "realized point must carry times and marks");
    for (int j = 0; j < n; ++j)
        if (realized[j] <= t)
            require(realized[n + j] != 0.0, "marks must be nonzero");
    PredictionMeasure pm;
    pm.t = t;
    std::string lbl = "marked;pins=";
    bool first = true;
    for (int j = 0; j < n; ++j) {
        if (realized[j] > t) continue;
        lbl += (first ? "(" : ",(") + format_double(realized[j]) + ";" +
               format_double(realized[n + j]) + ")";
        first = false;
    }
    pm.regime = lbl;
    const auto& ref = model.reference();
    pm.weights.assign(ref.size(), 0.0);
    for (std::size_t k = 0; k < ref.size(); ++k) {
        const auto& pt = ref.point(k);
        bool match = true;
        for (int j = 0; j < n && match; ++j) {
            if (realized[j] <= t)
                match = close(pt[j], realized[j]) &&
                        close(pt[n + j], realized[n + j]);
            else
                match = pt[j] > t;  // mark of a live name stays free
        }
        if (match) pm.weights[k] = model.eta(k);
    }
    finish_grid(pm);
    return pm;
}

}  // namespace mdef
