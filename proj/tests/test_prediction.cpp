#include <doctest.h>

#include <cmath>

#include "mdef/conditional.hpp"
#include "mdef/fixtures.hpp"
#include "mdef/martingale.hpp"
#include "mdef/prediction.hpp"

using namespace mdef;

namespace {

DensityModel memoryless_three() {
    // prior proportional to e^{-u} on {0.5, 1.5, 2.5}
    std::vector<double> a0 = {std::exp(-0.5), std::exp(-1.5),
                              std::exp(-2.5)};
    const double z = a0[0] + a0[1] + a0[2];
    for (double& v : a0) v /= z;
    ScenarioTree tree = ScenarioTree::trivial(2);
    std::vector<std::vector<std::vector<double>>> alpha(
        3, std::vector<std::vector<double>>(tree.node_count(), a0));
    return DensityModel::grid(
        ReferenceMeasure::finite_grid({{0.5}, {1.5}, {2.5}},
                                      {1.0, 1.0, 1.0}),
        std::move(tree), std::move(alpha), 1, false, false);
}

}  // namespace

TEST_CASE("initial scheme predicts a point mass") {
    DensityModel m = memoryless_three();
    PredictionMeasure pm = predict_generic(
        m, ObservationScheme::parse("initial"), 1.0, 1);
    CHECK(pm.weights[1] == 1.0);
    CHECK(pm.weights[0] == 0.0);
}

TEST_CASE("surviving cells renormalize after the first period") {
    DensityModel m = memoryless_three();
    PredictionMeasure pm = predict_generic(
        m, ObservationScheme::parse("progressive-single"), 1.0, 2);
    const double e1 = std::exp(-1.0);
    CHECK(pm.weights[0] == 0.0);
    CHECK(std::abs(pm.weights[1] - 1.0 / (1.0 + e1)) < 1e-12);
    CHECK(std::abs(pm.weights[2] - e1 / (1.0 + e1)) < 1e-12);
    CHECK(doctest::Approx(pm.weights[1]).epsilon(1e-4) == 0.7310);
    CHECK(doctest::Approx(pm.weights[2]).epsilon(1e-4) == 0.2690);
}

TEST_CASE("time zero returns the prior for non-initial schemes") {
    DensityModel m = memoryless_three();
    PredictionMeasure pm = predict_generic(
        m, ObservationScheme::parse("progressive-single"), 0.0, 0);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(std::abs(pm.weights[k] - m.prior()[k]) < 1e-15);
}

TEST_CASE("single-name closed form: survival keeps the exponential shape") {
    DensityModel a = fixture_a();
    PredictionMeasure pm = predict_single_default(a, 1.0, 3.0);
    CHECK_FALSE(pm.on_grid);
    CHECK(pm.pins.empty());
    CHECK(pm.cut == 1.0);
    CHECK(std::abs(pm.normalizer - std::exp(-1.0)) < 1e-12);
}

TEST_CASE("single-name closed form: observed default pins the time") {
    DensityModel a = fixture_a();
    PredictionMeasure pm = predict_single_default(a, 1.0, 0.4);
    REQUIRE(pm.pins.size() == 1);
    CHECK(pm.pins[0].second == 0.4);
}

TEST_CASE("insider cut conditions the surviving density to one side") {
    DensityModel a = fixture_a();
    PredictionMeasure pm = predict_single_default(a, 1.0, 1.5, 2.0);
    CHECK(pm.cut == 1.0);
    CHECK(pm.regime == "alive-cut-lo");
    const double z = std::exp(-1.0) - std::exp(-2.0);
    CHECK(std::abs(pm.normalizer - z) < 1e-12);

    PredictionMeasure late = predict_single_default(a, 2.0, 1.5, 2.0);
    REQUIRE(late.pins.size() == 1);
    CHECK(late.pins[0].second == 1.5);
}

TEST_CASE("ranked pair: one observed default pins the first coordinate") {
    DensityModel d = fixture_d_ordered();
    const double realized[2] = {0.5, 2.3};
    PredictionMeasure pm = predict_ordered(d, 1.0, {realized, 2});
    REQUIRE(pm.pins.size() == 1);
    CHECK(pm.pins[0] == std::pair<int, double>{0, 0.5});
    CHECK(std::abs(pm.normalizer - 2.0 * std::exp(-0.5) * std::exp(-1.0)) <
          1e-12);
}

TEST_CASE("coordinatewise pair: independence factorizes the free density") {
    DensityModel d = fixture_d();
    const double realized[2] = {0.3, 5.0};
    PredictionMeasure pm = predict_nonordered(d, 1.0, {realized, 2});
    REQUIRE(pm.pins.size() == 1);
    CHECK(pm.pins[0].first == 0);
    const double z = std::exp(-0.3) * std::exp(-1.0);
    CHECK(std::abs(pm.normalizer - z) < 1e-12);
}

TEST_CASE("closed forms agree with the partition route on grids") {
    for (const char* name : {"a-grid", "c-ordered", "c-nonordered",
                             "c-marked"}) {
        CAPTURE(name);
        DensityModel m = fixture_by_name(name);
        const ObservationScheme scheme = scheme_for_model(m);
        for (double t : {0.0, 1.0, 2.0}) {
            for (std::size_t k = 0; k < m.reference().size(); ++k) {
                PredictionMeasure generic =
                    predict_generic(m, scheme, t, k);
                const auto& pt = m.reference().point(k);
                PredictionMeasure closed = [&] {
                    if (m.marks()) return predict_marked(m, t, pt);
                    if (m.n() == 1)
                        return predict_single_default(m, t, pt[0]);
                    if (m.ordered()) return predict_ordered(m, t, pt);
                    return predict_nonordered(m, t, pt);
                }();
                REQUIRE(generic.weights.size() == closed.weights.size());
                for (std::size_t j = 0; j < generic.weights.size(); ++j)
                    CHECK(std::abs(generic.weights[j] - closed.weights[j]) <
                          1e-10);
            }
        }
    }
}

TEST_CASE("every prediction measure normalizes on its support") {
    for (const char* name : {"a-grid", "b", "c-ordered", "c-nonordered"}) {
        DensityModel m = fixture_by_name(name);
        const ObservationScheme scheme = scheme_for_model(m);
        for (int t = 0; t <= m.t_max(); ++t) {
            for (std::size_t k = 0; k < m.reference().size(); ++k) {
                PredictionMeasure pm = predict_generic(m, scheme, t, k);
                if (pm.mass_zero) continue;
                double s = 0.0;
                for (double w : pm.weights) s += w;
                CHECK(std::abs(s - 1.0) < 1e-10);
            }
        }
    }
}

TEST_CASE("observer law is a martingale under its own one-step transition") {
    // For each grid point k and t<s: averaging eta_s(h) over the atoms of
    // time s that split the time-t atom of k, weighted by their conditional
    // mass, recovers eta_t(h).
    DensityModel m = fixture_c_nonordered();
    const ObservationScheme scheme = scheme_for_model(m);
    SplitMix64 rng(404);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> h(m.reference().size());
        for (double& v : h) v = rng.uniform01();
        for (int t = 0; t < m.t_max(); ++t) {
            const int s = t + 1;
            const Partition pt_part = m.partition(scheme, t);
            const Partition ps_part = m.partition(scheme, s);
            // single-path law over outcomes: use the root scenario at its
            // depth-t ancestor via the prior (time-constant reference tree
            // not needed; this checks the outcome marginal only)
            for (std::size_t a = 0; a < pt_part.atoms.size(); ++a) {
                double mass_t = 0.0, want = 0.0;
                for (std::size_t k : pt_part.atoms[a]) {
                    mass_t += m.eta(k);
                    want += m.eta(k) * h[k];
                }
                if (mass_t <= 0.0) continue;
                want /= mass_t;
                double got = 0.0;
                for (std::size_t b = 0; b < ps_part.atoms.size(); ++b) {
                    if (pt_part.atom_of[ps_part.atoms[b][0]] !=
                        static_cast<int>(a))
                        continue;
                    double mass_s = 0.0, hs = 0.0;
                    for (std::size_t k : ps_part.atoms[b]) {
                        mass_s += m.eta(k);
                        hs += m.eta(k) * h[k];
                    }
                    if (mass_s <= 0.0) continue;
                    got += (mass_s / mass_t) * (hs / mass_s);
                }
                CHECK(std::abs(got - want) < 1e-10);
            }
        }
    }
}

TEST_CASE("pins stay constant between arrivals") {
    DensityModel d = fixture_d_ordered();
    const double realized[2] = {0.5, 3.2};
    std::vector<std::pair<int, double>> seen;
    for (double t : {0.6, 1.0, 2.0, 3.0}) {
        PredictionMeasure pm = predict_ordered(d, t, {realized, 2});
        REQUIRE(pm.pins.size() == 1);
        seen.push_back(pm.pins[0]);
    }
    for (const auto& p : seen) CHECK(p == seen[0]);
}
