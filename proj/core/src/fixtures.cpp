#include "mdef/fixtures.hpp"

#include <cmath>
#include <stdexcept>

namespace mdef {

namespace {

using Alpha = std::vector<std::vector<std::vector<double>>>;

// terminal densities drawn in [0.25, 1.25), normalized per leaf, then pulled
// back through the tree so the family is a martingale by construction
Alpha seeded_alpha(const ScenarioTree& tree,
                   const std::vector<double>& weights, std::uint64_t seed) {
    const int T = tree.t_max();
    const std::size_t K = weights.size();
    SplitMix64 rng(seed);
    Alpha alpha(T + 1, std::vector<std::vector<double>>(
                           tree.node_count(), std::vector<double>(K, 0.0)));
    for (int leaf : tree.nodes_at(T)) {
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            alpha[T][leaf][k] = 0.25 + rng.uniform01();
            z += alpha[T][leaf][k] * weights[k];
        }
        for (std::size_t k = 0; k < K; ++k) alpha[T][leaf][k] /= z;
    }
    std::vector<double> slice(tree.node_count(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        for (int leaf : tree.nodes_at(T)) slice[leaf] = alpha[T][leaf][k];
        for (int t = 0; t < T; ++t) {
            const std::vector<double> e = tree.expect_back(slice, T, t);
            for (int id : tree.nodes_at(t)) alpha[t][id][k] = e[id];
        }
    }
    return alpha;
}

Alpha constant_alpha(const ScenarioTree& tree, std::size_t K, double value) {
    Alpha alpha(tree.t_max() + 1,
                std::vector<std::vector<double>>(
                    tree.node_count(), std::vector<double>(K, value)));
    return alpha;
}

}  // namespace

DensityModel fixture_a(int t_max) {
    return DensityModel::parametric(ReferenceMeasure::lebesgue_truncated(10.0),
                                    independent_exponential({1.0}), t_max);
}

DensityModel fixture_a_grid(int t_max) {
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
    std::vector<double> a0;
    for (int k = 0; k < 10; ++k) {
        points.push_back({k + 0.5});
        weights.push_back(1.0);
        a0.push_back(k < 9 ? std::exp(-double(k)) * (1.0 - std::exp(-1.0))
                           : std::exp(-9.0));
    }
    ScenarioTree tree = ScenarioTree::trivial(t_max);
    Alpha alpha(t_max + 1);
    for (int t = 0; t <= t_max; ++t)
        alpha[t].assign(tree.node_count(), a0);
    return DensityModel::grid(
        ReferenceMeasure::finite_grid(std::move(points), std::move(weights)),
        std::move(tree), std::move(alpha), 1, false, false);
}

DensityModel fixture_b() {
    ScenarioTree tree =
        ScenarioTree::build(1, {{-1, 1.0}, {0, 0.5}, {0, 0.5}});
    Alpha alpha(2, std::vector<std::vector<double>>(3, {0.0, 0.0}));
    alpha[0][0] = {1.0, 1.0};
    alpha[1][1] = {2.0, 0.0};
    alpha[1][2] = {0.0, 2.0};
    return DensityModel::grid(
        ReferenceMeasure::finite_grid({{1.0}, {2.0}}, {0.5, 0.5}),
        std::move(tree), std::move(alpha), 1, false, false);
}

ScenarioTree binary_two_step() {
    return ScenarioTree::build(2, {{-1, 1.0},
                                   {0, 0.6},
                                   {0, 0.4},
                                   {1, 0.5},
                                   {1, 0.5},
                                   {2, 0.3},
                                   {2, 0.7}});
}

DensityModel fixture_c_ordered(std::uint64_t seed) {
    const std::vector<std::vector<double>> points = {
        {1.0, 2.0}, {1.0, 3.0}, {1.0, 4.0},
        {2.0, 3.0}, {2.0, 4.0}, {3.0, 4.0}};
    const std::vector<double> weights(points.size(), 1.0 / 6.0);
    ScenarioTree tree = binary_two_step();
    Alpha alpha = seeded_alpha(tree, weights, seed);
    return DensityModel::grid(ReferenceMeasure::finite_grid(points, weights),
                              std::move(tree), std::move(alpha), 2, true,
                              false);
}

DensityModel fixture_c_nonordered(std::uint64_t seed) {
    const std::vector<std::vector<double>> points = {
        {1.0, 2.0}, {1.0, 3.0}, {2.0, 1.0}, {2.0, 3.0},
        {3.0, 1.0}, {3.0, 2.0}, {3.0, 3.0}};
    const std::vector<double> weights(points.size(), 1.0 / 7.0);
    ScenarioTree tree = binary_two_step();
    Alpha alpha = seeded_alpha(tree, weights, seed);
    return DensityModel::grid(ReferenceMeasure::finite_grid(points, weights),
                              std::move(tree), std::move(alpha), 2, false,
                              false);
}

DensityModel fixture_c_product() {
    const std::vector<std::vector<double>> points = {
        {1.0, 2.0}, {1.0, 3.0}, {2.0, 1.0}, {2.0, 3.0},
        {3.0, 1.0}, {3.0, 2.0}, {3.0, 3.0}};
    const std::vector<double> weights(points.size(), 1.0 / 7.0);
    ScenarioTree tree = binary_two_step();
    Alpha alpha = constant_alpha(tree, points.size(), 1.0);
    return DensityModel::grid(ReferenceMeasure::finite_grid(points, weights),
                              std::move(tree), std::move(alpha), 2, false,
                              false);
}

DensityModel fixture_c_marked(std::uint64_t seed) {
    std::vector<std::vector<double>> points;
    for (auto [v1, v2] : {std::pair{1.0, 2.0}, {1.0, 3.0}, {2.0, 3.0}})
        for (double l1 : {-1.0, 1.0})
            for (double l2 : {-1.0, 1.0}) points.push_back({v1, v2, l1, l2});
    const std::vector<double> weights(points.size(), 1.0 / 12.0);
    ScenarioTree tree = binary_two_step();
    Alpha alpha = seeded_alpha(tree, weights, seed);
    return DensityModel::grid(ReferenceMeasure::finite_grid(points, weights),
                              std::move(tree), std::move(alpha), 2, true,
                              true);
}

DensityModel fixture_d(int t_max) {
    return DensityModel::parametric(ReferenceMeasure::lebesgue_truncated(10.0),
                                    independent_exponential({1.0, 1.0}),
                                    t_max);
}

DensityModel fixture_d_ordered(int t_max) {
    return DensityModel::parametric(ReferenceMeasure::lebesgue_truncated(10.0),
                                    exchangeable_exponential_ordered(2, 1.0),
                                    t_max);
}

std::vector<std::string> fixture_names() {
    return {"a",         "a-grid",       "b",        "c-ordered",
            "c-nonordered", "c-product", "c-marked", "d",
            "d-ordered"};
}

DensityModel fixture_by_name(const std::string& name, std::uint64_t seed) {
    if (name == "a") return fixture_a();
    if (name == "a-grid") return fixture_a_grid();
    if (name == "b") return fixture_b();
    if (name == "c-ordered") return fixture_c_ordered(seed);
    if (name == "c-nonordered") return fixture_c_nonordered(seed);
    if (name == "c-product") return fixture_c_product();
    if (name == "c-marked") return fixture_c_marked(seed);
    if (name == "d") return fixture_d();
    if (name == "d-ordered") return fixture_d_ordered();
    throw std::invalid_argument("unknown fixture: " + name);
}

}  // namespace mdef
