#include <benchmark/benchmark.h>

#include "mdef/conditional.hpp"
#include "mdef/fixtures.hpp"
#include "mdef/martingale.hpp"
#include "mdef/oracle.hpp"

using namespace mdef;

namespace {

Payoff bench_payoff(const DensityModel& m) {
    SplitMix64 rng(2024);
    std::vector<double> row(m.reference().size());
    for (double& v : row) v = rng.uniform01();
    return Payoff::table(double(m.t_max()), {row});
}

void BM_CondexpGrid(benchmark::State& state) {
    DensityModel m = fixture_c_marked(7);
    ObservationScheme scheme = scheme_for_model(m);
    Payoff p = bench_payoff(m);
    const int t = int(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(condexp_G(m, scheme, p, t));
}

void BM_CondexpBrute(benchmark::State& state) {
    DensityModel m = fixture_c_marked(7);
    ObservationScheme scheme = scheme_for_model(m);
    Payoff p = bench_payoff(m);
    const int t = int(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(oracle_condexp_G(m, scheme, p, t));
}

void BM_TailIntegral(benchmark::State& state) {
    DensityModel d = fixture_d();
    std::vector<std::pair<int, double>> pins = {{0, 0.3}};
    for (auto _ : state)
        benchmark::DoNotOptimize(tail_integral(d, 1.0, pins, 1.0));
}

void BM_PredictGeneric(benchmark::State& state) {
    DensityModel m = fixture_a_grid();
    ObservationScheme scheme =
        ObservationScheme::parse("progressive-single");
    for (auto _ : state)
        for (std::size_t k = 0; k < m.reference().size(); ++k)
            benchmark::DoNotOptimize(predict_generic(m, scheme, 1.0, k));
}

void BM_ParametrizedExpectation(benchmark::State& state) {
    DensityModel m = fixture_c_nonordered();
    const std::size_t K = m.reference().size();
    std::vector<std::vector<double>> terminal(m.tree().node_count());
    for (int leaf : m.tree().nodes_at(m.t_max()))
        terminal[leaf].assign(K, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(parametrized_expectation(m, terminal));
}

void BM_ConstructAndCheck(benchmark::State& state) {
    DensityModel m = fixture_c_nonordered();
    ObservationScheme scheme = scheme_for_model(m);
    const std::vector<double> times = {0.0, 1.0, 2.0};
    for (auto _ : state) {
        GMartingaleCandidate cand =
            construct_G_martingale(random_constructor_inputs(m, 1), m);
        benchmark::DoNotOptimize(
            check_mtilde_condition(cand, m, scheme, times));
    }
}

}  // namespace

BENCHMARK(BM_CondexpGrid)->Arg(1)->Arg(2);
BENCHMARK(BM_CondexpBrute)->Arg(1)->Arg(2);
BENCHMARK(BM_TailIntegral);
BENCHMARK(BM_PredictGeneric);
BENCHMARK(BM_ParametrizedExpectation);
BENCHMARK(BM_ConstructAndCheck);

BENCHMARK_MAIN();
