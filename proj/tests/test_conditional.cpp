#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mdef/conditional.hpp"
#include "mdef/fixtures.hpp"
#include "mdef/martingale.hpp"
#include "mdef/oracle.hpp"

using namespace mdef;

namespace {

Payoff golden_payoff(const DensityModel& m) {
    SplitMix64 rng(2024);
    std::vector<double> row(m.reference().size());
    for (double& v : row) v = rng.uniform01();
    return Payoff::table(2.0, {row});
}

Payoff scenario_payoff(double maturity) {
    return Payoff::callable(
        maturity,
        [](int node, std::span<const double> x) {
            return double(node) + x[0];
        },
        "node-plus-first-time");
}

// the grouping rule behind the regime-indexed tables, replayed per point
std::pair<unsigned, std::vector<double>> regime_of_point(
    const std::vector<double>& pt, int n, double t, bool ordered) {
    unsigned code = 0;
    std::vector<double> pins;
    if (ordered) {
        int c = 0;
        while (c < n && pt[c] <= t + 1e-9) ++c;
        code = unsigned(c);
        pins.assign(pt.begin(), pt.begin() + c);
    } else {
        for (int j = 0; j < n; ++j)
            if (pt[j] <= t + 1e-9) {
                code |= 1u << j;
                pins.push_back(pt[j]);
            }
    }
    return {code, pins};
}

const RegimeValue* find_regime(const std::vector<RegimeValue>& table,
                               unsigned code,
                               const std::vector<double>& pins) {
    for (const auto& rv : table) {
        if (rv.code != code || rv.pins.size() != pins.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < pins.size(); ++i)
            if (std::abs(rv.pins[i] - pins[i]) > 1e-12) same = false;
        if (same) return &rv;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("full information pins the payoff where the outcome is known") {
    DensityModel b = fixture_b();
    FullInfoTable ft = condexp_full_info(b, scenario_payoff(1.0));
    CHECK(std::abs(ft.value[1][1][0] - 2.0) < 1e-14);
    CHECK(std::abs(ft.value[1][2][1] - 4.0) < 1e-14);
    CHECK(std::abs(ft.value[0][0][0] - 2.0) < 1e-14);
    CHECK(std::abs(ft.value[0][0][1] - 4.0) < 1e-14);
    CHECK(ft.undefined_states == 2);
}

TEST_CASE("scenario-independent payoffs pass through the outcome sigma-field") {
    DensityModel c = fixture_c_nonordered();
    SplitMix64 rng(2024);
    std::vector<double> row(c.reference().size());
    for (double& v : row) v = rng.uniform01();
    Payoff p = Payoff::table(2.0, {row});
    FullInfoTable ft = condexp_full_info(c, p);
    for (int t = 0; t <= c.t_max(); ++t)
        for (int id : c.tree().nodes_at(t))
            for (std::size_t k = 0; k < row.size(); ++k)
                CHECK(std::abs(ft.value[t][id][k] - row[k]) < 1e-12);
    HSnapshot h0 = condexp_H(c, p, 0);
    for (std::size_t k = 0; k < row.size(); ++k)
        CHECK(h0.value[0][k] == ft.value[0][0][k]);
}

TEST_CASE("both observation routes produce the same tables") {
    for (const char* name :
         {"b", "a-grid", "c-ordered", "c-nonordered", "c-marked"}) {
        CAPTURE(name);
        DensityModel m = fixture_by_name(name);
        ObservationScheme scheme = scheme_for_model(m);
        Payoff p = golden_payoff(m);
        for (int t = 0; t <= m.t_max(); ++t) {
            CondexpTable d = condexp_G(m, scheme, p, t, CondexpMethod::direct);
            CondexpTable y = condexp_G(m, scheme, p, t, CondexpMethod::bayes);
            REQUIRE(d.nodes == y.nodes);
            for (std::size_t i = 0; i < d.nodes.size(); ++i)
                for (std::size_t k = 0; k < m.reference().size(); ++k) {
                    const int da = d.partition.atom_of[k];
                    const int ya = y.partition.atom_of[k];
                    REQUIRE(d.undefined[i][da] == y.undefined[i][ya]);
                    if (d.undefined[i][da]) continue;
                    CHECK(std::abs(d.value[i][da] - y.value[i][ya]) < 1e-10);
                }
        }
    }
}

TEST_CASE("production tables match the enumeration oracle") {
    for (const char* name : {"b", "a-grid", "c-ordered", "c-marked"}) {
        CAPTURE(name);
        DensityModel m = fixture_by_name(name);
        ObservationScheme scheme = scheme_for_model(m);
        for (const Payoff& p :
             {golden_payoff(m), Payoff::survival(2.0, 0, 2.0)}) {
            for (int t = 0; t <= m.t_max(); ++t) {
                CondexpTable prod = condexp_G(m, scheme, p, t);
                CondexpTable ora = oracle_condexp_G(m, scheme, p, t);
                REQUIRE(prod.nodes == ora.nodes);
                for (std::size_t i = 0; i < prod.nodes.size(); ++i)
                    for (std::size_t k = 0; k < m.reference().size(); ++k) {
                        const int pa = prod.partition.atom_of[k];
                        const int oa = ora.partition.atom_of[k];
                        REQUIRE(prod.undefined[i][pa] == ora.undefined[i][oa]);
                        if (prod.undefined[i][pa]) continue;
                        CHECK(std::abs(prod.value[i][pa] - ora.value[i][oa]) <
                              1e-10);
                    }
            }
        }
    }
}

TEST_CASE("the two-scenario model resolves the outcome at the first step") {
    DensityModel b = fixture_b();
    Payoff p = Payoff::point_indicator(1.0, {2.0});
    CondexpTable ct = condexp_G(b, scheme_for_model(b), p, 1);
    REQUIRE(ct.nodes == std::vector<int>{1, 2});
    CHECK(std::abs(ct.at_point(0, 0) - 0.0) < 1e-14);
    CHECK(std::abs(ct.at_point(1, 1) - 1.0) < 1e-14);
}

TEST_CASE("conditioning through the full-information field is consistent") {
    DensityModel c = fixture_c_nonordered();
    ObservationScheme scheme = scheme_for_model(c);
    Payoff p = scenario_payoff(2.0);
    const int t = 1;
    HSnapshot h = condexp_H(c, p, t);
    JointMeasure jm = build_joint_measure(c, c.t_max());
    AtomTable atoms = atoms_G(jm, c, scheme, t);
    // snapshot value seen from each terminal state
    std::vector<std::vector<double>> hv(jm.nodes.size());
    for (std::size_t i = 0; i < jm.nodes.size(); ++i) {
        const int at_t = c.tree().ancestor_at(jm.nodes[i], t);
        for (std::size_t k = 0; k < c.reference().size(); ++k)
            hv[i].push_back(h.value[at_t][k]);
    }
    std::vector<BruteValue> lhs = brute_force_condexp(jm, atoms, hv);
    std::vector<BruteValue> rhs =
        brute_force_condexp(jm, atoms, payoff_values(jm, c, p));
    REQUIRE(lhs.size() == rhs.size());
    for (std::size_t a = 0; a < lhs.size(); ++a) {
        REQUIRE(lhs[a].mass_zero == rhs[a].mass_zero);
        if (!lhs[a].mass_zero)
            CHECK(std::abs(lhs[a].value - rhs[a].value) < 1e-10);
    }
}

TEST_CASE("closed forms reproduce the memoryless survival price") {
    DensityModel a = fixture_a();
    Payoff surv = Payoff::survival(2.0, 0, 2.0);
    PredictionMeasure alive = predict_single_default(a, 1.0, 5.0);
    CHECK(std::abs(condexp_G_lebesgue(a, surv, alive) - std::exp(-1.0)) <
          1e-9);
    PredictionMeasure hit = predict_single_default(a, 1.0, 0.4);
    CHECK(std::abs(condexp_G_lebesgue(a, surv, hit)) < 1e-12);
    CHECK(std::abs(condexp_G_lebesgue(a, Payoff::default_by(2.0, 0, 2.0), hit) -
                   1.0) < 1e-12);

    DensityModel d = fixture_d();
    std::vector<double> one_hit = {0.3, 5.0};
    PredictionMeasure pm = predict_nonordered(d, 1.0, one_hit);
    CHECK(std::abs(condexp_G_lebesgue(d, Payoff::survival(2.0, 1, 2.0), pm) -
                   std::exp(-1.0)) < 1e-9);
    std::vector<double> none = {3.0, 5.0};
    PredictionMeasure pm2 = predict_nonordered(d, 1.0, none);
    CHECK(std::abs(condexp_G_lebesgue(d, Payoff::all_survive(2.0, 2.0), pm2) -
                   std::exp(-2.0)) < 1e-9);

    DensityModel dord = fixture_d_ordered();
    std::vector<double> ranked = {0.5, 2.3};
    PredictionMeasure pm3 = predict_ordered(dord, 1.0, ranked);
    CHECK(std::abs(
              condexp_G_lebesgue(dord, Payoff::survival(2.0, 1, 2.0), pm3) -
              std::exp(-1.0)) < 1e-9);
}

TEST_CASE("regime-indexed tables agree with the partition route") {
    for (const char* name : {"c-ordered", "c-nonordered"}) {
        CAPTURE(name);
        DensityModel m = fixture_by_name(name, 7);
        ObservationScheme scheme = scheme_for_model(m);
        Payoff p = golden_payoff(m);
        for (int t = 0; t <= m.t_max(); ++t) {
            CondexpTable gen = condexp_G(m, scheme, p, t);
            std::vector<RegimeValue> spec =
                m.ordered() ? condexp_G_ordered(m, p, t)
                            : condexp_G_nonordered(m, p, t);
            for (std::size_t k = 0; k < m.reference().size(); ++k) {
                auto [code, pins] = regime_of_point(
                    m.reference().point(k), m.n(), double(t), m.ordered());
                const RegimeValue* rv = find_regime(spec, code, pins);
                REQUIRE(rv != nullptr);
                for (std::size_t i = 0; i < gen.nodes.size(); ++i) {
                    const int atom = gen.partition.atom_of[k];
                    REQUIRE(bool(gen.undefined[i][atom]) ==
                            bool(rv->undefined[i]));
                    if (rv->undefined[i]) continue;
                    CHECK(std::abs(gen.value[i][atom] - rv->value[i]) <
                          1e-10);
                }
            }
        }
    }
}

TEST_CASE("the conditional outcome law is a point mass once resolved") {
    DensityModel b = fixture_b();
    ConditionalLawG law = conditional_law_G(b, scheme_for_model(b), 1);
    REQUIRE(law.nodes == std::vector<int>{1, 2});
    const int atom0 = law.partition.atom_of[0];
    const int atom1 = law.partition.atom_of[1];
    REQUIRE_FALSE(law.mass_zero[0][atom0]);
    CHECK(law.weights[0][atom0] == std::vector<double>{1.0, 0.0});
    REQUIRE_FALSE(law.mass_zero[1][atom1]);
    CHECK(law.weights[1][atom1] == std::vector<double>{0.0, 1.0});
    CHECK(law.mass_zero[0][atom1]);
    CHECK(law.mass_zero[1][atom0]);

    AtomLaw al = atom_law(b, 1, 1, std::vector<std::size_t>{0, 1});
    CHECK(al.weights == std::vector<double>{1.0, 0.0});
}

TEST_CASE("symmetrization doubles an exchangeable density on the chamber") {
    auto f = [](std::span<const double> u) {
        return std::exp(-u[0] - u[1]);
    };
    auto g = symmetrize_density(f, 2);
    CHECK(std::abs(g(std::vector<double>{1.0, 2.0}) -
                   2.0 * std::exp(-3.0)) <= 1e-12);
    CHECK(g(std::vector<double>{2.0, 1.0}) == 0.0);
    // a tie keeps both index permutations
    CHECK(std::abs(g(std::vector<double>{1.0, 1.0}) -
                   2.0 * std::exp(-2.0)) <= 1e-12);
}

TEST_CASE("tail masses have their closed-form values") {
    DensityModel a = fixture_a();
    CHECK(std::abs(tail_integral(a, 2.0, {}, 1.0) - std::exp(-2.0)) < 1e-9);
    DensityModel d = fixture_d();
    std::vector<std::pair<int, double>> pin = {{0, 0.3}};
    CHECK(std::abs(tail_integral(d, 1.0, pin, 1.0) -
                   std::exp(-0.3) * std::exp(-1.0)) < 1e-9);
}

TEST_CASE("the recorded sweep is reproduced") {
    std::ifstream in(std::string(MDEF_GOLDEN_DIR) +
                     "/fixture_c_sweep.csv");
    REQUIRE(in.good());
    DensityModel m = fixture_c_ordered(7);
    ObservationScheme scheme = scheme_for_model(m);
    Payoff p = golden_payoff(m);
    CondexpTable tables[3] = {condexp_G(m, scheme, p, 0),
                              condexp_G(m, scheme, p, 1),
                              condexp_G(m, scheme, p, 2)};
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "t,node,atom,value");
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tf, nf, af, vf;
        std::getline(ss, tf, ',');
        std::getline(ss, nf, ',');
        std::getline(ss, af, ',');
        std::getline(ss, vf, ',');
        const int t = std::stoi(tf);
        const int node = std::stoi(nf);
        const std::size_t atom = std::stoul(af);
        const CondexpTable& ct = tables[t];
        std::size_t pos = 0;
        while (ct.nodes[pos] != node) ++pos;
        REQUIRE(atom < ct.value[pos].size());
        if (vf == "undefined") {
            CHECK(bool(ct.undefined[pos][atom]));
        } else {
            REQUIRE_FALSE(bool(ct.undefined[pos][atom]));
            CHECK(std::abs(ct.value[pos][atom] - std::stod(vf)) < 1e-10);
        }
        ++rows;
    }
    CHECK(rows == 21);
}
