#include <doctest.h>

#include <cmath>
#include <map>

#include "mdef/conditional.hpp"
#include "mdef/fixtures.hpp"
#include "mdef/martingale.hpp"
#include "mdef/oracle.hpp"

using namespace mdef;

TEST_CASE("trivial partition averages to the unconditional mean") {
    DensityModel b = fixture_b();
    JointMeasure jm = build_joint_measure(b, b.t_max());
    AtomTable atoms = atoms_trivial(jm);
    Payoff y = Payoff::table(1.0, {{1.0, 2.0}});
    const auto vals = payoff_values(jm, b, y);
    const auto res = brute_force_condexp(jm, atoms, vals);
    REQUIRE(res.size() == 1);
    CHECK(std::abs(res[0].value - 1.5) < 1e-14);
}

TEST_CASE("two-scenario model resolves the outcome at time one") {
    DensityModel b = fixture_b();
    JointMeasure jm = build_joint_measure(b, b.t_max());
    AtomTable atoms = atoms_G(jm, b, scheme_for_model(b), 1);
    Payoff y = Payoff::table(1.0, {{1.0, 2.0}});  // the outcome itself
    const auto vals = payoff_values(jm, b, y);
    const auto res = brute_force_condexp(jm, atoms, vals);
    std::map<std::string, double> by_id;
    for (std::size_t i = 0; i < atoms.atoms.size(); ++i)
        if (!res[i].mass_zero) by_id[atoms.atoms[i].id] = res[i].value;
    // scenario node 1 observed the default of outcome 1; node 2 stayed alive
    bool saw_low = false, saw_high = false;
    for (const auto& [id, v] : by_id) {
        if (std::abs(v - 1.0) < 1e-14) saw_low = true;
        if (std::abs(v - 2.0) < 1e-14) saw_high = true;
    }
    CHECK(saw_low);
    CHECK(saw_high);
}

TEST_CASE("coarse atoms average fine atoms exactly") {
    DensityModel c = fixture_c_nonordered();
    JointMeasure jm = build_joint_measure(c, c.t_max());
    const ObservationScheme scheme = scheme_for_model(c);
    AtomTable fine = atoms_G(jm, c, scheme, 2);
    AtomTable coarse = atoms_G(jm, c, scheme, 1);
    SplitMix64 rng(17);
    std::vector<std::vector<double>> tbl(1);
    tbl[0].resize(c.reference().size());
    for (double& v : tbl[0]) v = rng.uniform01();
    const auto vals = payoff_values(jm, c, Payoff::table(2.0, tbl));
    const auto rf = brute_force_condexp(jm, fine, vals);
    const auto rc = brute_force_condexp(jm, coarse, vals);
    // group fine atoms by the coarse atom containing them
    for (std::size_t ci = 0; ci < coarse.atoms.size(); ++ci) {
        if (rc[ci].mass_zero) continue;
        double mass = 0.0, acc = 0.0;
        for (std::size_t fi = 0; fi < fine.atoms.size(); ++fi) {
            const auto& probe = fine.atoms[fi].members[0];
            bool inside = false;
            for (const auto& mem : coarse.atoms[ci].members)
                if (mem.node_pos == probe.node_pos && mem.k == probe.k)
                    inside = true;
            if (!inside) continue;
            mass += fine.atoms[fi].mass;
            acc += fine.atoms[fi].mass * rf[fi].value;
        }
        CHECK(std::abs(acc / mass - rc[ci].value) < 1e-12);
    }
}

TEST_CASE("joint masses on the two-scenario model sit on the diagonal") {
    DensityModel b = fixture_b();
    JointMeasure jm = build_joint_measure(b, b.t_max());
    REQUIRE(jm.nodes == std::vector<int>{1, 2});
    CHECK(std::abs(jm.mass[0][0] - 0.5) < 1e-15);
    CHECK(std::abs(jm.mass[1][1] - 0.5) < 1e-15);
    CHECK(jm.mass[0][1] == 0.0);
    CHECK(jm.mass[1][0] == 0.0);
    CHECK(std::abs(jm.total - 1.0) < 1e-14);
}

TEST_CASE("sampling is reproducible and matches the prior") {
    DensityModel b = fixture_b();
    const auto s1 = sample_system(b, scheme_for_model(b), 9, 2000);
    const auto s2 = sample_system(b, scheme_for_model(b), 9, 2000);
    REQUIRE(s1.size() == s2.size());
    long long diag = 0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].leaf == s2[i].leaf);
        CHECK(s1[i].k == s2[i].k);
        // terminal law concentrates on scenario-i with outcome-i
        const bool low = s1[i].leaf == 1;
        CHECK(s1[i].k == (low ? 0 : 1));
        diag += low;
    }
    // binomial(2000, 1/2) three-sigma band
    CHECK(std::abs(diag - 1000.0) < 3.0 * std::sqrt(2000 * 0.25) + 1.0);
}

TEST_CASE("parametric sampling honours the exponential tail") {
    DensityModel a = fixture_a();
    const auto s = sample_system(a, scheme_for_model(a), 11, 20000);
    long long alive = 0;
    for (const auto& d : s) alive += d.x[0] > 1.0;
    const double p = std::exp(-1.0);
    const double sigma = std::sqrt(20000 * p * (1 - p));
    CHECK(std::abs(alive - 20000 * p) < 3.0 * sigma);
}

TEST_CASE("monte carlo bands cover an exact conditional value") {
    DensityModel c = fixture_c_nonordered();
    const ObservationScheme scheme = scheme_for_model(c);
    Payoff y = Payoff::all_survive(2.0, 2.0);
    const CondexpTable exact = condexp_G(c, scheme, y, 1);
    const auto samples = sample_system(c, scheme, 23, 100000);
    // condition on: scenario node 1 at depth 1, no default observed yet
    const int node = 1;
    const std::string atom_label = exact.partition.labels.back();
    std::size_t atom_idx = exact.partition.atoms.size() - 1;
    McEstimate est = mc_conditional(
        samples,
        [&](const SystemSample& s) {
            return double(s.x[0] > 2.0 && s.x[1] > 2.0);
        },
        [&](const SystemSample& s) {
            if (c.tree().ancestor_at(s.leaf, 1) != node) return false;
            return exact.partition.atom_of[std::size_t(s.k)] ==
                   static_cast<int>(atom_idx);
        });
    const double want = exact.value[0][atom_idx];
    CHECK(est.count > 1000);
    CHECK(std::abs(est.mean - want) <= est.half_width);
}
