#include "mdef/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "mdef/quadrature.hpp"

namespace mdef {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool close(double a, double b) { return std::abs(a - b) <= grid_tol; }

int as_int_time(double t) {
    const int ti = static_cast<int>(std::llround(t));
    require(std::abs(t - ti) <= grid_tol && ti >= 0,
            "time must lie on the observation clock");
    return ti;
}

std::vector<double> coordinate_values(const ReferenceMeasure& ref, int c) {
    std::vector<double> vals;
    for (std::size_t k = 0; k < ref.size(); ++k)
        vals.push_back(ref.point(k)[c]);
    std::sort(vals.begin(), vals.end());
    std::vector<double> out;
    for (double v : vals)
        if (out.empty() || !close(out.back(), v)) out.push_back(v);
    return out;
}

double d_mass(const DensityModel& model, int t, int node,
              const std::vector<std::size_t>& members) {
    if (members.empty()) return 0.0;
    std::vector<double> terms;
    terms.reserve(members.size());
    for (std::size_t k : members)
        terms.push_back(model.alpha(t, node, k) * model.reference().weight(k));
    return pairwise_sum(terms);
}

std::vector<std::size_t> members_ordered(const ReferenceMeasure& ref,
                                         int count,
                                         std::span<const double> pins,
                                         double alive_after, int n) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        const auto& pt = ref.point(k);
        bool ok = true;
        for (int j = 0; j < count && ok; ++j) ok = close(pt[j], pins[j]);
        for (int j = count; j < n && ok; ++j) ok = pt[j] > alive_after;
        if (ok) out.push_back(k);
    }
    return out;
}

std::vector<std::size_t> members_nonordered(const ReferenceMeasure& ref,
                                            unsigned mask,
                                            std::span<const double> pins,
                                            double alive_after, int n) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        const auto& pt = ref.point(k);
        bool ok = true;
        std::size_t p = 0;
        for (int j = 0; j < n && ok; ++j) {
            if (mask & (1u << j))
                ok = close(pt[j], pins[p++]);
            else
                ok = pt[j] > alive_after;
        }
        if (ok) out.push_back(k);
    }
    return out;
}

}  // namespace

std::string RegimeSignature::key() const {
    std::string s = std::to_string(code) + "|";
    for (std::size_t i = 0; i < pins.size(); ++i)
        s += (i ? "," : "") + format_double(pins[i]);
    return s;
}

RegimeSignature signature_of_point(const ObservationScheme& scheme,
                                   std::span<const double> point, double t,
                                   int n, bool marks) {
    RegimeSignature sig;
    switch (scheme.kind) {
        case SchemeKind::progressive_single:
            require(n == 1 && !marks, "single-name flow");
            if (point[0] <= t) {
                sig.code = 1;
                sig.pins.push_back(point[0]);
            }
            return sig;
        case SchemeKind::ordered_counting: {
            require(!marks, "unmarked flow");
            int c = 0;
            while (c < n && point[c] <= t) ++c;
            sig.code = static_cast<unsigned>(c);
            sig.pins.assign(point.begin(), point.begin() + c);
            return sig;
        }
        case SchemeKind::nonordered_indicators:
            require(!marks, "unmarked flow");
            for (int j = 0; j < n; ++j) {
                if (point[j] <= t) {
                    sig.code |= 1u << j;
                    sig.pins.push_back(point[j]);
                }
            }
            return sig;
        case SchemeKind::marked_counting: {
            require(marks, "marked flow");
            int c = 0;
            while (c < n && point[c] <= t) ++c;
            sig.code = static_cast<unsigned>(c);
            for (int j = 0; j < c; ++j) {
                sig.pins.push_back(point[j]);
                sig.pins.push_back(point[n + j]);
            }
            return sig;
        }
        default:
            throw std::invalid_argument(
                "regime signatures need a default-indicator flow");
    }
}

RegimeSignature atom_signature(const ObservationScheme& scheme,
                               const ReferenceMeasure& reference,
                               std::span<const std::size_t> atom, double t,
                               int n, bool marks) {
    require(!atom.empty(), "empty atom");
    RegimeSignature sig = signature_of_point(
        scheme, reference.point(atom[0]), t, n, marks);
    for (std::size_t i = 1; i < atom.size(); ++i) {
        RegimeSignature other = signature_of_point(
            scheme, reference.point(atom[i]), t, n, marks);
        require(other.key() == sig.key(), "atom mixes regimes");
    }
    return sig;
}

ObservationScheme scheme_for_model(const DensityModel& model) {
    ObservationScheme s;
    if (model.marks())
        s.kind = SchemeKind::marked_counting;
    else if (model.n() == 1)
        s.kind = SchemeKind::progressive_single;
    else if (model.ordered())
        s.kind = SchemeKind::ordered_counting;
    else
        s.kind = SchemeKind::nonordered_indicators;
    return s;
}

GMartingaleCandidate candidate_constant(const DensityModel& model, double c) {
    GMartingaleCandidate cand;
    cand.n = model.n();
    cand.ordered = model.ordered();
    cand.marks = model.marks();
    cand.label = "constant " + format_double(c);
    cand.piece = [c](double, int, const RegimeSignature&) { return c; };
    return cand;
}

GMartingaleCandidate candidate_drift(const DensityModel& model) {
    GMartingaleCandidate cand;
    cand.n = model.n();
    cand.ordered = model.ordered();
    cand.marks = model.marks();
    cand.label = "calendar drift";
    cand.piece = [](double t, int, const RegimeSignature&) { return t; };
    return cand;
}

GMartingaleCandidate candidate_from_payoff(const DensityModel& model,
                                           const ObservationScheme& scheme,
                                           const Payoff& payoff) {
    require(model.is_grid(), "tabulated candidates need a grid model");
    const int T = model.t_max();
    auto tables = std::make_shared<
        std::vector<std::map<std::string, double>>>(T + 1);
    for (int t = 0; t <= T; ++t) {
        const CondexpTable ce = condexp_G(model, scheme, payoff, t);
        for (std::size_t i = 0; i < ce.nodes.size(); ++i) {
            for (std::size_t a = 0; a < ce.partition.atoms.size(); ++a) {
                RegimeSignature sig = atom_signature(
                    scheme, model.reference(), ce.partition.atoms[a],
                    static_cast<double>(t), model.n(), model.marks());
                const std::string key =
                    std::to_string(ce.nodes[i]) + "#" + sig.key();
                (*tables)[t][key] =
                    ce.undefined[i][a] ? kNaN : ce.value[i][a];
            }
        }
    }
    GMartingaleCandidate cand;
    cand.n = model.n();
    cand.ordered = model.ordered();
    cand.marks = model.marks();
    cand.label = "running value of " + payoff.describe();
    cand.piece = [tables](double t, int node,
                          const RegimeSignature& sig) -> double {
        const int ti = as_int_time(t);
        if (ti >= static_cast<int>(tables->size())) return kNaN;
        const auto& m = (*tables)[ti];
        auto it = m.find(std::to_string(node) + "#" + sig.key());
        return it == m.end() ? kNaN : it->second;
    };
    return cand;
}

GMartingaleCandidate perturb_candidate(GMartingaleCandidate base,
                                       const DensityModel& model,
                                       const ObservationScheme& scheme,
                                       std::uint64_t seed, double eps) {
    require(model.is_grid(), "perturbations pick grid states");
    const int T = model.t_max();
    struct State {
        int t;
        int node;
        std::string key;
    };
    std::vector<State> states;
    for (int t = 0; t < T; ++t) {
        const Partition part =
            model.partition(scheme, static_cast<double>(t));
        for (int node : model.tree().nodes_at(t)) {
            for (const auto& atom : part.atoms) {
                std::vector<std::size_t> members(atom.begin(), atom.end());
                if (d_mass(model, t, node, members) <= 0.0) continue;
                RegimeSignature sig = atom_signature(
                    scheme, model.reference(), atom, static_cast<double>(t),
                    model.n(), model.marks());
                const double v = base.at(t, node, sig);
                if (std::isnan(v) || std::abs(v) < 1e-3) continue;
                states.push_back({t, node, sig.key()});
            }
        }
    }
    require(!states.empty(), "no perturbable state with visible mass");
    SplitMix64 rng(seed);
    const State pick =
        states[static_cast<std::size_t>(rng.next() % states.size())];
    auto inner = base.piece;
    base.label += " (one state scaled)";
    base.piece = [inner, pick, eps](double t, int node,
                                    const RegimeSignature& sig) -> double {
        const double v = inner(t, node, sig);
        if (static_cast<int>(std::llround(t)) == pick.t &&
            node == pick.node && sig.key() == pick.key)
            return v * (1.0 + eps);
        return v;
    };
    return base;
}

void CheckReport::add(double t, int node, std::string state, double defect) {
    rows.push_back({t, node, std::move(state), defect});
    max_defect = std::max(max_defect, defect);
}

void CheckReport::finish() { pass = max_defect <= tol; }

namespace {

// Shared core of the reweighted identity and the per-regime identities:
// group the horizon atoms inside each time-t atom and compare the folded
// terminal masses against the current piece.
CheckReport grouped_terminal(const GMartingaleCandidate& cand,
                             const DensityModel& model,
                             const ObservationScheme& scheme,
                             std::span<const double> times,
                             bool eta_normalized, std::string name,
                             double tol) {
    CheckReport rep;
    rep.criterion = std::move(name);
    rep.tol = tol;
    model.ensure_validated();
    const ScenarioTree& tree = model.tree();
    const ReferenceMeasure& ref = model.reference();
    const int n = model.n();
    const bool marks = model.marks();

    const int T = as_int_time(times.back());
    require(T <= model.t_max(), "horizon beyond the tree");
    const Partition part_T =
        model.partition(scheme, static_cast<double>(T));
    const std::size_t B = part_T.atoms.size();
    std::vector<RegimeSignature> sig_T(B);
    for (std::size_t b = 0; b < B; ++b)
        sig_T[b] = atom_signature(scheme, ref, part_T.atoms[b],
                                  static_cast<double>(T), n, marks);

    // terminal per-atom masses, one vector over depth-T nodes per atom
    std::vector<std::vector<double>> term(B);
    for (std::size_t b = 0; b < B; ++b) {
        term[b].assign(tree.node_count(), 0.0);
        std::vector<std::size_t> members(part_T.atoms[b].begin(),
                                         part_T.atoms[b].end());
        for (int id : tree.nodes_at(T)) {
            const double d = d_mass(model, T, id, members);
            if (d > 0.0)
                term[b][id] = cand.at(T, id, sig_T[b]) * d;
        }
    }

    for (double traw : times) {
        const int t = as_int_time(traw);
        if (t >= T) continue;
        const Partition part_t =
            model.partition(scheme, static_cast<double>(t));
        require(refines(part_T, part_t),
                "horizon atoms must refine the time-t atoms");
        std::vector<std::vector<std::size_t>> group(part_t.atoms.size());
        for (std::size_t b = 0; b < B; ++b)
            group[part_t.atom_of[part_T.atoms[b][0]]].push_back(b);

        std::vector<std::vector<double>> folded(B);
        for (std::size_t b = 0; b < B; ++b)
            folded[b] = tree.expect_back(term[b], T, t);

        for (std::size_t a = 0; a < part_t.atoms.size(); ++a) {
            std::vector<std::size_t> members(part_t.atoms[a].begin(),
                                             part_t.atoms[a].end());
            RegimeSignature sig = atom_signature(
                scheme, ref, members, static_cast<double>(t), n, marks);
            std::vector<double> eta_terms;
            for (std::size_t k : members) eta_terms.push_back(model.eta(k));
            const double eta_a = pairwise_sum(eta_terms);
            if (eta_normalized && eta_a <= 0.0) {
                ++rep.skipped;
                continue;
            }
            for (int node : tree.nodes_at(t)) {
                const double dt = d_mass(model, t, node, members);
                double lhs = 0.0;
                for (std::size_t b : group[a]) lhs += folded[b][node];
                const double rhs =
                    dt > 0.0 ? cand.at(t, node, sig) * dt : 0.0;
                if (std::isnan(lhs) || std::isnan(rhs)) {
                    ++rep.skipped;
                    continue;
                }
                double defect = std::abs(lhs - rhs);
                if (eta_normalized) defect /= eta_a;
                rep.add(t, node, part_t.labels[a], defect);
            }
        }
    }
    rep.finish();
    return rep;
}

MtildeReport mtilde_parametric(const GMartingaleCandidate& cand,
                               const DensityModel& model,
                               std::span<const double> times, double tol) {
    require(model.deterministic() && !model.ordered() && !model.marks() &&
                model.n() <= 2,
            "closed-form identity covers one or two exchangeable-free names");
    const ParametricFamily& fam = *model.family();
    const double T = times.back();
    const int n = model.n();
    const int order = 16;

    MtildeReport out;
    out.condition.criterion = "reweighted terminal identity (quadrature)";
    out.condition.tol = tol;

    auto sig_of = [](unsigned code, std::initializer_list<double> pins) {
        RegimeSignature s;
        s.code = code;
        s.pins = pins;
        return s;
    };

    for (double t : times) {
        if (t >= T) continue;
        if (n == 1) {
            const double z0 = fam.tail_analytic({}, t);
            double lhs = cand.at(T, 0, sig_of(0, {})) * fam.tail_analytic({}, T);
            lhs += integrate(
                [&](double v) {
                    return cand.at(T, 0, sig_of(1, {v})) * fam.density({&v, 1});
                },
                t, T, order);
            const double rhs = cand.at(t, 0, sig_of(0, {})) * z0;
            out.condition.add(t, 0, "alive", std::abs(lhs - rhs) / z0);
            if (t > 0.0) {
                const double a = 0.5 * t;
                out.condition.add(t, 0, "pinned",
                                  std::abs(cand.at(T, 0, sig_of(1, {a})) -
                                           cand.at(t, 0, sig_of(1, {a}))));
            }
            continue;
        }
        // two names, coordinatewise regimes
        {
            const double z0 = fam.tail_analytic({}, t);
            double lhs =
                cand.at(T, 0, sig_of(0, {})) * fam.tail_analytic({}, T);
            for (int i = 0; i < 2; ++i) {
                lhs += integrate(
                    [&](double v) {
                        std::pair<int, double> pin{i, v};
                        return cand.at(T, 0, sig_of(1u << i, {v})) *
                               fam.tail_analytic({&pin, 1}, T);
                    },
                    t, T, order);
            }
            lhs += integrate2d(
                [&](double v1, double v2) {
                    const double pt[2] = {v1, v2};
                    return cand.at(T, 0, sig_of(3, {v1, v2})) *
                           fam.density({pt, 2});
                },
                t, T, t, T, order);
            const double rhs = cand.at(t, 0, sig_of(0, {})) * z0;
            out.condition.add(t, 0, "alive", std::abs(lhs - rhs) / z0);
        }
        if (t > 0.0) {
            for (int i = 0; i < 2; ++i) {
                const double a = 0.5 * t;
                std::pair<int, double> pin{i, a};
                const double z = fam.tail_analytic({&pin, 1}, t);
                double lhs = cand.at(T, 0, sig_of(1u << i, {a})) *
                             fam.tail_analytic({&pin, 1}, T);
                lhs += integrate(
                    [&](double v) {
                        const double pt[2] = {i == 0 ? a : v, i == 0 ? v : a};
                        return cand.at(T, 0, sig_of(3, {pt[0], pt[1]})) *
                               fam.density({pt, 2});
                    },
                    t, T, order);
                const double rhs = cand.at(t, 0, sig_of(1u << i, {a})) * z;
                out.condition.add(t, 0, i == 0 ? "first pinned" : "second pinned",
                                  std::abs(lhs - rhs) / z);
            }
            const double a = t / 3.0, b = 2.0 * t / 3.0;
            out.condition.add(
                t, 0, "both pinned",
                std::abs(cand.at(T, 0, sig_of(3, {a, b})) -
                         cand.at(t, 0, sig_of(3, {a, b}))));
        }
    }
    out.condition.finish();
    out.direct.criterion = "direct conclusion";
    out.direct.tol = tol;
    out.direct.notes.push_back(
        "deterministic reference flow: the grouped identity computes the "
        "conditional value directly, so no second route exists");
    out.direct.max_defect = out.condition.max_defect;
    out.direct.pass = out.condition.pass;
    return out;
}

}  // namespace

MtildeReport check_mtilde_condition(const GMartingaleCandidate& candidate,
                                    const DensityModel& model,
                                    const ObservationScheme& scheme,
                                    std::span<const double> times,
                                    double tol) {
    if (!candidate.adapted)
        throw std::invalid_argument(
            "candidate looks ahead of the observations");
    require(times.size() >= 2, "need a start and a horizon");
    check_scheme_compatible(scheme, model.n(), model.ordered(), model.marks());
    if (!model.is_grid()) return mtilde_parametric(candidate, model, times, tol);

    MtildeReport out;
    out.condition = grouped_terminal(candidate, model, scheme, times, true,
                                     "reweighted terminal identity", tol);

    // conclusion: conditional value of the horizon state equals the piece
    out.direct.criterion = "direct conclusion";
    out.direct.tol = tol;
    const ScenarioTree& tree = model.tree();
    const ReferenceMeasure& ref = model.reference();
    const int T = as_int_time(times.back());
    const int Tm = model.t_max();
    const Partition part_T =
        model.partition(scheme, static_cast<double>(T));
    std::vector<RegimeSignature> sig_T(part_T.atoms.size());
    for (std::size_t b = 0; b < part_T.atoms.size(); ++b)
        sig_T[b] = atom_signature(scheme, ref, part_T.atoms[b],
                                  static_cast<double>(T), model.n(),
                                  model.marks());
    std::vector<std::vector<double>> tbl(
        tree.node_count(), std::vector<double>(ref.size(), 0.0));
    for (int leaf : tree.nodes_at(Tm)) {
        const int at_T = tree.ancestor_at(leaf, T);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            const double v = candidate.at(T, at_T, sig_T[part_T.atom_of[k]]);
            if (std::isnan(v)) {
                require(model.alpha(Tm, leaf, k) <= 0.0,
                        "candidate undefined at the horizon on a state "
                        "with positive mass");
                continue;
            }
            tbl[leaf][k] = v;
        }
    }
    const Payoff horizon_value =
        Payoff::table(static_cast<double>(T), tbl);
    for (double traw : times) {
        const int t = as_int_time(traw);
        if (t >= T) continue;
        const CondexpTable ce = condexp_G(model, scheme, horizon_value, t);
        for (std::size_t i = 0; i < ce.nodes.size(); ++i) {
            for (std::size_t a = 0; a < ce.partition.atoms.size(); ++a) {
                if (ce.undefined[i][a]) {
                    ++out.direct.skipped;
                    continue;
                }
                RegimeSignature sig = atom_signature(
                    scheme, ref, ce.partition.atoms[a],
                    static_cast<double>(t), model.n(), model.marks());
                const double expected = candidate.at(t, ce.nodes[i], sig);
                if (std::isnan(expected)) {
                    ++out.direct.skipped;
                    continue;
                }
                out.direct.add(t, ce.nodes[i], ce.partition.labels[a],
                               std::abs(ce.value[i][a] - expected));
            }
        }
    }
    out.direct.finish();
    return out;
}

ImmersionReport check_immersion(const DensityModel& model,
                                const ObservationScheme& scheme,
                                std::span<const double> times, double tol) {
    require(model.is_grid(), "the mass comparison needs a grid model");
    model.ensure_validated();
    const ScenarioTree& tree = model.tree();
    const int T = model.t_max();

    ImmersionReport out;
    out.equality.criterion = "time-t versus terminal outcome masses";
    out.equality.tol = tol;
    for (double traw : times) {
        const int t = as_int_time(traw);
        if (t >= T) continue;
        const Partition part =
            model.partition(scheme, static_cast<double>(t));
        for (std::size_t a = 0; a < part.atoms.size(); ++a) {
            std::vector<std::size_t> members(part.atoms[a].begin(),
                                             part.atoms[a].end());
            std::vector<double> eta_terms;
            for (std::size_t k : members) eta_terms.push_back(model.eta(k));
            const double eta_a = pairwise_sum(eta_terms);
            if (eta_a <= 0.0) {
                ++out.equality.skipped;
                continue;
            }
            for (int leaf : tree.nodes_at(T)) {
                const int node = tree.ancestor_at(leaf, t);
                const double defect = std::abs(d_mass(model, T, leaf, members) -
                                               d_mass(model, t, node, members));
                out.equality.add(t, leaf, part.labels[a], defect / eta_a);
            }
        }
    }
    out.equality.finish();
    out.immersed = out.equality.pass;

    // reference martingales seen through the observation filtration
    out.reference_martingales.criterion =
        "seeded reference martingales keep zero drift for the observer";
    out.reference_martingales.tol = tol;
    for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
        SplitMix64 rng(seed);
        std::vector<double> x(tree.node_count(), 0.0);
        for (int leaf : tree.nodes_at(T)) x[leaf] = rng.uniform01();
        std::vector<std::vector<double>> series(T + 1);
        for (int t = 0; t <= T; ++t) series[t] = tree.expect_back(x, T, t);
        for (double traw : times) {
            const int t = as_int_time(traw);
            if (t >= T) continue;
            const Partition part =
                model.partition(scheme, static_cast<double>(t));
            for (std::size_t a = 0; a < part.atoms.size(); ++a) {
                std::vector<std::size_t> members(part.atoms[a].begin(),
                                                 part.atoms[a].end());
                for (int node : tree.nodes_at(t)) {
                    const double dt = d_mass(model, t, node, members);
                    if (dt <= 0.0) {
                        ++out.reference_martingales.skipped;
                        continue;
                    }
                    double e = 0.0;
                    for (int c : tree.node(node).children)
                        e += tree.node(c).edge_prob * series[t + 1][c] *
                             d_mass(model, t + 1, c, members);
                    out.reference_martingales.add(
                        t, node,
                        "seed " + std::to_string(seed) + ", " +
                            part.labels[a],
                        std::abs(e / dt - series[t][node]));
                }
            }
        }
    }
    out.reference_martingales.finish();
    return out;
}

namespace {

// Compensated per-regime processes: current piece times current atom mass,
// plus the accumulated jump terms since the regime appeared.
CheckReport compensated_report(const GMartingaleCandidate& cand,
                               const DensityModel& model,
                               const ObservationScheme& scheme, bool ordered,
                               std::span<const double> times, double tol) {
    CheckReport rep;
    rep.criterion = "compensated reference-martingale form";
    rep.tol = tol;
    const ScenarioTree& tree = model.tree();
    const ReferenceMeasure& ref = model.reference();
    const int n = model.n();
    const int T = as_int_time(times.back());
    const int t_lo = as_int_time(times.front());

    std::vector<std::vector<double>> coord_vals(n);
    for (int c = 0; c < n; ++c) coord_vals[c] = coordinate_values(ref, c);

    // every regime visible at some checked time
    std::map<std::string, RegimeSignature> sigs;
    for (int s = t_lo; s < T; ++s) {
        const Partition part =
            model.partition(scheme, static_cast<double>(s));
        for (const auto& atom : part.atoms) {
            RegimeSignature sig =
                atom_signature(scheme, ref, atom, static_cast<double>(s), n,
                               false);
            sigs.emplace(sig.key(), sig);
        }
    }

    auto members_of = [&](const RegimeSignature& sig, double alive_after) {
        return ordered ? members_ordered(ref, static_cast<int>(sig.code),
                                         sig.pins, alive_after, n)
                       : members_nonordered(ref, sig.code, sig.pins,
                                            alive_after, n);
    };
    auto next_regimes = [&](const RegimeSignature& sig) {
        std::vector<std::pair<int, unsigned>> out;  // (coordinate, new code)
        if (ordered) {
            if (static_cast<int>(sig.code) < n)
                out.emplace_back(static_cast<int>(sig.code), sig.code + 1);
        } else {
            for (int c = 0; c < n; ++c)
                if (!(sig.code & (1u << c)))
                    out.emplace_back(c, sig.code | (1u << c));
        }
        return out;
    };
    auto extend = [&](const RegimeSignature& sig, int coord, unsigned code,
                      double v) {
        RegimeSignature ext;
        ext.code = code;
        ext.pins = sig.pins;
        if (ordered) {
            ext.pins.push_back(v);
        } else {
            std::size_t pos = 0;
            for (int c = 0; c < coord; ++c)
                if (sig.code & (1u << c)) ++pos;
            ext.pins.insert(ext.pins.begin() + pos, v);
        }
        return ext;
    };

    // value of the compensated process at one (time, node)
    auto N_at = [&](const RegimeSignature& sig, int s, int node) -> double {
        double total = 0.0;
        const auto members = members_of(sig, static_cast<double>(s));
        const double d = d_mass(model, s, node, members);
        if (d > 0.0) total += cand.at(s, node, sig) * d;
        const double start = sig.pins.empty()
                                 ? 0.0
                                 : *std::max_element(sig.pins.begin(),
                                                     sig.pins.end());
        for (auto [coord, code] : next_regimes(sig)) {
            for (double v : coord_vals[coord]) {
                if (v <= start + grid_tol || v > s + grid_tol) continue;
                require(close(v, std::llround(v)),
                        "default-time values inside the horizon must sit "
                        "on the observation clock");
                const int vi = static_cast<int>(std::llround(v));
                RegimeSignature ext = extend(sig, coord, code, v);
                const auto jm = members_of(ext, v);
                const int anc = tree.ancestor_at(node, vi);
                const double dv = d_mass(model, vi, anc, jm);
                if (dv > 0.0) total += cand.at(vi, anc, ext) * dv;
            }
        }
        return total;
    };

    for (const auto& [key, sig] : sigs) {
        const double start = sig.pins.empty()
                                 ? 0.0
                                 : *std::max_element(sig.pins.begin(),
                                                     sig.pins.end());
        const int s_start =
            std::max(t_lo, static_cast<int>(std::ceil(start - grid_tol)));
        for (int s = s_start; s < T; ++s) {
            for (int node : tree.nodes_at(s)) {
                const double now = N_at(sig, s, node);
                double next = 0.0;
                for (int c : tree.node(node).children)
                    next += tree.node(c).edge_prob * N_at(sig, s + 1, c);
                if (std::isnan(now) || std::isnan(next)) {
                    ++rep.skipped;
                    continue;
                }
                rep.add(s, node, key, std::abs(next - now));
            }
        }
    }
    rep.finish();
    return rep;
}

CharacterizationReport characterization(const GMartingaleCandidate& cand,
                                        const DensityModel& model,
                                        bool ordered,
                                        std::span<const double> times,
                                        double tol) {
    require(model.is_grid() && !model.marks(),
            "characterizations run on unmarked grid models");
    require(cand.n == model.n(), "candidate dimension mismatch");
    if (model.n() > 1)
        require(model.ordered() == ordered,
                ordered ? "ordered flow" : "coordinatewise flow");
    const ObservationScheme scheme = scheme_for_model(model);

    CharacterizationReport rep;
    rep.a = grouped_terminal(cand, model, scheme, times, false,
                             "per-regime terminal identity", tol);
    rep.b = compensated_report(cand, model, scheme, ordered && model.n() > 1,
                               times, tol);
    rep.equivalent = rep.a.pass == rep.b.pass;
    return rep;
}

}  // namespace

CharacterizationReport check_ordered_characterization(
    const GMartingaleCandidate& candidate, const DensityModel& model,
    std::span<const double> times, double tol) {
    return characterization(candidate, model, true, times, tol);
}

CharacterizationReport check_nonordered_characterization(
    const GMartingaleCandidate& candidate, const DensityModel& model,
    std::span<const double> times, double tol) {
    require(model.n() <= 16, "subset regimes limited to 16 names");
    return characterization(candidate, model, false, times, tol);
}

double tower_defect(const ScenarioTree& tree,
                    const std::vector<std::vector<double>>& series) {
    double worst = 0.0;
    for (int t = 0; t + 1 < static_cast<int>(series.size()); ++t) {
        for (int node : tree.nodes_at(t)) {
            double e = 0.0;
            for (int c : tree.node(node).children)
                e += tree.node(c).edge_prob * series[t + 1][c];
            worst = std::max(worst, std::abs(e - series[t][node]));
        }
    }
    return worst;
}

double tower_defect(const ScenarioTree& tree,
                    const ParametrizedMartingale& series,
                    std::size_t k_count) {
    double worst = 0.0;
    for (int t = 0; t + 1 < static_cast<int>(series.value.size()); ++t) {
        for (int node : tree.nodes_at(t)) {
            for (std::size_t k = 0; k < k_count; ++k) {
                double e = 0.0;
                for (int c : tree.node(node).children)
                    e += tree.node(c).edge_prob * series.at(t + 1, c, k);
                worst = std::max(worst, std::abs(e - series.at(t, node, k)));
            }
        }
    }
    return worst;
}

GMartingaleCandidate construct_G_martingale(ConstructorInputs inputs,
                                            const DensityModel& model) {
    require(model.is_grid() && model.n() == 2 && !model.marks(),
            "the recursion covers two-name grid models");
    model.ensure_validated();
    const ScenarioTree& tree = model.tree();
    const ReferenceMeasure& ref = model.reference();
    const int T = model.t_max();
    const std::size_t K = ref.size();

    require(tower_defect(tree, inputs.l0) <= 1e-12,
            "scalar input drifts on the tree");
    require(tower_defect(tree, inputs.both, K) <= 1e-12,
            "pair input drifts on the tree");
    for (int i = 0; i < 2; ++i) {
        for (std::size_t idx = 0; idx < inputs.single[i].pins.size(); ++idx) {
            std::vector<std::vector<double>> slice(T + 1);
            for (int t = 0; t <= T; ++t) {
                slice[t].resize(tree.node_count(), 0.0);
                for (int id = 0; id < tree.node_count(); ++id)
                    slice[t][id] = inputs.single[i].l[t][id][idx];
            }
            require(tower_defect(tree, slice) <= 1e-12,
                    "pinned input drifts on the tree");
        }
    }

    // structural requirements that make the recursion exact on the grid
    for (std::size_t k = 0; k < K; ++k) {
        const auto& pt = ref.point(k);
        require(!(pt[0] <= T && pt[1] <= T && close(pt[0], pt[1])),
                "simultaneous defaults on the clock are not supported");
        for (int c = 0; c < 2; ++c)
            require(pt[c] > T || close(pt[c], std::llround(pt[c])),
                    "default values inside the horizon must sit on the "
                    "observation clock");
    }
    for (int t = 0; t <= T; ++t)
        for (int node : tree.nodes_at(t))
            for (std::size_t k = 0; k < K; ++k)
                require(model.alpha(t, node, k) > 0.0,
                        "the recursion needs strictly positive densities");

    struct State {
        const DensityModel* model;
        ConstructorInputs in;
    };
    auto state = std::make_shared<State>();
    state->model = &model;
    state->in = std::move(inputs);

    auto pin_index = [state](int i, double a) -> std::size_t {
        const auto& pins = state->in.single[i].pins;
        for (std::size_t idx = 0; idx < pins.size(); ++idx)
            if (close(pins[idx], a)) return idx;
        throw std::invalid_argument("pin value missing from the inputs");
    };
    // every coordinate value that can default inside the horizon needs a
    // pinned input series
    for (int i = 0; i < 2; ++i)
        for (double v : coordinate_values(ref, i))
            if (v <= T) pin_index(i, v);

    GMartingaleCandidate cand;
    cand.n = 2;
    cand.label = "two-name recursion";
    cand.ordered = model.ordered();
    cand.piece = [state, pin_index](double traw, int node,
                                    const RegimeSignature& sig) -> double {
        const DensityModel& m = *state->model;
        const ScenarioTree& tree = m.tree();
        const ReferenceMeasure& ref = m.reference();
        const int t = as_int_time(traw);
        // ranked observations reuse the coordinatewise pieces: the first
        // ranked time is coordinate 0 on the ordered chamber
        unsigned code = sig.code;
        if (m.ordered() && code == 2) code = 3;
        switch (code) {
            case 3: {
                std::size_t k = ref.size();
                for (std::size_t j = 0; j < ref.size(); ++j)
                    if (close(ref.point(j)[0], sig.pins[0]) &&
                        close(ref.point(j)[1], sig.pins[1]))
                        k = j;
                require(k < ref.size(), "pinned point off the grid");
                const double a = m.alpha(t, node, k);
                if (a <= 0.0) return kNaN;
                return state->in.both.at(t, node, k) / a;
            }
            case 1:
            case 2: {
                const int i = sig.code == 1 ? 0 : 1;
                const int j = 1 - i;
                const double a = sig.pins[0];
                std::vector<double> terms;
                double comp = 0.0;
                for (std::size_t k = 0; k < ref.size(); ++k) {
                    const auto& pt = ref.point(k);
                    if (!close(pt[i], a)) continue;
                    if (pt[j] > t) {
                        terms.push_back(m.alpha(t, node, k) * ref.weight(k));
                    } else if (pt[j] > a) {
                        const int vi =
                            static_cast<int>(std::llround(pt[j]));
                        comp += state->in.both.at(
                                    vi, tree.ancestor_at(node, vi), k) *
                                ref.weight(k);
                    }
                }
                const double s = terms.empty() ? 0.0 : pairwise_sum(terms);
                if (s <= 0.0) return kNaN;
                const double l =
                    state->in.single[i].l[t][node][pin_index(i, a)];
                return (l - comp) / s;
            }
            case 0: {
                std::vector<double> terms;
                for (std::size_t k = 0; k < ref.size(); ++k) {
                    const auto& pt = ref.point(k);
                    if (pt[0] > t && pt[1] > t)
                        terms.push_back(m.alpha(t, node, k) * ref.weight(k));
                }
                const double s = terms.empty() ? 0.0 : pairwise_sum(terms);
                if (s <= 0.0) return kNaN;
                double comp = 0.0;
                for (int i = 0; i < 2; ++i) {
                    const int j = 1 - i;
                    for (double v : coordinate_values(ref, i)) {
                        if (v > t) continue;
                        // the jump needs surviving partners at its time
                        bool possible = false;
                        for (std::size_t k = 0; k < ref.size() && !possible;
                             ++k)
                            possible = close(ref.point(k)[i], v) &&
                                       ref.point(k)[j] > v;
                        if (!possible) continue;
                        const int vi =
                            static_cast<int>(std::llround(v));
                        comp += state->in.single[i]
                                    .l[vi][tree.ancestor_at(node, vi)]
                                      [pin_index(i, v)];
                    }
                }
                return (state->in.l0[t][node] - comp) / s;
            }
            default:
                throw std::invalid_argument("unknown regime");
        }
    };
    return cand;
}

ConstructorInputs random_constructor_inputs(const DensityModel& model,
                                            std::uint64_t seed) {
    require(model.is_grid() && model.n() == 2 && !model.marks(),
            "two-name grid model required");
    const ScenarioTree& tree = model.tree();
    const ReferenceMeasure& ref = model.reference();
    const int T = model.t_max();
    const std::size_t K = ref.size();
    SplitMix64 rng(seed);
    auto draw = [&rng] { return 0.5 + rng.uniform01(); };

    ConstructorInputs in;
    std::vector<double> term(tree.node_count(), 0.0);
    for (int leaf : tree.nodes_at(T)) term[leaf] = draw();
    in.l0.resize(T + 1);
    for (int t = 0; t <= T; ++t) in.l0[t] = tree.expect_back(term, T, t);

    for (int i = 0; i < 2; ++i) {
        for (double v : coordinate_values(ref, i))
            if (v <= T) in.single[i].pins.push_back(v);
        const std::size_t P = in.single[i].pins.size();
        in.single[i].l.assign(
            T + 1, std::vector<std::vector<double>>(
                       tree.node_count(), std::vector<double>(P, 0.0)));
        for (std::size_t idx = 0; idx < P; ++idx) {
            for (int leaf : tree.nodes_at(T)) term[leaf] = draw();
            for (int t = 0; t <= T; ++t) {
                const std::vector<double> e = tree.expect_back(term, T, t);
                for (int id = 0; id < tree.node_count(); ++id)
                    in.single[i].l[t][id][idx] = e[id];
            }
        }
    }

    std::vector<std::vector<double>> pair_term(tree.node_count());
    for (int leaf : tree.nodes_at(T)) {
        pair_term[leaf].resize(K);
        for (std::size_t k = 0; k < K; ++k) pair_term[leaf][k] = draw();
    }
    in.both = parametrized_expectation(model, pair_term);
    return in;
}

GMartingaleCandidate construct_G_martingale_lebesgue(
    LebesgueConstructorInputs inputs, const DensityModel& model) {
    require(!model.is_grid() && model.deterministic() && model.n() == 2 &&
                !model.ordered(),
            "deterministic two-name density required");
    const ParametricFamily* fam = model.family();
    auto in = std::make_shared<LebesgueConstructorInputs>(std::move(inputs));
    const int order = 16;

    GMartingaleCandidate cand;
    cand.n = 2;
    cand.ordered = false;
    cand.label = "two-name recursion (closed form)";
    cand.piece = [in, fam, order](double t, int,
                                  const RegimeSignature& sig) -> double {
        switch (sig.code) {
            case 3: {
                const double pt[2] = {sig.pins[0], sig.pins[1]};
                const double d = fam->density({pt, 2});
                if (d <= 0.0) return kNaN;
                return in->both(pt[0], pt[1]) / d;
            }
            case 1:
            case 2: {
                const int i = sig.code == 1 ? 0 : 1;
                const double a = sig.pins[0];
                std::pair<int, double> pin{i, a};
                const double s = fam->tail_analytic({&pin, 1}, t);
                if (s <= 0.0) return kNaN;
                const double comp = integrate(
                    [&](double v) {
                        return i == 0 ? in->both(a, v) : in->both(v, a);
                    },
                    a, t, order);
                return (in->single[i](a) - comp) / s;
            }
            case 0: {
                const double s = fam->tail_analytic({}, t);
                if (s <= 0.0) return kNaN;
                double comp = 0.0;
                for (int i = 0; i < 2; ++i)
                    comp += integrate(in->single[i], 0.0, t, order);
                return (in->l0 - comp) / s;
            }
            default:
                throw std::invalid_argument("unknown regime");
        }
    };
    return cand;
}

ParametrizedEvaluator as_parametrized(const GMartingaleCandidate& candidate,
                                      const DensityModel& model) {
    require(candidate.n == model.n(), "candidate dimension mismatch");
    const ObservationScheme scheme = scheme_for_model(model);
    const DensityModel* m = &model;
    auto piece = candidate.piece;
    return [piece, m, scheme](int t, int node, std::size_t k) -> double {
        RegimeSignature sig = signature_of_point(
            scheme, m->reference().point(k), static_cast<double>(t), m->n(),
            m->marks());
        return piece(static_cast<double>(t), node, sig);
    };
}

MeasureChange change_measure_density(const ParametrizedEvaluator& m,
                                     const DensityModel& model, int t,
                                     double tol) {
    require(model.is_grid(), "tabulated densities need a grid model");
    model.ensure_validated();
    const ReferenceMeasure& ref = model.reference();
    MeasureChange out;
    out.t = t;
    out.nodes = model.tree().nodes_at(t);
    out.alpha_q.resize(out.nodes.size());
    out.normalizer.resize(out.nodes.size());
    std::vector<double> mean_terms;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        const int id = out.nodes[i];
        std::vector<double> weighted(ref.size(), 0.0);
        std::vector<double> terms;
        for (std::size_t k = 0; k < ref.size(); ++k) {
            const double cell = model.alpha(t, id, k) * ref.weight(k);
            const double mv = m(t, id, k);
            if (mv < 0.0)
                throw std::domain_error("negative change-of-measure weight");
            if (std::isnan(mv)) {
                require(cell <= 0.0,
                        "weight undefined on a state with positive mass");
                continue;
            }
            weighted[k] = mv * model.alpha(t, id, k);
            terms.push_back(mv * cell);
        }
        const double z = terms.empty() ? 0.0 : pairwise_sum(terms);
        require(z > 0.0, "weights vanish on a whole scenario");
        out.normalizer[i] = z;
        for (double& w : weighted) w /= z;
        out.alpha_q[i] = std::move(weighted);
        mean_terms.push_back(model.tree().path_prob(id) * z);
    }
    out.mean = pairwise_sum(mean_terms);
    require(std::abs(out.mean - 1.0) <= tol,
            "weight process must have unit mean");
    return out;
}

std::function<double(double)> change_measure_density_1d(
    const std::function<double(double)>& m, const DensityModel& model,
    double tol) {
    require(!model.is_grid() && model.deterministic() && model.n() == 1,
            "single-name deterministic density required");
    const ParametricFamily* fam = model.family();
    double hi = 1.0;
    while (fam->tail_analytic({}, hi) > 1e-16 && hi < 1e6) hi *= 2.0;
    auto integrand = [fam, m](double u) {
        return m(u) * fam->density({&u, 1});
    };
    require(std::abs(integrand(hi)) <= 1e-12,
            "weight grows faster than the density decays");
    const double z = integrate(integrand, 0.0, hi, 16);
    require(z > 0.0, "weights vanish");
    require(std::abs(z - 1.0) <= tol, "weight must have unit mean");
    return [m, fam, z](double u) {
        return m(u) * fam->density({&u, 1}) / z;
    };
}

DensityModel apply_change_of_measure(const GMartingaleCandidate& candidate,
                                     const DensityModel& model) {
    require(model.is_grid(), "reweighted models need a grid model");
    model.ensure_validated();
    const ScenarioTree& tree = model.tree();
    const ReferenceMeasure& ref = model.reference();
    const ObservationScheme scheme = scheme_for_model(model);
    const int T = model.t_max();
    const std::size_t K = ref.size();

    const Partition part_T =
        model.partition(scheme, static_cast<double>(T));
    std::vector<RegimeSignature> sig_T(part_T.atoms.size());
    for (std::size_t b = 0; b < part_T.atoms.size(); ++b)
        sig_T[b] = atom_signature(scheme, ref, part_T.atoms[b],
                                  static_cast<double>(T), model.n(),
                                  model.marks());

    std::vector<std::vector<double>> term(tree.node_count());
    for (int leaf : tree.nodes_at(T)) {
        term[leaf].resize(K, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const double a = model.alpha(T, leaf, k);
            if (a <= 0.0) continue;
            const double mv = candidate.at(T, leaf, sig_T[part_T.atom_of[k]]);
            require(!std::isnan(mv) && mv > 0.0,
                    "weights must be positive where mass is");
            term[leaf][k] = mv * a;
        }
    }
    const ParametrizedMartingale z = parametrized_expectation(model, term);

    std::vector<std::vector<double>> mt(T + 1);
    for (int t = 0; t <= T; ++t) {
        mt[t].resize(tree.node_count(), 0.0);
        for (int id : tree.nodes_at(t)) {
            std::vector<double> terms;
            terms.reserve(K);
            for (std::size_t k = 0; k < K; ++k)
                terms.push_back(z.at(t, id, k) * ref.weight(k));
            mt[t][id] = pairwise_sum(terms);
            require(mt[t][id] > 0.0, "reweighted scenario mass vanishes");
        }
    }

    std::vector<std::pair<int, double>> edges(tree.node_count());
    edges[0] = {-1, 1.0};
    for (int id = 1; id < tree.node_count(); ++id) {
        const auto& nd = tree.node(id);
        edges[id] = {nd.parent, nd.edge_prob * mt[nd.depth][id] /
                                    mt[nd.depth - 1][nd.parent]};
    }

    std::vector<std::vector<std::vector<double>>> alpha_q(T + 1);
    for (int t = 0; t <= T; ++t) {
        alpha_q[t].assign(tree.node_count(), std::vector<double>(K, 0.0));
        for (int id : tree.nodes_at(t))
            for (std::size_t k = 0; k < K; ++k)
                alpha_q[t][id][k] = z.at(t, id, k) / mt[t][id];
    }

    return DensityModel::grid(ref, ScenarioTree::build(T, edges),
                              std::move(alpha_q), model.n(), model.ordered(),
                              model.marks());
}

InitialReport check_initial_enlargement_martingale(
    const ParametrizedEvaluator& m, const DensityModel& model,
    std::span<const double> times, double tol) {
    require(model.is_grid(), "the check needs a grid model");
    model.ensure_validated();
    const ScenarioTree& tree = model.tree();
    const std::size_t K = model.reference().size();
    const int T = model.t_max();

    InitialReport out;
    out.parametrized.criterion = "density-weighted process drifts";
    out.parametrized.tol = tol;
    out.direct.criterion = "full-information martingale drifts";
    out.direct.tol = tol;
    for (double traw : times) {
        const int t = as_int_time(traw);
        if (t >= T) continue;
        for (int node : tree.nodes_at(t)) {
            for (std::size_t k = 0; k < K; ++k) {
                double e = 0.0;
                for (int c : tree.node(node).children)
                    e += tree.node(c).edge_prob * model.alpha(t + 1, c, k) *
                         m(t + 1, c, k);
                const double now = model.alpha(t, node, k) * m(t, node, k);
                const std::string label = "k=" + std::to_string(k);
                out.parametrized.add(t, node, label, std::abs(e - now));
                const double a = model.alpha(t, node, k);
                if (a <= 0.0) {
                    ++out.direct.skipped;
                    continue;
                }
                out.direct.add(t, node, label,
                               std::abs(e / a - m(t, node, k)));
            }
        }
    }
    out.parametrized.finish();
    out.direct.finish();
    out.agree = out.parametrized.pass == out.direct.pass;
    return out;
}

}  // namespace mdef
