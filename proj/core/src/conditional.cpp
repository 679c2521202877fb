#include "mdef/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mdef {

namespace {

bool close(double a, double b) { return std::abs(a - b) <= grid_tol; }

int as_grid_time(const DensityModel& model, double s) {
    const int si = static_cast<int>(std::llround(s));
    require(std::abs(s - si) <= grid_tol && si >= 0 && si <= model.t_max(),
            "time must lie on the observation clock");
    return si;
}

// E[Y alpha_T | F_t] for the whole grid, the shared numerator of every ratio.
ParametrizedMartingale payoff_numerator(const DensityModel& model,
                                        const Payoff& payoff) {
    const ScenarioTree& tree = model.tree();
    const int T = model.t_max();
    const std::size_t K = model.reference().size();
    std::vector<std::vector<double>> terminal(tree.node_count(),
                                              std::vector<double>(K, 0.0));
    for (int leaf : tree.nodes_at(T))
        for (std::size_t k = 0; k < K; ++k)
            terminal[leaf][k] = payoff.eval_grid(leaf, k, model.reference()) *
                                model.alpha(T, leaf, k);
    return parametrized_expectation(model, terminal);
}

}  // namespace

double tail_integral(const DensityModel& model, double t,
                     std::span<const std::pair<int, double>> pins, double s,
                     int node) {
    if (!model.is_grid())
        return tail_quadrature(*model.family(), pins, t, model.reference());
    const int si = as_grid_time(model, s);
    const auto& ref = model.reference();
    const int n = model.n();
    std::vector<double> pin_of(ref.dim(),
                               std::numeric_limits<double>::quiet_NaN());
    for (auto [i, v] : pins) {
        require(i >= 0 && i < static_cast<int>(ref.dim()),
                "pin outside the coordinate range");
        pin_of[i] = v;
    }
    std::vector<double> terms;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        const auto& pt = ref.point(k);
        bool match = true;
        for (std::size_t j = 0; j < ref.dim() && match; ++j) {
            if (!std::isnan(pin_of[j]))
                match = close(pt[j], pin_of[j]);
            else if (j < static_cast<std::size_t>(n))
                match = pt[j] > t;  // free marks stay unrestricted
        }
        if (match) terms.push_back(model.alpha(si, node, k) * ref.weight(k));
    }
    return terms.empty() ? 0.0 : pairwise_sum(terms);
}

ParametrizedMartingale parametrized_expectation(
    const DensityModel& model,
    const std::vector<std::vector<double>>& terminal) {
    require(model.is_grid(), "tabulated martingales live on grid models");
    const ScenarioTree& tree = model.tree();
    const int T = model.t_max();
    const std::size_t K = model.reference().size();
    require(terminal.size() == static_cast<std::size_t>(tree.node_count()),
            "terminal data must be indexed by node id");
    for (int leaf : tree.nodes_at(T))
        require(terminal[leaf].size() == K,
                "terminal data must cover the grid");
    ParametrizedMartingale pm;
    pm.value.assign(T + 1, std::vector<std::vector<double>>(
                               tree.node_count(), std::vector<double>(K, 0.0)));
    for (int leaf : tree.nodes_at(T)) pm.value[T][leaf] = terminal[leaf];
    for (int t = T - 1; t >= 0; --t) {
        for (int id : tree.nodes_at(t)) {
            for (std::size_t k = 0; k < K; ++k) {
                double s = 0.0;
                for (int c : tree.node(id).children)
                    s += tree.node(c).edge_prob * pm.value[t + 1][c][k];
                pm.value[t][id][k] = s;
            }
        }
    }
    return pm;
}

FullInfoTable condexp_full_info(const DensityModel& model,
                                const Payoff& payoff) {
    require(model.is_grid(), "full-information table needs a grid model");
    model.ensure_validated();
    const ScenarioTree& tree = model.tree();
    const int T = model.t_max();
    const std::size_t K = model.reference().size();
    FullInfoTable ft;
    ft.numerator = payoff_numerator(model, payoff);
    ft.value.assign(T + 1,
                    std::vector<std::vector<double>>(
                        tree.node_count(), std::vector<double>(K, 0.0)));
    for (int t = 0; t <= T; ++t) {
        for (int id : tree.nodes_at(t)) {
            for (std::size_t k = 0; k < K; ++k) {
                const double a = model.alpha(t, id, k);
                if (a > 0.0) {
                    ft.value[t][id][k] = ft.numerator.at(t, id, k) / a;
                } else {
                    // the pair (scenario, outcome) is unreachable
                    if (ft.numerator.at(t, id, k) != 0.0 ||
                        tree.path_prob(id) > 0.0)
                        ++ft.undefined_states;
                }
            }
        }
    }
    return ft;
}

HSnapshot condexp_H(const DensityModel& model, const Payoff& payoff, int t) {
    require(t >= 0 && t <= model.t_max(), "time outside the grid");
    const FullInfoTable ft = condexp_full_info(model, payoff);
    HSnapshot hs;
    hs.t = t;
    hs.value = ft.value[t];
    hs.undefined_states = ft.undefined_states;
    return hs;
}

CondexpTable condexp_G(const DensityModel& model,
                       const ObservationScheme& scheme, const Payoff& payoff,
                       int t, CondexpMethod method) {
    require(model.is_grid(), "partition route needs a grid model");
    require(t >= 0 && t <= model.t_max(), "time outside the grid");
    model.ensure_validated();
    const auto& ref = model.reference();

    CondexpTable out;
    out.t = t;
    out.method = method;
    out.partition = model.partition(scheme, static_cast<double>(t));
    out.nodes = model.tree().nodes_at(t);
    const std::size_t A = out.partition.atoms.size();
    out.value.assign(out.nodes.size(), std::vector<double>(A, 0.0));
    out.undefined.assign(out.nodes.size(), std::vector<char>(A, 0));

    if (method == CondexpMethod::direct) {
        const ParametrizedMartingale num = payoff_numerator(model, payoff);
        for (std::size_t i = 0; i < out.nodes.size(); ++i) {
            const int id = out.nodes[i];
            for (std::size_t a = 0; a < A; ++a) {
                std::vector<double> top, bot;
                for (std::size_t k : out.partition.atoms[a]) {
                    top.push_back(num.at(t, id, k) * ref.weight(k));
                    bot.push_back(model.alpha(t, id, k) * ref.weight(k));
                }
                const double den = pairwise_sum(bot);
                if (den > 0.0) {
                    out.value[i][a] = pairwise_sum(top) / den;
                } else {
                    out.undefined[i][a] = 1;
                }
            }
        }
        return out;
    }

    // bayes: average the full-information values under the reweighted law
    const FullInfoTable ft = condexp_full_info(model, payoff);
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        const int id = out.nodes[i];
        for (std::size_t a = 0; a < A; ++a) {
            AtomLaw law = atom_law(model, t, id, out.partition.atoms[a]);
            if (law.mass_zero) {
                out.undefined[i][a] = 1;
                continue;
            }
            std::vector<double> terms;
            terms.reserve(out.partition.atoms[a].size());
            for (std::size_t j = 0; j < out.partition.atoms[a].size(); ++j) {
                const std::size_t k = out.partition.atoms[a][j];
                terms.push_back(ft.value[t][id][k] * law.weights[j]);
            }
            out.value[i][a] = pairwise_sum(terms);
        }
    }
    return out;
}

double condexp_G_lebesgue(const DensityModel& model, const Payoff& payoff,
                          const PredictionMeasure& pm) {
    require(!model.is_grid(), "closed forms are for parametric models");
    require(!pm.on_grid, "prediction measure must be in closed form");
    model.ensure_validated();
    const ParametricFamily& fam = *model.family();
    const double S = payoff.threshold();
    // match the analytic numerators below, not the quadrature normalizer
    const double Z = fam.tail_analytic(pm.pins, pm.cut);
    require(Z > 0.0, "observed regime has zero mass");
    std::vector<char> pinned(model.n(), 0);
    for (auto [j, v] : pm.pins) pinned[j] = 1;

    auto pinned_value = [&](int j) {
        for (auto [i, v] : pm.pins)
            if (i == j) return v;
        throw std::logic_error("pin lookup");
    };
    auto survival_one = [&](int j) {
        if (pinned[j]) return pinned_value(j) > S ? 1.0 : 0.0;
        return fam.tail_coordinate(pm.pins, pm.cut, j, S) / Z;
    };

    switch (payoff.kind()) {
        case PayoffKind::constant:
            return payoff.value();
        case PayoffKind::survival:
            return survival_one(payoff.coord());
        case PayoffKind::default_by:
            return 1.0 - survival_one(payoff.coord());
        case PayoffKind::all_survive: {
            for (auto [j, v] : pm.pins)
                if (v <= S) return 0.0;
            return fam.tail_analytic(pm.pins, std::max(S, pm.cut)) / Z;
        }
        case PayoffKind::count_defaults: {
            double c = 0.0;
            for (int j = 0; j < model.n(); ++j) c += 1.0 - survival_one(j);
            return c;
        }
        default:
            throw std::invalid_argument(
                "closed forms cover threshold and constant payoffs");
    }
}

namespace {

struct RegimeKey {
    unsigned code;
    std::vector<double> pins;
    std::vector<int> pin_coords;

    bool operator<(const RegimeKey& o) const {
        if (code != o.code) return code < o.code;
        return pins < o.pins;
    }
};

std::vector<RegimeValue> regime_table(const DensityModel& model,
                                      const Payoff& payoff, int t,
                                      bool ordered) {
    require(model.is_grid(), "regime tables need a grid model");
    require(model.ordered() == ordered && !model.marks(),
            ordered ? "ordered flow" : "coordinatewise flow");
    if (!ordered)
        require(model.n() <= 16, "subset regimes limited to 16 names");
    model.ensure_validated();
    const auto& ref = model.reference();
    const int n = model.n();
    const auto nodes = model.tree().nodes_at(t);
    const ParametrizedMartingale num = payoff_numerator(model, payoff);

    std::map<RegimeKey, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        const auto& pt = ref.point(k);
        RegimeKey key;
        key.code = 0;
        if (ordered) {
            int c = 0;
            while (c < n && pt[c] <= t + grid_tol) ++c;
            key.code = static_cast<unsigned>(c);
            for (int j = 0; j < c; ++j) {
                key.pins.push_back(pt[j]);
                key.pin_coords.push_back(j);
            }
        } else {
            for (int j = 0; j < n; ++j) {
                if (pt[j] <= t + grid_tol) {
                    key.code |= 1u << j;
                    key.pins.push_back(pt[j]);
                    key.pin_coords.push_back(j);
                }
            }
        }
        groups[key].push_back(k);
    }

    std::vector<RegimeValue> out;
    for (const auto& [key, members] : groups) {
        RegimeValue rv;
        rv.code = key.code;
        rv.pins = key.pins;
        if (ordered) {
            rv.regime = "count=" + std::to_string(key.code) + ";pins=";
        } else {
            rv.regime = "set={";
            for (std::size_t i = 0; i < key.pin_coords.size(); ++i)
                rv.regime +=
                    (i ? "," : "") + std::to_string(key.pin_coords[i] + 1);
            rv.regime += "};pins=";
        }
        for (std::size_t i = 0; i < key.pins.size(); ++i)
            rv.regime += (i ? "," : "") + format_double(key.pins[i]);
        std::vector<std::pair<int, double>> pins;
        for (std::size_t i = 0; i < key.pins.size(); ++i)
            pins.emplace_back(key.pin_coords[i], key.pins[i]);
        rv.value.resize(nodes.size());
        rv.undefined.assign(nodes.size(), 0);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double den = tail_integral(model, static_cast<double>(t),
                                             pins, t, nodes[i]);
            std::vector<double> top;
            top.reserve(members.size());
            for (std::size_t k : members)
                top.push_back(num.at(t, nodes[i], k) * ref.weight(k));
            if (den > 0.0)
                rv.value[i] = pairwise_sum(top) / den;
            else
                rv.undefined[i] = 1;
        }
        out.push_back(std::move(rv));
    }
    return out;
}

}  // namespace

std::vector<RegimeValue> condexp_G_ordered(const DensityModel& model,
                                           const Payoff& payoff, int t) {
    return regime_table(model, payoff, t, true);
}

double condexp_G_ordered(const DensityModel& model, const Payoff& payoff,
                         double t, std::span<const double> realized) {
    return condexp_G_lebesgue(model, payoff,
                              predict_ordered(model, t, realized));
}

std::vector<RegimeValue> condexp_G_nonordered(const DensityModel& model,
                                              const Payoff& payoff, int t) {
    return regime_table(model, payoff, t, false);
}

double condexp_G_nonordered(const DensityModel& model, const Payoff& payoff,
                            double t, std::span<const double> realized) {
    return condexp_G_lebesgue(model, payoff,
                              predict_nonordered(model, t, realized));
}

AtomLaw atom_law(const DensityModel& model, int t, int node,
                 std::span<const std::size_t> atom) {
    require(model.is_grid(), "tabulated law needs a grid model");
    const auto& ref = model.reference();
    AtomLaw law;
    law.weights.resize(atom.size());
    for (std::size_t j = 0; j < atom.size(); ++j)
        law.weights[j] = model.alpha(t, node, atom[j]) * ref.weight(atom[j]);
    const double z = pairwise_sum(law.weights);
    if (z <= 0.0) {
        law.mass_zero = true;
        std::fill(law.weights.begin(), law.weights.end(), 0.0);
        return law;
    }
    for (double& w : law.weights) w /= z;
    return law;
}

ConditionalLawG conditional_law_G(const DensityModel& model,
                                  const ObservationScheme& scheme, int t) {
    require(model.is_grid(), "tabulated law needs a grid model");
    model.ensure_validated();
    ConditionalLawG out;
    out.t = t;
    out.partition = model.partition(scheme, static_cast<double>(t));
    out.nodes = model.tree().nodes_at(t);
    const std::size_t A = out.partition.atoms.size();
    const std::size_t K = model.reference().size();
    out.weights.assign(out.nodes.size(),
                       std::vector<std::vector<double>>(
                           A, std::vector<double>(K, 0.0)));
    out.mass_zero.assign(out.nodes.size(), std::vector<char>(A, 0));
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        for (std::size_t a = 0; a < A; ++a) {
            AtomLaw law =
                atom_law(model, t, out.nodes[i], out.partition.atoms[a]);
            if (law.mass_zero) {
                out.mass_zero[i][a] = 1;
                continue;
            }
            for (std::size_t j = 0; j < out.partition.atoms[a].size(); ++j)
                out.weights[i][a][out.partition.atoms[a][j]] = law.weights[j];
        }
    }
    return out;
}

std::function<double(std::span<const double>)> symmetrize_density(
    std::function<double(std::span<const double>)> f, int n) {
    require(n >= 1 && n <= 8, "factorial sum limited to 8 coordinates");
    return [f = std::move(f), n](std::span<const double> u) -> double {
        require(static_cast<int>(u.size()) == n, "dimension mismatch");
        for (int j = 1; j < n; ++j)
            if (u[j] < u[j - 1]) return 0.0;  // chamber indicator
        // sum over index permutations so ties count with full multiplicity
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> arg(n);
        double s = 0.0;
        do {
            for (int j = 0; j < n; ++j) arg[j] = u[idx[j]];
            s += f(arg);
        } while (std::next_permutation(idx.begin(), idx.end()));
        return s;
    };
}

}  // namespace mdef
