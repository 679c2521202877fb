#include "mdef/oracle.hpp"

#include <cmath>

namespace mdef {

namespace {

void finish_masses(const JointMeasure& jm, AtomTable& table) {
    for (auto& atom : table.atoms) {
        std::vector<double> m;
        m.reserve(atom.members.size());
        for (const auto& mem : atom.members)
            m.push_back(jm.mass[mem.node_pos][mem.k]);
        atom.mass = m.empty() ? 0.0 : pairwise_sum(m);
    }
}

}  // namespace

AtomTable atoms_trivial(const JointMeasure& jm) {
    AtomTable table;
    SupportAtom atom;
    atom.id = "all";
    for (std::size_t i = 0; i < jm.nodes.size(); ++i)
        for (std::size_t k = 0; k < jm.mass[i].size(); ++k)
            atom.members.push_back({i, k});
    table.atoms.push_back(std::move(atom));
    finish_masses(jm, table);
    return table;
}

AtomTable atoms_F(const JointMeasure& jm, const DensityModel& model, int t) {
    const ScenarioTree& tree = model.tree();
    AtomTable table;
    for (int id : tree.nodes_at(t)) {
        SupportAtom atom;
        atom.id = "F:node=" + std::to_string(id);
        for (std::size_t i = 0; i < jm.nodes.size(); ++i) {
            if (tree.ancestor_at(jm.nodes[i], t) != id) continue;
            for (std::size_t k = 0; k < jm.mass[i].size(); ++k)
                atom.members.push_back({i, k});
        }
        table.atoms.push_back(std::move(atom));
    }
    finish_masses(jm, table);
    return table;
}

AtomTable atoms_G(const JointMeasure& jm, const DensityModel& model,
                  const ObservationScheme& scheme, int t) {
    const ScenarioTree& tree = model.tree();
    const Partition part = model.partition(scheme, static_cast<double>(t));
    AtomTable table;
    for (int id : tree.nodes_at(t)) {
        for (std::size_t a = 0; a < part.atoms.size(); ++a) {
            SupportAtom atom;
            atom.id = "G:node=" + std::to_string(id) + ";" + part.labels[a];
            for (std::size_t i = 0; i < jm.nodes.size(); ++i) {
                if (tree.ancestor_at(jm.nodes[i], t) != id) continue;
                for (std::size_t k : part.atoms[a])
                    atom.members.push_back({i, k});
            }
            table.atoms.push_back(std::move(atom));
        }
    }
    finish_masses(jm, table);
    return table;
}

AtomTable atoms_H(const JointMeasure& jm, const DensityModel& model, int t) {
    const ScenarioTree& tree = model.tree();
    const std::size_t K = model.reference().size();
    AtomTable table;
    for (int id : tree.nodes_at(t)) {
        for (std::size_t k = 0; k < K; ++k) {
            SupportAtom atom;
            atom.id =
                "H:node=" + std::to_string(id) + ";k=" + std::to_string(k);
            for (std::size_t i = 0; i < jm.nodes.size(); ++i)
                if (tree.ancestor_at(jm.nodes[i], t) == id)
                    atom.members.push_back({i, k});
            table.atoms.push_back(std::move(atom));
        }
    }
    finish_masses(jm, table);
    return table;
}

std::vector<BruteValue> brute_force_condexp(
    const JointMeasure& jm, const AtomTable& atoms,
    const std::vector<std::vector<double>>& values) {
    require(values.size() == jm.mass.size(), "values must cover the support");
    std::size_t cells = 0;
    for (std::size_t i = 0; i < jm.mass.size(); ++i) {
        require(values[i].size() == jm.mass[i].size(),
                "values must cover the support");
        cells += jm.mass[i].size();
    }

    // partition check: every cell exactly once
    std::vector<std::vector<char>> seen(jm.mass.size());
    for (std::size_t i = 0; i < jm.mass.size(); ++i)
        seen[i].assign(jm.mass[i].size(), 0);
    std::size_t covered = 0;
    std::vector<double> masses;
    for (const auto& atom : atoms.atoms) {
        masses.push_back(atom.mass);
        for (const auto& mem : atom.members) {
            require(mem.node_pos < seen.size() &&
                        mem.k < seen[mem.node_pos].size(),
                    "atom member outside the support");
            require(!seen[mem.node_pos][mem.k], "atoms overlap");
            seen[mem.node_pos][mem.k] = 1;
            ++covered;
        }
    }
    require(covered == cells, "atoms must cover the support");
    require(std::abs(pairwise_sum(masses) - 1.0) <= 1e-9,
            "atom masses must sum to one");

    std::vector<BruteValue> out;
    out.reserve(atoms.atoms.size());
    for (const auto& atom : atoms.atoms) {
        BruteValue bv;
        if (atom.mass <= 0.0) {
            bv.mass_zero = true;
        } else {
            std::vector<double> top;
            top.reserve(atom.members.size());
            for (const auto& mem : atom.members)
                top.push_back(jm.mass[mem.node_pos][mem.k] *
                              values[mem.node_pos][mem.k]);
            bv.value = pairwise_sum(top) / atom.mass;
        }
        out.push_back(bv);
    }
    return out;
}

std::vector<std::vector<double>> payoff_values(const JointMeasure& jm,
                                               const DensityModel& model,
                                               const Payoff& payoff) {
    std::vector<std::vector<double>> values(jm.nodes.size());
    for (std::size_t i = 0; i < jm.nodes.size(); ++i) {
        values[i].resize(jm.mass[i].size());
        for (std::size_t k = 0; k < jm.mass[i].size(); ++k)
            values[i][k] =
                payoff.eval_grid(jm.nodes[i], k, model.reference());
    }
    return values;
}

CondexpTable oracle_condexp_G(const DensityModel& model,
                              const ObservationScheme& scheme,
                              const Payoff& payoff, int t) {
    const JointMeasure jm = build_joint_measure(model, model.t_max());

    CondexpTable out;
    out.t = t;
    out.method = CondexpMethod::direct;
    out.partition = model.partition(scheme, static_cast<double>(t));
    out.nodes = model.tree().nodes_at(t);
    const std::size_t A = out.partition.atoms.size();
    out.value.assign(out.nodes.size(), std::vector<double>(A, 0.0));
    out.undefined.assign(out.nodes.size(), std::vector<char>(A, 0));

    const AtomTable atoms = atoms_G(jm, model, scheme, t);
    const auto brute = brute_force_condexp(jm, atoms,
                                           payoff_values(jm, model, payoff));
    require(brute.size() == out.nodes.size() * A, "atom layout mismatch");
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        for (std::size_t a = 0; a < A; ++a) {
            const BruteValue& bv = brute[i * A + a];
            if (bv.mass_zero)
                out.undefined[i][a] = 1;
            else
                out.value[i][a] = bv.value;
        }
    }
    return out;
}

std::vector<SystemSample> sample_system(const DensityModel& model,
                                        const ObservationScheme& scheme,
                                        std::uint64_t seed, long long count) {
    require(count >= 1, "need at least one draw");
    check_scheme_compatible(scheme, model.n(), model.ordered(), model.marks());
    model.ensure_validated();
    SplitMix64 rng(seed);
    std::vector<SystemSample> out;
    out.reserve(static_cast<std::size_t>(count));

    if (!model.is_grid()) {
        for (long long i = 0; i < count; ++i) {
            SystemSample s;
            s.x = model.family()->sample(rng);
            // record what the observer saw while the draw unfolded
            double horizon = 0.0;
            for (int j = 0; j < model.n(); ++j)
                horizon = std::max(horizon, s.x[j]);
            const int H = static_cast<int>(std::ceil(horizon));
            for (int t = 0; t <= H; ++t)
                s.observations.push_back(regime_label(
                    scheme, s.x, static_cast<double>(t), model.n(), false));
            out.push_back(std::move(s));
        }
        return out;
    }

    const ScenarioTree& tree = model.tree();
    const int T = model.t_max();
    const std::size_t K = model.reference().size();
    for (long long i = 0; i < count; ++i) {
        SystemSample s;
        int id = tree.nodes_at(0)[0];
        for (int t = 0; t < T; ++t) {
            const double u = rng.uniform01();
            double acc = 0.0;
            int next = tree.node(id).children.back();
            for (int c : tree.node(id).children) {
                acc += tree.node(c).edge_prob;
                if (u < acc) {
                    next = c;
                    break;
                }
            }
            id = next;
        }
        // outcome given the full path, by inverse transform over the grid
        const double u = rng.uniform01();
        double acc = 0.0;
        std::size_t pick = K - 1;
        for (std::size_t k = 0; k < K; ++k) {
            acc += model.alpha(T, id, k) * model.reference().weight(k);
            if (u < acc) {
                pick = k;
                break;
            }
        }
        s.leaf = id;
        s.k = pick;
        s.x = model.reference().point(pick);
        for (int t = 0; t <= T; ++t)
            s.observations.push_back(regime_label(
                scheme, s.x, static_cast<double>(t), model.n(), model.marks()));
        out.push_back(std::move(s));
    }
    return out;
}

McEstimate mc_conditional(
    const std::vector<SystemSample>& samples,
    const std::function<double(const SystemSample&)>& value,
    const std::function<bool(const SystemSample&)>& in_atom, double z) {
    double s = 0.0, s2 = 0.0;
    long long m = 0;
    for (const auto& sample : samples) {
        if (!in_atom(sample)) continue;
        const double v = value(sample);
        s += v;
        s2 += v * v;
        ++m;
    }
    McEstimate e;
    e.count = m;
    if (m == 0) return e;
    e.mean = s / static_cast<double>(m);
    if (m > 1) {
        const double var =
            std::max(0.0, (s2 - s * s / static_cast<double>(m)) /
                              static_cast<double>(m - 1));
        e.half_width = z * std::sqrt(var / static_cast<double>(m));
    }
    return e;
}

}  // namespace mdef
