#include "mdef/scenario_tree.hpp"

#include <cmath>

#include "mdef/common.hpp"

namespace mdef {

ScenarioTree ScenarioTree::trivial(int t_max) {
    std::vector<std::pair<int, double>> edges;
    edges.emplace_back(-1, 1.0);
    for (int d = 1; d <= t_max; ++d) edges.emplace_back(d - 1, 1.0);
    return build(t_max, edges);
}

ScenarioTree ScenarioTree::build(
    int t_max, const std::vector<std::pair<int, double>>& edges) {
    require(t_max >= 0, "horizon must be nonnegative");
    require(!edges.empty() && edges[0].first < 0,
            "first node must be the root (no parent)");
    ScenarioTree tree;
    tree.t_max_ = t_max;
    tree.by_depth_.resize(t_max + 1);
    tree.nodes_.resize(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        Node& n = tree.nodes_[i];
        n.id = static_cast<int>(i);
        n.parent = edges[i].first;
        n.edge_prob = edges[i].second;
        require(n.edge_prob >= 0.0, "edge probabilities must be nonnegative");
        if (i == 0) {
            n.depth = 0;
            n.edge_prob = 1.0;
        } else {
            require(n.parent >= 0 && n.parent < static_cast<int>(i),
                    "parents must precede children");
            n.depth = tree.nodes_[n.parent].depth + 1;
            require(n.depth <= t_max, "node deeper than the horizon");
            tree.nodes_[n.parent].children.push_back(n.id);
        }
        tree.by_depth_[n.depth].push_back(n.id);
    }
    for (int d = 0; d < t_max; ++d)
        require(!tree.by_depth_[d].empty() || tree.by_depth_[d + 1].empty(),
                "depth levels must be contiguous");
    for (const Node& n : tree.nodes_)
        require(n.depth == t_max || !n.children.empty(),
                "every inner node needs children up to the horizon");
    require(tree.max_edge_prob_defect() <= 1e-12,
            "child probabilities must sum to one at every inner node");
    return tree;
}

double ScenarioTree::path_prob(int id) const {
    double p = 1.0;
    for (int cur = id; cur >= 0; cur = nodes_[cur].parent)
        p *= nodes_[cur].edge_prob;
    return p;
}

int ScenarioTree::ancestor_at(int id, int depth) const {
    int cur = id;
    while (nodes_[cur].depth > depth) cur = nodes_[cur].parent;
    require(nodes_[cur].depth == depth, "node is shallower than target depth");
    return cur;
}

std::vector<double> ScenarioTree::expect_back(std::span<const double> values,
                                              int from, int to) const {
    require(0 <= to && to <= from && from <= t_max_, "invalid depth range");
    require(values.size() == nodes_.size(), "values must be indexed by node id");
    std::vector<double> cur(values.begin(), values.end());
    for (int d = from; d > to; --d) {
        for (int id : by_depth_[d - 1]) {
            double s = 0.0;
            for (int c : nodes_[id].children) s += nodes_[c].edge_prob * cur[c];
            cur[id] = s;
        }
    }
    return cur;
}

double ScenarioTree::max_edge_prob_defect() const {
    double worst = 0.0;
    for (const Node& n : nodes_) {
        if (n.children.empty()) continue;
        double s = 0.0;
        for (int c : n.children) s += nodes_[c].edge_prob;
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

}  // namespace mdef
