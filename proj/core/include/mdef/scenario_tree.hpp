#pragma once

#include <span>
#include <vector>

namespace mdef {

// Finite filtered scenario space.  The reference filtration is generated by
// the partition into subtrees: the atoms of F_t are the depth-t nodes.
// Edge probabilities out of every inner node sum to one, so conditional
// expectations are exact backward inductions.
class ScenarioTree {
  public:
    struct Node {
        int id = 0;
        int depth = 0;
        int parent = -1;
        double edge_prob = 1.0;  // transition probability from parent
        std::vector<int> children;
    };

    // single branch: one node per depth, all edges probability one
    static ScenarioTree trivial(int t_max);

    // nodes listed root first; each entry (parent, edge probability)
    static ScenarioTree build(int t_max,
                              const std::vector<std::pair<int, double>>& edges);

    int t_max() const { return t_max_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const Node& node(int id) const { return nodes_[id]; }
    const std::vector<int>& nodes_at(int depth) const { return by_depth_[depth]; }

    double path_prob(int id) const;          // product of edge probs to root
    int ancestor_at(int id, int depth) const;

    // E[. | F_to] of a functional known per node at depth `from`.
    // Vectors are indexed by node id; only depth-`from` entries are read and
    // only depth-`to` entries of the result are meaningful.
    std::vector<double> expect_back(std::span<const double> values, int from,
                                    int to) const;

    double max_edge_prob_defect() const;  // worst |sum of child probs - 1|

  private:
    ScenarioTree() = default;

    int t_max_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::vector<int>> by_depth_;
};

}  // namespace mdef
