#pragma once

#include <string>
#include <vector>

#include "graphopt/metric_graph.hpp"

namespace graphopt {

/// Labeled tree skeleton without lengths: k pinned Dirichlet vertices,
/// Kirchhoff internals of degree >= 3, at most one Neumann leaf.
struct Topology {
    enum class Role { Dirichlet, Kirchhoff, NeumannLeaf };
    struct TVertex {
        Role role;
        int pin = -1;  // valid iff role == Dirichlet
    };

    int k = 0;
    std::vector<TVertex> vertices;
    std::vector<std::pair<int, int>> edges;  // vertex indices
    std::string canonical;

    int edge_count() const { return static_cast<int>(edges.size()); }
    bool has_neumann_leaf() const;
    int degree(int v) const;
};

/// AHU canonical form over all rootings, role+pin tags folded into labels.
/// Equal codes iff isomorphic under pin-fixing isomorphism.
std::string canonical_code(const Topology& t);

/// Same, but with pin labels erased; identifies unlabeled tree shapes.
std::string unlabeled_code(const Topology& t);

/// All admissible tree topologies for k pins: |V| <= 2k, Kirchhoff degree
/// >= 3, at most one Neumann leaf, deduplicated, canonical-code ascending.
std::vector<Topology> enumerate_topologies(int k);

/// Realize a topology with the given per-edge lengths (topology edge order).
MetricGraph to_metric_graph(const Topology& t, const std::vector<double>& lengths);

/// Recover a topology view of a validated tree graph (used after edge
/// contraction in the optimizer). Free degree->=2 vertices become Kirchhoff,
/// free leaves Neumann.
Topology topology_of(const MetricGraph& g);

}  // namespace graphopt
