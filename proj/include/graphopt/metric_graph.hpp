#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphopt {

using VertexId = int;
using EdgeId = int;

/// Role of a vertex: pinned to a Dirichlet point (function vanishes there)
/// or free (Kirchhoff condition, or Neumann if degree one).
struct VertexRole {
    enum Kind { Dirichlet, Free } kind = Free;
    int pin = -1;  // pin index, valid iff kind == Dirichlet

    static VertexRole dirichlet(int pin_index) { return {Dirichlet, pin_index}; }
    static VertexRole free_vertex() { return {Free, -1}; }

    bool is_dirichlet() const { return kind == Dirichlet; }
    friend bool operator==(const VertexRole&, const VertexRole&) = default;
};

struct Vertex {
    VertexId id = -1;
    VertexRole role;
};

struct Edge {
    EdgeId id = -1;
    VertexId u = -1;
    VertexId v = -1;
    double length = 0.0;
};

struct GraphDiagnostics {
    bool connected = true;
    std::vector<EdgeId> nonpositive_length_edges;
    std::vector<EdgeId> duplicate_edges;  // self-loops and repeated vertex pairs
    std::vector<VertexId> isolated_vertices;
    std::vector<int> duplicate_pins;

    bool ok() const {
        return connected && nonpositive_length_edges.empty() && duplicate_edges.empty() &&
               isolated_vertices.empty() && duplicate_pins.empty();
    }
    std::string describe() const;
};

// Edge lengths below this are considered degenerate; the optimizer contracts
// them before any linear solve.
inline constexpr double kMinEdgeLength = 1e-9;

/// Immutable combinatorial graph with positive edge lengths. All mutating
/// operations return a new graph value.
class MetricGraph {
  public:
    MetricGraph() = default;
    MetricGraph(std::vector<Vertex> vertices, std::vector<Edge> edges);

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }

    const Vertex& vertex(VertexId id) const;
    const Edge& edge(EdgeId id) const;
    bool has_vertex(VertexId id) const;

    int degree(VertexId id) const;
    std::vector<std::pair<EdgeId, VertexId>> neighbors(VertexId id) const;

    int dirichlet_count() const;
    std::vector<VertexId> dirichlet_vertices() const;

    bool is_tree() const;

    friend GraphDiagnostics validate(const MetricGraph& g);

  private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
};

GraphDiagnostics validate(const MetricGraph& g);

double total_length(const MetricGraph& g);

/// Shortest-path distance between two vertices, edge lengths as weights.
/// Throws if either vertex is missing or unreachable.
double graph_distance(const MetricGraph& g, VertexId u, VertexId v);

/// Merges the endpoints of every edge of length <= eps. A merged vertex is
/// Dirichlet if any constituent was; merging two distinct pins throws.
/// Parallel edges produced by the merge are split at their midpoints so the
/// result is again simple.
MetricGraph contract_short_edges(const MetricGraph& g, double eps);

/// Replaces edge e by two edges of lengths t and length-t joined at a new
/// free vertex. Throws if t is outside (0, length).
MetricGraph subdivide_edge(const MetricGraph& g, EdgeId e, double t);

/// Scales every edge length by s > 0.
MetricGraph scale_lengths(const MetricGraph& g, double s);

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace graphopt
