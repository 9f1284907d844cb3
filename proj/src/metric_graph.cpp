#include "graphopt/metric_graph.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace graphopt {

std::string GraphDiagnostics::describe() const {
    std::ostringstream os;
    if (ok()) {
        os << "ok";
        return os.str();
    }
    if (!connected) os << "disconnected; ";
    if (!nonpositive_length_edges.empty()) os << nonpositive_length_edges.size() << " nonpositive-length edge(s); ";
    if (!duplicate_edges.empty()) os << duplicate_edges.size() << " duplicate/self-loop edge(s); ";
    if (!isolated_vertices.empty()) os << isolated_vertices.size() << " isolated vertex(ices); ";
    if (!duplicate_pins.empty()) os << duplicate_pins.size() << " duplicate pin index(es); ";
    return os.str();
}

MetricGraph::MetricGraph(std::vector<Vertex> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {}

const Vertex& MetricGraph::vertex(VertexId id) const {
    for (const auto& v : vertices_)
        if (v.id == id) return v;
    throw GraphError("unknown vertex id " + std::to_string(id));
}

const Edge& MetricGraph::edge(EdgeId id) const {
    for (const auto& e : edges_)
        if (e.id == id) return e;
    throw GraphError("unknown edge id " + std::to_string(id));
}

bool MetricGraph::has_vertex(VertexId id) const {
    for (const auto& v : vertices_)
        if (v.id == id) return true;
    return false;
}

int MetricGraph::degree(VertexId id) const {
    int d = 0;
    for (const auto& e : edges_) d += (e.u == id) + (e.v == id);
    return d;
}

std::vector<std::pair<EdgeId, VertexId>> MetricGraph::neighbors(VertexId id) const {
    std::vector<std::pair<EdgeId, VertexId>> out;
    for (const auto& e : edges_) {
        if (e.u == id) out.emplace_back(e.id, e.v);
        else if (e.v == id) out.emplace_back(e.id, e.u);
    }
    return out;
}

int MetricGraph::dirichlet_count() const {
    int k = 0;
    for (const auto& v : vertices_) k += v.role.is_dirichlet();
    return k;
}

std::vector<VertexId> MetricGraph::dirichlet_vertices() const {
    std::vector<VertexId> out;
    for (const auto& v : vertices_)
        if (v.role.is_dirichlet()) out.push_back(v.id);
    return out;
}

namespace {

bool is_connected(const MetricGraph& g) {
    if (g.vertices().empty()) return true;
    std::set<VertexId> seen;
    std::queue<VertexId> q;
    q.push(g.vertices().front().id);
    seen.insert(g.vertices().front().id);
    while (!q.empty()) {
        VertexId cur = q.front();
        q.pop();
        for (auto [eid, nb] : g.neighbors(cur)) {
            (void)eid;
            if (seen.insert(nb).second) q.push(nb);
        }
    }
    return seen.size() == g.vertices().size();
}

}  // namespace

bool MetricGraph::is_tree() const {
    return is_connected(*this) && edges_.size() + 1 == vertices_.size();
}

GraphDiagnostics validate(const MetricGraph& g) {
    GraphDiagnostics d;
    d.connected = is_connected(g);

    std::set<std::pair<VertexId, VertexId>> pairs;
    for (const auto& e : g.edges()) {
        if (!(e.length > 0.0)) d.nonpositive_length_edges.push_back(e.id);
        auto key = std::minmax(e.u, e.v);
        if (e.u == e.v || !pairs.insert(key).second) d.duplicate_edges.push_back(e.id);
    }
    for (const auto& v : g.vertices())
        if (g.degree(v.id) == 0 && g.vertices().size() > 1) d.isolated_vertices.push_back(v.id);

    std::set<int> pins;
    for (const auto& v : g.vertices())
        if (v.role.is_dirichlet() && !pins.insert(v.role.pin).second) d.duplicate_pins.push_back(v.role.pin);
    return d;
}

double total_length(const MetricGraph& g) {
    double s = 0.0;
    for (const auto& e : g.edges()) s += e.length;
    return s;
}

double graph_distance(const MetricGraph& g, VertexId u, VertexId v) {
    g.vertex(u);
    g.vertex(v);
    if (u == v) return 0.0;
    std::map<VertexId, double> dist;
    for (const auto& w : g.vertices()) dist[w.id] = std::numeric_limits<double>::infinity();
    dist[u] = 0.0;
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, u);
    while (!pq.empty()) {
        auto [du, cur] = pq.top();
        pq.pop();
        if (du > dist[cur]) continue;
        if (cur == v) return du;
        for (auto [eid, nb] : g.neighbors(cur)) {
            double alt = du + g.edge(eid).length;
            if (alt < dist[nb]) {
                dist[nb] = alt;
                pq.emplace(alt, nb);
            }
        }
    }
    throw GraphError("vertex " + std::to_string(v) + " unreachable from " + std::to_string(u));
}

MetricGraph contract_short_edges(const MetricGraph& g, double eps) {
    // Union-find over vertex ids.
    std::map<VertexId, VertexId> parent;
    for (const auto& v : g.vertices()) parent[v.id] = v.id;
    auto find = [&](VertexId x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : g.edges())
        if (e.length <= eps) {
            VertexId a = find(e.u), b = find(e.v);
            if (a != b) parent[a] = b;
        }

    // Merged vertex role: Dirichlet wins; two distinct pins may not merge.
    std::map<VertexId, VertexRole> role;
    for (const auto& v : g.vertices()) {
        VertexId r = find(v.id);
        auto it = role.find(r);
        if (it == role.end()) {
            role[r] = v.role;
        } else if (v.role.is_dirichlet()) {
            if (it->second.is_dirichlet() && it->second.pin != v.role.pin)
                throw GraphError("contraction would merge two distinct Dirichlet vertices");
            it->second = v.role;
        }
    }

    std::vector<Vertex> verts;
    for (auto& [id, r] : role) verts.push_back({id, r});

    std::vector<Edge> edges;
    VertexId next_vertex = 0;
    for (const auto& v : g.vertices()) next_vertex = std::max(next_vertex, v.id + 1);
    EdgeId next_edge = 0;

    // Surviving edges, with multiplicity per unordered endpoint pair.
    std::map<std::pair<VertexId, VertexId>, int> multiplicity;
    std::vector<Edge> survivors;
    for (const auto& e : g.edges()) {
        if (e.length <= eps) continue;
        VertexId a = find(e.u), b = find(e.v);
        survivors.push_back({-1, a, b, e.length});
        if (a != b) multiplicity[std::minmax(a, b)]++;
    }
    for (const auto& e : survivors) {
        bool split = e.u == e.v || multiplicity[std::minmax(e.u, e.v)] > 1;
        if (!split) {
            edges.push_back({next_edge++, e.u, e.v, e.length});
            continue;
        }
        // Split at the midpoint via a fresh degree-2 free vertex. A self-loop
        // needs two insertions to become simple.
        if (e.u == e.v) {
            VertexId m1 = next_vertex++, m2 = next_vertex++;
            verts.push_back({m1, VertexRole::free_vertex()});
            verts.push_back({m2, VertexRole::free_vertex()});
            edges.push_back({next_edge++, e.u, m1, e.length / 3.0});
            edges.push_back({next_edge++, m1, m2, e.length / 3.0});
            edges.push_back({next_edge++, m2, e.u, e.length / 3.0});
        } else {
            VertexId m = next_vertex++;
            verts.push_back({m, VertexRole::free_vertex()});
            edges.push_back({next_edge++, e.u, m, e.length / 2.0});
            edges.push_back({next_edge++, m, e.v, e.length / 2.0});
        }
    }
    return MetricGraph(std::move(verts), std::move(edges));
}

MetricGraph subdivide_edge(const MetricGraph& g, EdgeId eid, double t) {
    const Edge& e = g.edge(eid);
    if (!(t > 0.0 && t < e.length))
        throw GraphError("subdivision point outside (0, length)");
    std::vector<Vertex> verts = g.vertices();
    VertexId next_vertex = 0;
    for (const auto& v : verts) next_vertex = std::max(next_vertex, v.id + 1);
    EdgeId next_edge = 0;
    for (const auto& ed : g.edges()) next_edge = std::max(next_edge, ed.id + 1);

    VertexId m = next_vertex;
    verts.push_back({m, VertexRole::free_vertex()});
    std::vector<Edge> edges;
    for (const auto& ed : g.edges())
        if (ed.id != eid) edges.push_back(ed);
    edges.push_back({next_edge, e.u, m, t});
    edges.push_back({next_edge + 1, m, e.v, e.length - t});
    return MetricGraph(std::move(verts), std::move(edges));
}

MetricGraph scale_lengths(const MetricGraph& g, double s) {
    if (!(s > 0.0)) throw GraphError("scale factor must be positive");
    std::vector<Edge> edges = g.edges();
    for (auto& e : edges) e.length *= s;
    return MetricGraph(g.vertices(), std::move(edges));
}

}  // namespace graphopt
