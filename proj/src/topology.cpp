#include "graphopt/topology.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace graphopt {

bool Topology::has_neumann_leaf() const {
    for (const auto& v : vertices)
        if (v.role == Role::NeumannLeaf) return true;
    return false;
}

int Topology::degree(int v) const {
    int d = 0;
    for (const auto& [a, b] : edges) d += (a == v) + (b == v);
    return d;
}

namespace {

std::string vertex_tag(const Topology::TVertex& v, bool with_pin) {
    switch (v.role) {
        case Topology::Role::Dirichlet:
            return with_pin ? "D" + std::to_string(v.pin) : "D";
        case Topology::Role::Kirchhoff:
            return "K";
        case Topology::Role::NeumannLeaf:
            return "N";
    }
    return "?";
}

std::string ahu(const Topology& t, int node, int parent, bool with_pin) {
    std::vector<std::string> child_codes;
    for (const auto& [a, b] : t.edges) {
        int other = -1;
        if (a == node) other = b;
        else if (b == node) other = a;
        if (other >= 0 && other != parent) child_codes.push_back(ahu(t, other, node, with_pin));
    }
    std::sort(child_codes.begin(), child_codes.end());
    std::string code = "(" + vertex_tag(t.vertices[node], with_pin);
    for (const auto& c : child_codes) code += c;
    code += ")";
    return code;
}

std::string code_impl(const Topology& t, bool with_pin) {
    std::string best;
    for (int r = 0; r < static_cast<int>(t.vertices.size()); ++r) {
        std::string c = ahu(t, r, -1, with_pin);
        if (best.empty() || c < best) best = c;
    }
    return best;
}

// Pruefer decode: all labeled trees on m vertices correspond to sequences
// in {0..m-1}^(m-2).
std::vector<std::pair<int, int>> pruefer_decode(const std::vector<int>& seq, int m) {
    std::vector<int> degree(m, 1);
    for (int s : seq) degree[s]++;
    std::vector<std::pair<int, int>> edges;
    std::set<int> leaves;
    for (int i = 0; i < m; ++i)
        if (degree[i] == 1) leaves.insert(i);
    std::vector<int> deg = degree;
    for (int s : seq) {
        int leaf = *leaves.begin();
        leaves.erase(leaves.begin());
        edges.emplace_back(leaf, s);
        if (--deg[s] == 1) leaves.insert(s);
    }
    int a = *leaves.begin();
    int b = *std::next(leaves.begin());
    edges.emplace_back(a, b);
    return edges;
}

bool admissible(const Topology& t) {
    for (int v = 0; v < static_cast<int>(t.vertices.size()); ++v) {
        int d = t.degree(v);
        switch (t.vertices[v].role) {
            case Topology::Role::Dirichlet:
                if (d < 1) return false;
                break;
            case Topology::Role::Kirchhoff:
                if (d < 3) return false;
                break;
            case Topology::Role::NeumannLeaf:
                if (d != 1) return false;
                break;
        }
    }
    return true;
}

}  // namespace

std::string canonical_code(const Topology& t) { return code_impl(t, true); }
std::string unlabeled_code(const Topology& t) { return code_impl(t, false); }

std::vector<Topology> enumerate_topologies(int k) {
    if (k < 1) throw GraphError("enumerate_topologies: k must be >= 1");

    std::map<std::string, Topology> unique;
    for (int m = 2; m <= 2 * k; ++m) {
        for (int neumann = 0; neumann <= 1; ++neumann) {
            int kirchhoff = m - k - neumann;
            if (kirchhoff < 0) continue;

            Topology proto;
            proto.k = k;
            for (int i = 0; i < k; ++i) proto.vertices.push_back({Topology::Role::Dirichlet, i});
            for (int i = 0; i < kirchhoff; ++i) proto.vertices.push_back({Topology::Role::Kirchhoff, -1});
            if (neumann) proto.vertices.push_back({Topology::Role::NeumannLeaf, -1});

            // All labeled trees on m vertices.
            std::vector<int> seq(std::max(0, m - 2), 0);
            bool done = false;
            while (!done) {
                Topology t = proto;
                t.edges = m == 2 ? std::vector<std::pair<int, int>>{{0, 1}} : pruefer_decode(seq, m);
                if (admissible(t)) {
                    t.canonical = canonical_code(t);
                    unique.emplace(t.canonical, std::move(t));
                }
                if (m == 2) break;
                // next sequence
                int pos = 0;
                while (pos < m - 2 && ++seq[pos] == m) seq[pos++] = 0;
                done = pos == m - 2;
            }
        }
    }

    std::vector<Topology> out;
    for (auto& [code, t] : unique) out.push_back(std::move(t));
    return out;  // map iteration is canonical-code ascending
}

MetricGraph to_metric_graph(const Topology& t, const std::vector<double>& lengths) {
    if (lengths.size() != t.edges.size())
        throw GraphError("to_metric_graph: length count mismatch");
    std::vector<Vertex> verts;
    for (int i = 0; i < static_cast<int>(t.vertices.size()); ++i) {
        VertexRole role = t.vertices[i].role == Topology::Role::Dirichlet
                              ? VertexRole::dirichlet(t.vertices[i].pin)
                              : VertexRole::free_vertex();
        verts.push_back({i, role});
    }
    std::vector<Edge> edges;
    for (size_t i = 0; i < t.edges.size(); ++i)
        edges.push_back({static_cast<EdgeId>(i), t.edges[i].first, t.edges[i].second, lengths[i]});
    return MetricGraph(std::move(verts), std::move(edges));
}

Topology topology_of(const MetricGraph& g) {
    Topology t;
    t.k = g.dirichlet_count();
    std::map<VertexId, int> index;
    for (const auto& v : g.vertices()) {
        index[v.id] = static_cast<int>(t.vertices.size());
        if (v.role.is_dirichlet())
            t.vertices.push_back({Topology::Role::Dirichlet, v.role.pin});
        else if (g.degree(v.id) == 1)
            t.vertices.push_back({Topology::Role::NeumannLeaf, -1});
        else
            t.vertices.push_back({Topology::Role::Kirchhoff, -1});
    }
    for (const auto& e : g.edges()) t.edges.emplace_back(index[e.u], index[e.v]);
    t.canonical = canonical_code(t);
    return t;
}

}  // namespace graphopt
