#include "graphopt/dirichlet_energy.hpp"

#include <algorithm>
#include <cmath>

namespace graphopt {

LinearSystem assemble_kirchhoff_system(const MetricGraph& g) {
    if (g.dirichlet_count() == 0)
        throw GraphError("no Dirichlet vertex: energy is unbounded below");

    LinearSystem sys;
    std::map<VertexId, int> index;
    for (const auto& v : g.vertices())
        if (!v.role.is_dirichlet()) {
            index[v.id] = static_cast<int>(sys.free_vertices.size());
            sys.free_vertices.push_back(v.id);
        }
    int n = static_cast<int>(sys.free_vertices.size());
    sys.matrix = Eigen::MatrixXd::Zero(n, n);
    sys.rhs = Eigen::VectorXd::Zero(n);

    for (const auto& e : g.edges()) {
        double w = 1.0 / e.length;
        auto iu = index.find(e.u);
        auto iv = index.find(e.v);
        if (iu != index.end()) {
            sys.matrix(iu->second, iu->second) += w;
            sys.rhs(iu->second) += 0.5 * e.length;
        }
        if (iv != index.end()) {
            sys.matrix(iv->second, iv->second) += w;
            sys.rhs(iv->second) += 0.5 * e.length;
        }
        if (iu != index.end() && iv != index.end()) {
            sys.matrix(iu->second, iv->second) -= w;
            sys.matrix(iv->second, iu->second) -= w;
        }
    }
    return sys;
}

EnergySolution solve_energy(const MetricGraph& g) {
    LinearSystem sys = assemble_kirchhoff_system(g);

    EnergySolution sol;
    sol.graph = g;
    for (const auto& v : g.vertices()) sol.vertex_values[v.id] = 0.0;
    if (!sys.free_vertices.empty()) {
        Eigen::VectorXd u = sys.matrix.ldlt().solve(sys.rhs);
        if (!u.allFinite()) throw GraphError("singular Kirchhoff system");
        for (size_t i = 0; i < sys.free_vertices.size(); ++i)
            sol.vertex_values[sys.free_vertices[i]] = u(static_cast<Eigen::Index>(i));
    }

    sol.min_value = 0.0;
    sol.max_value = 0.0;
    double sum_w = 0.0, sum_wp2 = 0.0;
    for (const auto& e : g.edges()) {
        EnergySolution::EdgeData d;
        d.id = e.id;
        d.u = e.u;
        d.v = e.v;
        d.length = e.length;
        double ui = sol.vertex_values[e.u];
        double uj = sol.vertex_values[e.v];
        double L = e.length;
        double a = (uj - ui) / L + L / 2.0;
        d.slope_from_u = a;
        d.integral_w = ui * L + a * L * L / 2.0 - L * L * L / 6.0;
        d.integral_wprime_sq = a * a * L - a * L * L + L * L * L / 3.0;
        // w = c0 + c1 x + c2 x^2 with c2 = -1/2
        double c0 = ui, c1 = a, c2 = -0.5;
        d.integral_w_sq = c0 * c0 * L + c0 * c1 * L * L +
                          (c1 * c1 + 2.0 * c0 * c2) * L * L * L / 3.0 +
                          c1 * c2 * L * L * L * L / 2.0 + c2 * c2 * std::pow(L, 5) / 5.0;
        double xmax = std::clamp(a, 0.0, L);
        d.max_value = c0 + c1 * xmax + c2 * xmax * xmax;
        d.min_value = std::min(ui, uj);
        sol.edge_data.push_back(d);
        sum_w += d.integral_w;
        sum_wp2 += d.integral_wprime_sq;
        sol.min_value = std::min(sol.min_value, d.min_value);
        sol.max_value = std::max(sol.max_value, d.max_value);
    }
    sol.energy = 0.5 * sum_wp2 - sum_w;

    // Integration by parts forces J = -1/2 int w; anything larger than
    // roundoff means the solve went wrong.
    if (std::abs(sol.energy - (-0.5 * sum_w)) > 1e-12 * (1.0 + std::abs(sol.energy)))
        throw GraphError("integration-by-parts identity violated");

    for (VertexId fv : sys.free_vertices) {
        double r = 0.0;
        for (auto [eid, nb] : g.neighbors(fv)) {
            (void)nb;
            r += sol.slope(eid, fv);
        }
        sol.kirchhoff_residuals[fv] = r;
    }
    return sol;
}

const EnergySolution::EdgeData& EnergySolution::edge(EdgeId id) const {
    for (const auto& d : edge_data)
        if (d.id == id) return d;
    throw GraphError("unknown edge id in solution");
}

double EnergySolution::slope(EdgeId id, VertexId from) const {
    const EdgeData& d = edge(id);
    if (from == d.u) return d.slope_from_u;
    if (from == d.v) return -d.slope_from_u + d.length;  // (u_i - u_j)/L + L/2
    throw GraphError("vertex not an endpoint of edge");
}

double EnergySolution::l2_norm() const {
    double s = 0.0;
    for (const auto& d : edge_data) s += d.integral_w_sq;
    return std::sqrt(s);
}

double EnergySolution::l2_norm_deriv() const {
    double s = 0.0;
    for (const auto& d : edge_data) s += d.integral_wprime_sq;
    return std::sqrt(s);
}

double EnergySolution::sup_norm_deriv() const {
    double m = 0.0;
    for (const auto& d : edge_data)
        m = std::max(m, std::max(std::abs(d.slope_from_u), std::abs(d.slope_from_u - d.length)));
    return m;
}

double edge_slope_from_formula(double l1, double l2, double l3) {
    return l1 / 2.0 + l2 * l3 * (l1 + l2 + l3) / (2.0 * (l1 * l2 + l2 * l3 + l3 * l1));
}

std::pair<double, double> evaluate(const EnergySolution& sol, EdgeId id, VertexId from, double x) {
    const auto& d = sol.edge(id);
    if (!(x >= 0.0 && x <= d.length)) throw GraphError("evaluation point outside edge");
    double a = sol.slope(id, from);
    double u0 = sol.vertex_values.at(from);
    return {u0 + a * x - x * x / 2.0, a - x};
}

double distribution_function(const EnergySolution& sol, double t) {
    double total = 0.0;
    for (const auto& d : sol.edge_data) {
        double L = d.length;
        double ui = sol.vertex_values.at(d.u);
        double a = d.slope_from_u;
        // {w > t} is an interval (concave parabola); subtract its overlap
        // with [0, L].
        double disc = a * a + 2.0 * (ui - t);
        if (disc <= 0.0) {
            total += L;  // w <= t on the whole edge
            continue;
        }
        double r = std::sqrt(disc);
        double x1 = std::clamp(a - r, 0.0, L);
        double x2 = std::clamp(a + r, 0.0, L);
        total += L - (x2 - x1);
    }
    return total;
}

AuditReport audit_optimality(const MetricGraph& g, const EnergySolution& sol) {
    AuditReport rep;
    double L = total_length(g);
    rep.is_tree = g.is_tree();

    std::vector<VertexId> neumann_leaves;
    for (const auto& v : g.vertices())
        if (!v.role.is_dirichlet() && g.degree(v.id) == 1) neumann_leaves.push_back(v.id);
    rep.at_most_one_neumann_leaf = neumann_leaves.size() <= 1;

    rep.neumann_hosts_max = true;
    if (neumann_leaves.size() == 1)
        rep.neumann_hosts_max = sol.vertex_values.at(neumann_leaves[0]) >= sol.max_value - 1e-12;

    rep.sup_norm_deriv = sol.sup_norm_deriv();
    rep.gradient_bound = rep.sup_norm_deriv <= L + 1e-12;
    rep.nonnegative = sol.min_value >= -1e-12;

    rep.max_kirchhoff_residual = 0.0;
    for (const auto& [v, r] : sol.kirchhoff_residuals)
        rep.max_kirchhoff_residual = std::max(rep.max_kirchhoff_residual, std::abs(r));
    rep.kirchhoff_ok = rep.max_kirchhoff_residual <= 1e-12 * (1.0 + L);
    return rep;
}

double att_energy(double c) { return c * c / 2.0 - c + 1.0 / 3.0; }

}  // namespace graphopt
