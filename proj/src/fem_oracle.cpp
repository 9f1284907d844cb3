#include "graphopt/fem_oracle.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>

namespace graphopt {

namespace {

struct FemSystem {
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
    Eigen::VectorXd load;
};

// Shared vertex nodes, n-1 interior nodes per edge, Dirichlet nodes
// eliminated during assembly.
FemSystem assemble(const MetricGraph& g, int n) {
    if (n < 2) throw GraphError("fem: need at least 2 elements per edge");
    if (g.dirichlet_count() == 0) throw GraphError("fem: no Dirichlet vertex");

    std::map<VertexId, int> vertex_node;
    int node_count = 0;
    for (const auto& v : g.vertices()) vertex_node[v.id] = node_count++;

    std::vector<std::array<int, 2>> elements;  // node pairs
    std::vector<double> elem_h;
    for (const auto& e : g.edges()) {
        double h = e.length / n;
        int prev = vertex_node[e.u];
        for (int i = 1; i < n; ++i) {
            int cur = node_count++;
            elements.push_back({prev, cur});
            elem_h.push_back(h);
            prev = cur;
        }
        elements.push_back({prev, vertex_node[e.v]});
        elem_h.push_back(h);
    }

    // Free-dof numbering: skip Dirichlet vertex nodes.
    std::vector<int> dof(node_count);
    int free_count = 0;
    for (const auto& v : g.vertices())
        dof[vertex_node[v.id]] = v.role.is_dirichlet() ? -1 : 0;
    for (int i = 0; i < node_count; ++i)
        if (i >= static_cast<int>(g.vertices().size()))
            dof[i] = 0;
    for (int i = 0; i < node_count; ++i)
        if (dof[i] == 0) dof[i] = free_count++;
        else dof[i] = -1;

    FemSystem sys;
    sys.stiffness = Eigen::MatrixXd::Zero(free_count, free_count);
    sys.mass = Eigen::MatrixXd::Zero(free_count, free_count);
    sys.load = Eigen::VectorXd::Zero(free_count);

    for (size_t el = 0; el < elements.size(); ++el) {
        double h = elem_h[el];
        double k_local[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
        double m_local[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
        for (int a = 0; a < 2; ++a) {
            int da = dof[elements[el][a]];
            if (da < 0) continue;
            sys.load(da) += h / 2.0;
            for (int b = 0; b < 2; ++b) {
                int db = dof[elements[el][b]];
                if (db < 0) continue;
                sys.stiffness(da, db) += k_local[a][b];
                sys.mass(da, db) += m_local[a][b];
            }
        }
    }
    return sys;
}

}  // namespace

double fem_energy(const MetricGraph& g, int n) {
    FemSystem sys = assemble(g, n);
    if (sys.load.size() == 0) return 0.0;
    Eigen::VectorXd u = sys.stiffness.ldlt().solve(sys.load);
    return 0.5 * u.dot(sys.stiffness * u) - sys.load.dot(u);
}

double fem_lambda1(const MetricGraph& g, int n) {
    FemSystem sys = assemble(g, n);
    if (sys.load.size() == 0) throw GraphError("fem: no free dofs");
    Eigen::LDLT<Eigen::MatrixXd> solver(sys.stiffness);

    Eigen::VectorXd x = Eigen::VectorXd::Ones(sys.load.size());
    x /= std::sqrt(x.dot(sys.mass * x));
    double lambda = x.dot(sys.stiffness * x);
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd y = solver.solve(sys.mass * x);
        y /= std::sqrt(y.dot(sys.mass * y));
        lambda = y.dot(sys.stiffness * y) / y.dot(sys.mass * y);
        Eigen::VectorXd res = sys.stiffness * y - lambda * sys.mass * y;
        x = y;
        if (res.norm() <= 1e-12 * (1.0 + lambda)) return lambda;
    }
    throw GraphError("fem_lambda1: inverse power iteration did not converge");
}

RearrangementCheck rearrangement_check(const MetricGraph& g) {
    EnergySolution sol = solve_energy(g);
    const int grid = 10000;
    double tmax = sol.max_value;

    double seg = 0.0;
    double s_prev = 0.0, t_prev = 0.0;
    for (int m = 1; m <= grid; ++m) {
        double t = tmax * m / grid;
        double s = distribution_function(sol, t);
        double ds = s - s_prev, dt = t - t_prev;
        if (ds > 0.0)
            seg += 0.5 * dt * dt / ds - ds * (t_prev + t) / 2.0;
        s_prev = s;
        t_prev = t;
    }

    RearrangementCheck out;
    out.graph_energy = sol.energy;
    out.segment_energy = seg;
    out.ok = seg <= sol.energy + 1e-6;
    return out;
}

}  // namespace graphopt
