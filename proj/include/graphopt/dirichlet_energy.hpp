#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "graphopt/metric_graph.hpp"

namespace graphopt {

/// Kirchhoff system over the free vertices. Dirichlet columns are folded
/// into the right-hand side (their value is 0).
struct LinearSystem {
    std::vector<VertexId> free_vertices;  // row/column order
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

LinearSystem assemble_kirchhoff_system(const MetricGraph& g);

/// The minimizer of J(u) = 1/2 int |u'|^2 - int u over functions vanishing
/// at the Dirichlet vertices. Piecewise parabolic: on an edge (u,v) of
/// length L, w(x) = value(u) + a x - x^2/2 with x measured from u.
class EnergySolution {
  public:
    struct EdgeData {
        EdgeId id;
        VertexId u, v;
        double length;
        double slope_from_u;        // a in w(x) = value(u) + a x - x^2/2
        double integral_w;          // int_0^L w
        double integral_wprime_sq;  // int_0^L |w'|^2
        double integral_w_sq;       // int_0^L w^2
        double max_value;           // max of w on [0, L]
        double min_value;           // min of w on [0, L]
    };

    MetricGraph graph;
    std::map<VertexId, double> vertex_values;
    std::vector<EdgeData> edge_data;  // same order as graph.edges()
    double energy = 0.0;
    std::map<VertexId, double> kirchhoff_residuals;  // free vertices only
    double min_value = 0.0;
    double max_value = 0.0;

    const EdgeData& edge(EdgeId id) const;
    /// Directed slope a(from -> other endpoint) at x = 0.
    double slope(EdgeId id, VertexId from) const;
    double l2_norm() const;        // ||w||_L2
    double l2_norm_deriv() const;  // ||w'||_L2
    double sup_norm_deriv() const;
};

EnergySolution solve_energy(const MetricGraph& g);

/// Pendant slope of the symmetric 3-star solution:
/// a1 = l1/2 + l2 l3 (l1+l2+l3) / (2 (l1 l2 + l2 l3 + l3 l1)).
double edge_slope_from_formula(double l1, double l2, double l3);

/// Value and derivative of w at arc position x on edge id, measured from
/// the `from` endpoint. Throws if x is outside [0, L].
std::pair<double, double> evaluate(const EnergySolution& sol, EdgeId id, VertexId from, double x);

/// Exact distribution function mu(t) = |{w <= t}|.
double distribution_function(const EnergySolution& sol, double t);

struct AuditReport {
    bool is_tree = false;
    bool at_most_one_neumann_leaf = false;
    bool neumann_hosts_max = false;  // vacuously true without a Neumann leaf
    bool gradient_bound = false;     // ||w'||_inf <= total length
    bool nonnegative = false;        // w >= -1e-12 everywhere
    bool kirchhoff_ok = false;       // residuals <= 1e-12 (1 + total length)
    double max_kirchhoff_residual = 0.0;
    double sup_norm_deriv = 0.0;

    bool all_pass() const {
        return is_tree && at_most_one_neumann_leaf && neumann_hosts_max && gradient_bound &&
               nonnegative && kirchhoff_ok;
    }
};

AuditReport audit_optimality(const MetricGraph& g, const EnergySolution& sol);

/// J of w_c(x) = -x^2/2 + c x on [0,1]: c^2/2 - c + 1/3.
double att_energy(double c);

}  // namespace graphopt
