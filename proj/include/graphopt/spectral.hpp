#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "graphopt/metric_graph.hpp"

namespace graphopt {

/// Vertex-elimination secular matrix at frequency k:
///   M(k)_ii = sum_{j~i} cot(k l_ij),   M(k)_ij = -1 / sin(k l_ij)
/// over the free vertices; det M(k) = 0 at eigenvalues whose eigenfunction
/// does not vanish on all vertices. Throws SecularResonance when some
/// |sin(k l_e)| < 1e-12.
struct SecularMatrix {
    std::vector<VertexId> free_vertices;
    Eigen::MatrixXd matrix;
};

struct SecularResonance : GraphError {
    using GraphError::GraphError;
};

SecularMatrix secular_matrix(const MetricGraph& g, double k);

struct SpectralSolution {
    double lambda1 = 0.0;
    double k1 = 0.0;  // sqrt(lambda1)
    std::map<VertexId, double> vertex_values;  // eigenfunction trace, ||u||_L2 = 1
    double bracket_lo = 0.0, bracket_hi = 0.0;
};

/// First Dirichlet eigenvalue: scan for the first sign change of the
/// smallest eigenvalue of M(k), refined by bisection; Dirichlet-Dirichlet
/// edge resonances are tracked as a second mechanism and the minimum of the
/// two is returned.
SpectralSolution lambda1(const MetricGraph& g);

}  // namespace graphopt
