#pragma once

#include "graphopt/dirichlet_energy.hpp"
#include "graphopt/metric_graph.hpp"

namespace graphopt {

/// Piecewise-linear conforming FEM on the metric graph, n elements per edge.
/// Used purely as an independent check: J_h >= J and lambda_h >= lambda.
double fem_energy(const MetricGraph& g, int n);

/// Smallest eigenvalue of K u = lambda M u (consistent mass) by inverse
/// power iteration, residual 1e-12. Throws after 10000 iterations.
double fem_lambda1(const MetricGraph& g, int n);

struct RearrangementCheck {
    double graph_energy;
    double segment_energy;  // functional of the monotone rearrangement
    bool ok;                // segment_energy <= graph_energy + 1e-6
};

/// Monotone rearrangement of the energy function onto [0, total length],
/// via the exact distribution function sampled on a 10^4-point grid.
RearrangementCheck rearrangement_check(const MetricGraph& g);

}  // namespace graphopt
