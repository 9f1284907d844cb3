#pragma once

#include <array>
#include <optional>
#include <vector>

#include "graphopt/dirichlet_energy.hpp"
#include "graphopt/metric_graph.hpp"
#include "graphopt/topology.hpp"

namespace graphopt {

using Point = std::vector<double>;  // point in R^d

enum class Functional { Energy, Lambda1 };

struct ProblemSpec {
    int dimension = 2;
    std::vector<Point> pins;
    double total_length = 0.0;
    Functional functional = Functional::Energy;

    int pin_count() const { return static_cast<int>(pins.size()); }
    void check() const;  // throws on invalid dimension/pins/length
};

struct InfeasibleError : GraphError {
    using GraphError::GraphError;
};

/// Assignment of points to topology vertices; Dirichlet vertices sit
/// exactly on their pins. max_violation = max over edges of |X_i-X_j|-l_e.
struct Placement {
    std::vector<Point> positions;  // by topology vertex index
    double max_violation = 0.0;

    bool feasible(double total_length) const {
        return max_violation <= 1e-7 * (1.0 + total_length);
    }
};

/// Minimizes the maximum edge violation over free-vertex positions
/// (convex min-max): projected subgradient from the pin centroid with a 1/t
/// step schedule, followed by a Newton polish on the active constraints.
/// A failed necessary pre-check (some Dirichlet pair closer in the tree
/// than in space) short-circuits with a certified positive violation.
Placement feasibility(const Topology& t, const std::vector<double>& lengths,
                      const std::vector<Point>& pins, int iterations = 10000);

enum class Embeddability { Embeddable, ImmersionOnly };

struct Optimum {
    Topology topology;
    std::vector<double> lengths;  // topology edge order
    Placement placement;
    double objective = 0.0;  // energy or lambda1 of the realized graph
    bool feasible = false;
    Embeddability embeddability = Embeddability::ImmersionOnly;
    AuditReport audit;
    MetricGraph graph;
};

struct OptimizerOptions {
    int seeds = 16;
    int feasibility_iterations = 10000;       // final placements
    int trial_feasibility_iterations = 200;   // inside Nelder-Mead trials
    int nelder_mead_max_evals = 400;
    bool parallel = true;  // OpenMP over (topology, seed) work units
};

/// Best lengths for one topology: Nelder-Mead on the length simplex with a
/// quadratic feasibility penalty, deterministic multi-starts, contraction
/// re-dispatch for collapsing edges.
Optimum optimize_lengths(const Topology& t, const ProblemSpec& spec,
                         const OptimizerOptions& opts = {});

/// Full search over all enumerated topologies. Throws InfeasibleError when
/// every topology is infeasible (total length below Steiner feasibility).
Optimum optimize(const ProblemSpec& spec, const OptimizerOptions& opts = {});

/// Straight-segment realization test: taut edges must form a non-crossing
/// set avoiding vertex interiors; slack edges must see a common free
/// half-plane to route a detour arc (d >= 3 always routes).
Embeddability embedding_check(const Optimum& opt, const ProblemSpec& spec);

/// Exact energies of the two competitors for three collinear pins
/// (-1,0),(1,0),(n,0) with total length n+2: the 3-star with lengths
/// (1,1,n) and the chain 2 / (n-1)/2 / (n-1)/2 with a unit Neumann pendant
/// at the middle junction.
std::pair<double, double> compare_example42(int n);

/// Splices out free degree-2 vertices, merging their edge pair.
MetricGraph suppress_degree2(const MetricGraph& g);

}  // namespace graphopt
