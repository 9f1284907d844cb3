#pragma once

#include <string>

#include "graphopt/metric_graph.hpp"

namespace graphopt {

// Graph interchange format:
// {"vertices":[{"id":0,"role":"dirichlet","pin":0},{"id":1,"role":"free"}],
//  "edges":[{"id":0,"u":0,"v":1,"length":0.5}]}
MetricGraph graph_from_json(const std::string& text);
std::string graph_to_json(const MetricGraph& g);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace graphopt
