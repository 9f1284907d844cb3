#pragma once

#include <optional>
#include <string>

#include "graphopt/optimizer.hpp"

namespace graphopt {

/// Exact-vs-FEM cross check on the winning graph at mesh sizes n and 2n.
struct OracleComparison {
    int n = 0;
    double exact = 0.0;
    double fem_n = 0.0;
    double fem_2n = 0.0;
    double abs_diff = 0.0;          // |exact - fem_n|
    double richardson_ratio = 0.0;  // (fem_n - exact) / (fem_2n - exact), ~4 for P1
};

struct Report {
    ProblemSpec spec;
    Optimum optimum;
    std::optional<OracleComparison> oracle;
    double elapsed_seconds = 0.0;  // shown in the text report only
};

OracleComparison oracle_comparison(const MetricGraph& g, Functional f, int n);

/// Deterministic JSON: fixed key order, every number with 17 significant
/// digits, no timing field.
std::string report_json(const Report& r);

/// Human-readable summary, energies to 12 significant digits.
std::string report_text(const Report& r);

ProblemSpec problem_from_json(const std::string& text);
std::string problem_to_json(const ProblemSpec& spec);

}  // namespace graphopt
