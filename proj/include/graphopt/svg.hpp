#pragma once

#include <string>

#include "graphopt/optimizer.hpp"

namespace graphopt {

/// SVG 1.1 drawing of the optimum placement: pins as filled circles, taut
/// edges as lines, slack edges as dashed arcs, the Neumann leaf marked "N".
std::string render_svg(const Optimum& opt, const ProblemSpec& spec);

}  // namespace graphopt
