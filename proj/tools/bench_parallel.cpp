#include <chrono>
#include <cstdio>

#include "graphopt/optimizer.hpp"

using namespace graphopt;

// Compares the parallel optimizer against the serial reference on the same
// problem and verifies they select the same optimum.

namespace {

double run(const ProblemSpec& spec, bool parallel, Optimum& out) {
    OptimizerOptions opts;
    opts.parallel = parallel;
    auto start = std::chrono::steady_clock::now();
    out = optimize(spec, opts);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main() {
    ProblemSpec spec;
    spec.dimension = 2;
    spec.pins = {{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.8660254037844386}};
    spec.total_length = 2.2;
    spec.functional = Functional::Energy;

    Optimum serial, parallel;
    double ts = run(spec, false, serial);
    double tp = run(spec, true, parallel);

    std::printf("serial:   %8.3f s   J = %.12g   topology %s\n", ts, serial.objective,
                serial.topology.canonical.c_str());
    std::printf("parallel: %8.3f s   J = %.12g   topology %s\n", tp, parallel.objective,
                parallel.topology.canonical.c_str());
    std::printf("speedup:  %8.2fx\n", ts / tp);

    bool same = serial.topology.canonical == parallel.topology.canonical &&
                std::abs(serial.objective - parallel.objective) <= 1e-12 *
                                                                      (1.0 + std::abs(serial.objective));
    std::printf("results identical: %s\n", same ? "yes" : "NO");
    return same ? 0 : 1;
}
