#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "graphopt/json_io.hpp"
#include "graphopt/report.hpp"
#include "graphopt/svg.hpp"
#include "graphopt/topology.hpp"

using namespace graphopt;

int main(int argc, char** argv) {
    CLI::App app{"Shape optimization of metric graphs: Dirichlet energy and lambda_1"};

    std::string problem_file, functional_flag, out_path, svg_path, topology_code;
    double length_flag = -1.0;
    int list_k = 0, seeds = 16, oracle_n = 0;
    bool serial = false;

    app.add_option("problem", problem_file, "ProblemSpec JSON file");
    app.add_option("--functional", functional_flag, "energy or lambda1 (overrides the file)")
        ->check(CLI::IsMember({"energy", "lambda1"}));
    app.add_option("--length", length_flag, "total length L (overrides the file)");
    app.add_option("--oracle-check", oracle_n, "FEM cross check with n elements per edge")
        ->expected(0, 1)
        ->default_str("128");
    app.add_option("--svg", svg_path, "write an SVG drawing of the optimum");
    app.add_option("--out", out_path, "write the JSON report");
    app.add_option("--list-topologies", list_k, "list admissible topologies for k pins and exit");
    app.add_option("--seeds", seeds, "number of deterministic multi-starts");
    app.add_option("--topology", topology_code, "restrict the search to one canonical code");
    app.add_flag("--serial", serial, "disable parallel evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    // "--oracle-check" with no value: CLI11 leaves the default string
    if (app.count("--oracle-check") && oracle_n == 0) oracle_n = 128;

    try {
        if (app.count("--list-topologies")) {
            auto topologies = enumerate_topologies(list_k);
            std::cout << topologies.size() << " topologies for k=" << list_k << "\n";
            for (size_t i = 0; i < topologies.size(); ++i) {
                const auto& t = topologies[i];
                std::cout << i << ": " << t.canonical << "  (" << t.vertices.size()
                          << " vertices, " << t.edge_count() << " edges"
                          << (t.has_neumann_leaf() ? ", Neumann leaf" : "") << ")\n";
            }
            return 0;
        }

        if (problem_file.empty()) {
            std::cerr << "error: a problem file is required (or --list-topologies)\n";
            return 1;
        }
        std::ifstream in(problem_file);
        if (!in) {
            std::cerr << "error: cannot open " << problem_file << "\n";
            return 1;
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        ProblemSpec spec = problem_from_json(buffer.str());
        if (!functional_flag.empty())
            spec.functional = functional_flag == "energy" ? Functional::Energy : Functional::Lambda1;
        if (length_flag > 0.0) spec.total_length = length_flag;
        spec.check();

        OptimizerOptions opts;
        opts.seeds = seeds;
        opts.parallel = !serial;

        auto start = std::chrono::steady_clock::now();
        Report report;
        report.spec = spec;
        if (!topology_code.empty()) {
            auto topologies = enumerate_topologies(spec.pin_count());
            auto it = std::find_if(topologies.begin(), topologies.end(),
                                   [&](const Topology& t) { return t.canonical == topology_code; });
            if (it == topologies.end()) {
                std::cerr << "error: unknown topology code " << topology_code << "\n";
                return 1;
            }
            report.optimum = optimize_lengths(*it, spec, opts);
            if (!report.optimum.feasible)
                throw InfeasibleError("total length below Steiner feasibility");
        } else {
            report.optimum = optimize(spec, opts);
        }
        if (oracle_n > 0)
            report.oracle = oracle_comparison(report.optimum.graph, spec.functional, oracle_n);
        report.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::cout << report_text(report);
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            out << report_json(report) << "\n";
        }
        if (!svg_path.empty()) {
            std::ofstream out(svg_path);
            out << render_svg(report.optimum, spec);
        }
        return 0;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
