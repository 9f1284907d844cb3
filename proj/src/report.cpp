#include "graphopt/report.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "graphopt/fem_oracle.hpp"
#include "graphopt/json_io.hpp"
#include "graphopt/spectral.hpp"

namespace graphopt {

namespace {

std::string num17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string num12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

const char* role_name(Topology::Role r) {
    switch (r) {
        case Topology::Role::Dirichlet: return "dirichlet";
        case Topology::Role::Kirchhoff: return "kirchhoff";
        case Topology::Role::NeumannLeaf: return "neumann";
    }
    return "?";
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

OracleComparison oracle_comparison(const MetricGraph& g, Functional f, int n) {
    OracleComparison c;
    c.n = n;
    if (f == Functional::Energy) {
        c.exact = solve_energy(g).energy;
        c.fem_n = fem_energy(g, n);
        c.fem_2n = fem_energy(g, 2 * n);
    } else {
        c.exact = lambda1(g).lambda1;
        c.fem_n = fem_lambda1(g, n);
        c.fem_2n = fem_lambda1(g, 2 * n);
    }
    c.abs_diff = std::abs(c.exact - c.fem_n);
    double denom = c.fem_2n - c.exact;
    c.richardson_ratio = denom != 0.0 ? (c.fem_n - c.exact) / denom : 0.0;
    return c;
}

std::string report_json(const Report& r) {
    std::ostringstream o;
    o << "{\"spec\":{\"dimension\":" << r.spec.dimension << ",\"pins\":[";
    for (size_t i = 0; i < r.spec.pins.size(); ++i) {
        if (i) o << ",";
        o << "[";
        for (size_t c = 0; c < r.spec.pins[i].size(); ++c)
            o << (c ? "," : "") << num17(r.spec.pins[i][c]);
        o << "]";
    }
    o << "],\"total_length\":" << num17(r.spec.total_length) << ",\"functional\":\""
      << (r.spec.functional == Functional::Energy ? "energy" : "lambda1") << "\"},";

    const Optimum& opt = r.optimum;
    const Topology& t = opt.topology;
    o << "\"optimum\":{\"topology\":{\"canonical\":\"" << escape(t.canonical)
      << "\",\"vertices\":[";
    for (size_t v = 0; v < t.vertices.size(); ++v) {
        if (v) o << ",";
        o << "{\"role\":\"" << role_name(t.vertices[v].role) << "\"";
        if (t.vertices[v].role == Topology::Role::Dirichlet)
            o << ",\"pin\":" << t.vertices[v].pin;
        o << "}";
    }
    o << "],\"edges\":[";
    for (size_t e = 0; e < t.edges.size(); ++e) {
        if (e) o << ",";
        o << "[" << t.edges[e].first << "," << t.edges[e].second << "]";
    }
    o << "]},\"lengths\":[";
    for (size_t e = 0; e < opt.lengths.size(); ++e) o << (e ? "," : "") << num17(opt.lengths[e]);
    o << "],\"placement\":{\"positions\":[";
    for (size_t v = 0; v < opt.placement.positions.size(); ++v) {
        if (v) o << ",";
        o << "[";
        for (size_t c = 0; c < opt.placement.positions[v].size(); ++c)
            o << (c ? "," : "") << num17(opt.placement.positions[v][c]);
        o << "]";
    }
    o << "],\"max_violation\":" << num17(opt.placement.max_violation) << "},\"feasible\":"
      << (opt.feasible ? "true" : "false") << ",\"objective\":" << num17(opt.objective)
      << ",\"embeddable\":\""
      << (opt.embeddability == Embeddability::Embeddable ? "Embeddable" : "ImmersionOnly")
      << "\",\"audit\":{";
    const AuditReport& a = opt.audit;
    o << "\"is_tree\":" << (a.is_tree ? "true" : "false")
      << ",\"at_most_one_neumann_leaf\":" << (a.at_most_one_neumann_leaf ? "true" : "false")
      << ",\"neumann_hosts_max\":" << (a.neumann_hosts_max ? "true" : "false")
      << ",\"gradient_bound\":" << (a.gradient_bound ? "true" : "false")
      << ",\"nonnegative\":" << (a.nonnegative ? "true" : "false")
      << ",\"kirchhoff_ok\":" << (a.kirchhoff_ok ? "true" : "false")
      << ",\"max_kirchhoff_residual\":" << num17(a.max_kirchhoff_residual)
      << ",\"sup_norm_deriv\":" << num17(a.sup_norm_deriv) << "}}";

    if (r.oracle) {
        const OracleComparison& c = *r.oracle;
        o << ",\"oracle\":{\"n\":" << c.n << ",\"exact\":" << num17(c.exact)
          << ",\"fem_n\":" << num17(c.fem_n) << ",\"fem_2n\":" << num17(c.fem_2n)
          << ",\"abs_diff\":" << num17(c.abs_diff)
          << ",\"richardson_ratio\":" << num17(c.richardson_ratio) << "}";
    }
    o << "}";
    return o.str();
}

std::string report_text(const Report& r) {
    std::ostringstream o;
    const Optimum& opt = r.optimum;
    const char* fname = r.spec.functional == Functional::Energy ? "energy" : "lambda1";
    o << "problem: " << r.spec.pins.size() << " pin(s) in R^" << r.spec.dimension
      << ", total length " << num12(r.spec.total_length) << ", functional " << fname << "\n";
    o << "topology: " << opt.topology.canonical << "  (" << opt.topology.vertices.size()
      << " vertices, " << opt.topology.edge_count() << " edges"
      << (opt.topology.has_neumann_leaf() ? ", Neumann leaf" : "") << ")\n";
    o << "lengths:";
    for (double l : opt.lengths) o << " " << num12(l);
    o << "\n";
    o << "placement:";
    for (const auto& p : opt.placement.positions) {
        o << " (";
        for (size_t c = 0; c < p.size(); ++c) o << (c ? "," : "") << num12(p[c]);
        o << ")";
    }
    o << "\n";
    o << "max violation: " << num12(opt.placement.max_violation)
      << (opt.feasible ? "  [feasible]" : "  [INFEASIBLE]") << "\n";
    o << fname << ": " << num12(opt.objective) << "\n";
    o << "classification: "
      << (opt.embeddability == Embeddability::Embeddable ? "Embeddable" : "ImmersionOnly") << "\n";
    const AuditReport& a = opt.audit;
    o << "audit: tree=" << (a.is_tree ? "yes" : "no")
      << " one-neumann=" << (a.at_most_one_neumann_leaf ? "yes" : "no")
      << " neumann-max=" << (a.neumann_hosts_max ? "yes" : "no")
      << " gradient-bound=" << (a.gradient_bound ? "yes" : "no")
      << " nonnegative=" << (a.nonnegative ? "yes" : "no")
      << " kirchhoff=" << (a.kirchhoff_ok ? "yes" : "no")
      << " residual=" << num12(a.max_kirchhoff_residual) << "\n";
    if (r.oracle) {
        const OracleComparison& c = *r.oracle;
        o << "oracle (n=" << c.n << "): exact=" << num12(c.exact) << " fem=" << num12(c.fem_n)
          << " |diff|=" << num12(c.abs_diff) << " richardson=" << num12(c.richardson_ratio)
          << "\n";
    }
    o << "elapsed: " << num12(r.elapsed_seconds) << " s\n";
    return o.str();
}

ProblemSpec problem_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("problem file: ") + e.what());
    }
    ProblemSpec spec;
    try {
        spec.dimension = j.at("dimension").get<int>();
        for (const auto& p : j.at("pins")) spec.pins.push_back(p.get<Point>());
        spec.total_length = j.at("total_length").get<double>();
        std::string f = j.at("functional").get<std::string>();
        if (f == "energy") spec.functional = Functional::Energy;
        else if (f == "lambda1") spec.functional = Functional::Lambda1;
        else throw ParseError("problem file: field 'functional' must be 'energy' or 'lambda1'");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("problem file: ") + e.what());
    }
    return spec;
}

std::string problem_to_json(const ProblemSpec& spec) {
    std::ostringstream o;
    o << "{\"dimension\":" << spec.dimension << ",\"pins\":[";
    for (size_t i = 0; i < spec.pins.size(); ++i) {
        if (i) o << ",";
        o << "[";
        for (size_t c = 0; c < spec.pins[i].size(); ++c)
            o << (c ? "," : "") << num17(spec.pins[i][c]);
        o << "]";
    }
    o << "],\"total_length\":" << num17(spec.total_length) << ",\"functional\":\""
      << (spec.functional == Functional::Energy ? "energy" : "lambda1") << "\"}";
    return o.str();
}

}  // namespace graphopt
