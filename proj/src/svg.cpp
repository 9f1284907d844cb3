#include "graphopt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace graphopt {

namespace {

struct XY {
    double x = 0.0, y = 0.0;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

}  // namespace

std::string render_svg(const Optimum& opt, const ProblemSpec& spec) {
    const Topology& t = opt.topology;
    double L = spec.total_length;
    double tol = 1e-7 * (1.0 + L);

    std::vector<XY> p(t.vertices.size());
    for (size_t v = 0; v < t.vertices.size(); ++v) {
        const Point& q = opt.placement.positions[v];
        p[v].x = q.empty() ? 0.0 : q[0];
        p[v].y = q.size() > 1 ? q[1] : 0.0;
    }

    double xmin = p[0].x, xmax = p[0].x, ymin = p[0].y, ymax = p[0].y;
    for (const auto& q : p) {
        xmin = std::min(xmin, q.x);
        xmax = std::max(xmax, q.x);
        ymin = std::min(ymin, q.y);
        ymax = std::max(ymax, q.y);
    }
    double span = std::max({xmax - xmin, ymax - ymin, 1e-3});
    double margin = 0.25 * span;
    double scale = 400.0 / (span + 2.0 * margin);
    auto sx = [&](double x) { return (x - xmin + margin) * scale; };
    auto sy = [&](double y) { return (ymax - y + margin) * scale; };  // y up

    std::ostringstream o;
    double side = (span + 2.0 * margin) * scale;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(side)
      << "\" height=\"" << fmt(side) << "\" viewBox=\"0 0 " << fmt(side) << " " << fmt(side)
      << "\">\n";

    for (size_t e = 0; e < t.edges.size(); ++e) {
        auto [a, b] = t.edges[e];
        double dx = p[b].x - p[a].x, dy = p[b].y - p[a].y;
        double r = std::hypot(dx, dy);
        bool taut = r >= opt.lengths[e] - tol;
        if (taut) {
            o << "  <line x1=\"" << fmt(sx(p[a].x)) << "\" y1=\"" << fmt(sy(p[a].y))
              << "\" x2=\"" << fmt(sx(p[b].x)) << "\" y2=\"" << fmt(sy(p[b].y))
              << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        } else {
            // dashed arc bulging perpendicular to the chord, sized by the slack
            double bulge = 0.75 * (opt.lengths[e] - r);
            double nx = r > 1e-12 ? -dy / r : 0.0;
            double ny = r > 1e-12 ? dx / r : 1.0;
            double mx = 0.5 * (p[a].x + p[b].x) + bulge * nx;
            double my = 0.5 * (p[a].y + p[b].y) + bulge * ny;
            o << "  <path d=\"M " << fmt(sx(p[a].x)) << " " << fmt(sy(p[a].y)) << " Q "
              << fmt(sx(mx)) << " " << fmt(sy(my)) << " " << fmt(sx(p[b].x)) << " "
              << fmt(sy(p[b].y))
              << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\" "
                 "stroke-dasharray=\"6,4\"/>\n";
        }
    }

    for (size_t v = 0; v < t.vertices.size(); ++v) {
        bool pin = t.vertices[v].role == Topology::Role::Dirichlet;
        o << "  <circle cx=\"" << fmt(sx(p[v].x)) << "\" cy=\"" << fmt(sy(p[v].y))
          << "\" r=\"" << (pin ? 6 : 3) << "\" fill=\"" << (pin ? "black" : "white")
          << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        if (t.vertices[v].role == Topology::Role::NeumannLeaf)
            o << "  <text x=\"" << fmt(sx(p[v].x) + 8.0) << "\" y=\"" << fmt(sy(p[v].y) - 8.0)
              << "\" font-family=\"sans-serif\" font-size=\"14\">N</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace graphopt
