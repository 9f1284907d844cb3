#include "graphopt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graphopt {

namespace {

constexpr double kResonanceTol = 1e-12;

bool resonant(const MetricGraph& g, double k) {
    for (const auto& e : g.edges())
        if (std::abs(std::sin(k * e.length)) < kResonanceTol) return true;
    return false;
}

double nudge_off_resonance(const MetricGraph& g, double k, double step) {
    while (resonant(g, k)) k += step * 1e-3;
    return k;
}

double smallest_eigenvalue(const SecularMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.matrix, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// L2 norm squared over one edge of u(x) = (A sin(k(l-x)) + B sin(kx)) / sin(kl).
double edge_l2_sq(double A, double B, double k, double l) {
    double s = std::sin(k * l);
    double diag = l / 2.0 - std::sin(2.0 * k * l) / (4.0 * k);
    double cross = (std::sin(k * l) - k * l * std::cos(k * l)) / (2.0 * k);
    return ((A * A + B * B) * diag + 2.0 * A * B * cross) / (s * s);
}

}  // namespace

SecularMatrix secular_matrix(const MetricGraph& g, double k) {
    if (!(k > 0.0)) throw GraphError("secular_matrix: k must be positive");
    if (resonant(g, k)) throw SecularResonance("secular_matrix: k at an edge resonance");

    SecularMatrix m;
    std::map<VertexId, int> index;
    for (const auto& v : g.vertices())
        if (!v.role.is_dirichlet()) {
            index[v.id] = static_cast<int>(m.free_vertices.size());
            m.free_vertices.push_back(v.id);
        }
    int n = static_cast<int>(m.free_vertices.size());
    m.matrix = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges()) {
        double c = std::cos(k * e.length) / std::sin(k * e.length);
        auto iu = index.find(e.u);
        auto iv = index.find(e.v);
        if (iu != index.end()) m.matrix(iu->second, iu->second) += c;
        if (iv != index.end()) m.matrix(iv->second, iv->second) += c;
        if (iu != index.end() && iv != index.end()) {
            double s = -1.0 / std::sin(k * e.length);
            m.matrix(iu->second, iv->second) += s;
            m.matrix(iv->second, iu->second) += s;
        }
    }
    return m;
}

SpectralSolution lambda1(const MetricGraph& g) {
    if (g.dirichlet_count() == 0) throw GraphError("lambda1: no Dirichlet vertex");

    double l_min = std::numeric_limits<double>::infinity();
    double l_max = 0.0;
    for (const auto& e : g.edges()) {
        l_min = std::min(l_min, e.length);
        l_max = std::max(l_max, e.length);
    }

    // Mechanism 2: modes supported on a single Dirichlet-Dirichlet edge,
    // vanishing at both endpoints.
    double k_resonance = std::numeric_limits<double>::infinity();
    EdgeId resonance_edge = -1;
    for (const auto& e : g.edges())
        if (g.vertex(e.u).role.is_dirichlet() && g.vertex(e.v).role.is_dirichlet())
            if (M_PI / e.length < k_resonance) {
                k_resonance = M_PI / e.length;
                resonance_edge = e.id;
            }

    bool have_free = false;
    for (const auto& v : g.vertices())
        if (!v.role.is_dirichlet()) have_free = true;

    double k_root = std::numeric_limits<double>::infinity();
    double bracket_lo = 0.0, bracket_hi = 0.0;
    if (have_free) {
        double delta = 1e-6 / l_max;
        double step = M_PI / (64.0 * l_max);
        auto mu = [&](double k) { return smallest_eigenvalue(secular_matrix(g, k)); };

        // A sine bump on the longest edge is admissible, so the minimum of
        // the two mechanisms sits at or below pi/l_max; the wider ranges are
        // numerical fallbacks only. Past k_resonance the resonance mode wins,
        // so every scan is capped there.
        double bound = M_PI / l_max * (1.0 + 1e-9) + 2.0 * step;
        const double ends[3] = {bound, M_PI / l_min, 2.0 * M_PI / l_min};
        for (int attempt = 0; attempt < 3 && !std::isfinite(k_root); ++attempt) {
            if (k_resonance <= (attempt == 0 ? 0.0 : ends[attempt - 1])) break;
            double k_end = std::min(ends[attempt], k_resonance);
            double k_prev = nudge_off_resonance(g, delta, step);
            double mu_prev = mu(k_prev);
            for (double k = k_prev + step; k <= k_end; k += step) {
                double kk = nudge_off_resonance(g, k, step);
                double val = mu(kk);
                if (mu_prev > 0.0 && val <= 0.0) {
                    double lo = k_prev, hi = kk;
                    while (hi - lo > 1e-12) {
                        double m = 0.5 * (lo + hi);
                        for (int j = 1; resonant(g, m) && j < 40; ++j)
                            m = lo + (0.5 + 0.01 * j) * (hi - lo);
                        if (resonant(g, m)) break;  // root pinned against a resonance
                        if (mu(m) > 0.0) lo = m;
                        else hi = m;
                    }
                    k_root = 0.5 * (lo + hi);
                    bracket_lo = lo;
                    bracket_hi = hi;
                    break;
                }
                k_prev = kk;
                mu_prev = val;
            }
        }
        if (!std::isfinite(k_root) && !std::isfinite(k_resonance))
            throw GraphError("spectral bracket failure");
    } else if (!std::isfinite(k_resonance)) {
        throw GraphError("spectral bracket failure");
    }

    SpectralSolution sol;
    for (const auto& v : g.vertices()) sol.vertex_values[v.id] = 0.0;

    if (k_root <= k_resonance) {
        sol.k1 = k_root;
        sol.lambda1 = k_root * k_root;
        sol.bracket_lo = bracket_lo;
        sol.bracket_hi = bracket_hi;

        SecularMatrix m = secular_matrix(g, nudge_off_resonance(g, sol.k1, 1e-9));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.matrix);
        Eigen::VectorXd vec = es.eigenvectors().col(0);
        for (size_t i = 0; i < m.free_vertices.size(); ++i)
            sol.vertex_values[m.free_vertices[i]] = vec(static_cast<Eigen::Index>(i));

        double norm_sq = 0.0;
        for (const auto& e : g.edges())
            norm_sq += edge_l2_sq(sol.vertex_values[e.u], sol.vertex_values[e.v], sol.k1, e.length);
        double norm = std::sqrt(norm_sq);
        if (norm > 0.0)
            for (auto& [id, val] : sol.vertex_values) val /= norm;
    } else {
        sol.k1 = k_resonance;
        sol.lambda1 = k_resonance * k_resonance;
        sol.bracket_lo = sol.bracket_hi = k_resonance;
        (void)resonance_edge;  // eigenfunction vanishes at every vertex
    }
    return sol;
}

}  // namespace graphopt
