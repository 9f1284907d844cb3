#include "graphopt/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "graphopt/spectral.hpp"

namespace graphopt {

void ProblemSpec::check() const {
    if (dimension < 1) throw GraphError("problem spec: dimension must be >= 1");
    if (pins.empty()) throw GraphError("problem spec: at least one pin required");
    for (const auto& p : pins)
        if (static_cast<int>(p.size()) != dimension)
            throw GraphError("problem spec: pin dimension mismatch");
    for (size_t i = 0; i < pins.size(); ++i)
        for (size_t j = i + 1; j < pins.size(); ++j) {
            double d2 = 0.0;
            for (int c = 0; c < dimension; ++c)
                d2 += (pins[i][c] - pins[j][c]) * (pins[i][c] - pins[j][c]);
            if (d2 == 0.0) throw GraphError("problem spec: coincident pins");
        }
    if (!(total_length > 0.0)) throw GraphError("problem spec: total length must be positive");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd to_vec(const Point& p) {
    VectorXd v(p.size());
    for (size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = p[i];
    return v;
}

Point to_point(const VectorXd& v) {
    Point p(static_cast<size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) p[static_cast<size_t>(i)] = v(i);
    return p;
}

std::vector<std::vector<std::pair<int, int>>> adjacency(const Topology& t) {
    std::vector<std::vector<std::pair<int, int>>> adj(t.vertices.size());
    for (int e = 0; e < t.edge_count(); ++e) {
        adj[t.edges[e].first].emplace_back(e, t.edges[e].second);
        adj[t.edges[e].second].emplace_back(e, t.edges[e].first);
    }
    return adj;
}

// Edge indices on the unique tree path between two vertices.
std::vector<int> tree_path(const Topology& t, int from, int to) {
    auto adj = adjacency(t);
    std::vector<int> parent(t.vertices.size(), -1), parent_edge(t.vertices.size(), -1);
    std::queue<int> q;
    q.push(from);
    parent[from] = from;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (auto [e, w] : adj[v])
            if (parent[w] < 0) {
                parent[w] = v;
                parent_edge[w] = e;
                q.push(w);
            }
    }
    std::vector<int> path;
    for (int v = to; v != from; v = parent[v]) path.push_back(parent_edge[v]);
    return path;
}

double max_violation_at(const Topology& t, const std::vector<double>& lengths,
                        const std::vector<VectorXd>& X, int* arg_edge = nullptr) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < t.edge_count(); ++e) {
        double v = (X[t.edges[e].first] - X[t.edges[e].second]).norm() - lengths[e];
        if (v > worst) {
            worst = v;
            if (arg_edge) *arg_edge = e;
        }
    }
    return worst;
}

// Newton iteration on the KKT system of min-max over the active edge set A:
//   |X_i - X_j| - l_e = v  (e in A),  sum_e lambda_e grad g_e = 0,  sum lambda = 1.
// Returns true and updates X on success.
bool newton_polish(const Topology& t, const std::vector<double>& lengths,
                   std::vector<VectorXd>& X, const std::vector<bool>& is_free, double scale) {
    int dim = static_cast<int>(X[0].size());
    int best_edge = -1;
    double vbest = max_violation_at(t, lengths, X, &best_edge);

    std::set<int> active;
    double tau = 1e-2 * scale;
    for (int e = 0; e < t.edge_count(); ++e) {
        auto [i, j] = t.edges[e];
        if (!is_free[i] && !is_free[j]) continue;  // constant violation, nothing to move
        double v = (X[i] - X[j]).norm() - lengths[e];
        if (v >= vbest - tau) active.insert(e);
    }

    for (int round = 0; round < 6 && !active.empty(); ++round) {
        std::vector<int> A(active.begin(), active.end());
        std::map<int, int> var_of;  // free vertex -> block index
        for (int e : A)
            for (int end : {t.edges[e].first, t.edges[e].second})
                if (is_free[end] && !var_of.count(end))
                    var_of.emplace(end, static_cast<int>(var_of.size()));
        int nf = static_cast<int>(var_of.size());
        if (nf == 0) return false;
        int n = nf * dim + 1 + static_cast<int>(A.size());
        int v_idx = nf * dim;
        int lam0 = v_idx + 1;

        std::vector<VectorXd> Y;
        for (auto [vert, idx] : var_of) {
            (void)idx;
            Y.push_back(X[vert]);
        }
        std::vector<int> var_verts;
        for (auto [vert, idx] : var_of) {
            (void)idx;
            var_verts.push_back(vert);
        }
        double v = vbest;
        VectorXd lam = VectorXd::Constant(static_cast<Eigen::Index>(A.size()),
                                          1.0 / static_cast<double>(A.size()));

        auto position = [&](int vert) -> VectorXd {
            auto it = var_of.find(vert);
            return it != var_of.end() ? Y[static_cast<size_t>(it->second)] : X[vert];
        };
        auto residual_jacobian = [&](VectorXd& F, MatrixXd& J) -> bool {
            F.setZero(n);
            J.setZero(n, n);
            int stat0 = static_cast<int>(A.size());
            for (size_t a = 0; a < A.size(); ++a) {
                int e = A[a];
                auto [i, j] = t.edges[e];
                VectorXd diff = position(i) - position(j);
                double r = diff.norm();
                if (r < 1e-10 * scale) return false;
                VectorXd u = diff / r;
                MatrixXd H = (MatrixXd::Identity(dim, dim) - u * u.transpose()) / r;
                double le = lam(static_cast<Eigen::Index>(a));
                int ci = is_free[i] ? var_of.at(i) : -1;
                int cj = is_free[j] ? var_of.at(j) : -1;
                int row = static_cast<int>(a);
                F(row) = r - lengths[e] - v;
                J(row, v_idx) = -1.0;
                if (ci >= 0) {
                    J.block(row, ci * dim, 1, dim) = u.transpose();
                    F.segment(stat0 + ci * dim, dim) += le * u;
                    J.block(stat0 + ci * dim, lam0 + static_cast<int>(a), dim, 1) = u;
                    J.block(stat0 + ci * dim, ci * dim, dim, dim) += le * H;
                    if (cj >= 0) J.block(stat0 + ci * dim, cj * dim, dim, dim) -= le * H;
                }
                if (cj >= 0) {
                    J.block(row, cj * dim, 1, dim) = -u.transpose();
                    F.segment(stat0 + cj * dim, dim) -= le * u;
                    J.block(stat0 + cj * dim, lam0 + static_cast<int>(a), dim, 1) = -u;
                    J.block(stat0 + cj * dim, cj * dim, dim, dim) += le * H;
                    if (ci >= 0) J.block(stat0 + cj * dim, ci * dim, dim, dim) -= le * H;
                }
                J(n - 1, lam0 + static_cast<int>(a)) = 1.0;
            }
            F(n - 1) = lam.sum() - 1.0;
            return true;
        };

        VectorXd F(n);
        MatrixXd J(n, n);
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
            if (!residual_jacobian(F, J)) break;
            double fn = F.lpNorm<Eigen::Infinity>();
            if (fn <= 1e-12 * scale) {
                converged = true;
                break;
            }
            Eigen::FullPivLU<MatrixXd> lu(J);
            if (!lu.isInvertible()) break;
            VectorXd dz = lu.solve(-F);
            double tstep = 1.0;
            bool accepted = false;
            for (int bt = 0; bt < 10; ++bt, tstep *= 0.5) {
                auto Yt = Y;
                for (int b = 0; b < nf; ++b)
                    Yt[static_cast<size_t>(b)] += tstep * dz.segment(b * dim, dim);
                double vt = v + tstep * dz(v_idx);
                VectorXd lt = lam + tstep * dz.segment(lam0, static_cast<Eigen::Index>(A.size()));
                std::swap(Y, Yt);
                double vs = v;
                VectorXd ls = lam;
                v = vt;
                lam = lt;
                VectorXd Ft(n);
                MatrixXd Jt(n, n);
                if (residual_jacobian(Ft, Jt) &&
                    Ft.lpNorm<Eigen::Infinity>() <= (1.0 - 1e-4 * tstep) * fn) {
                    accepted = true;
                    break;
                }
                std::swap(Y, Yt);
                v = vs;
                lam = ls;
            }
            if (!accepted) break;
        }
        if (!converged) return false;

        if (lam.minCoeff() < -1e-8) {
            Eigen::Index drop;
            lam.minCoeff(&drop);
            active.erase(A[static_cast<size_t>(drop)]);
            continue;
        }

        std::vector<VectorXd> Xnew = X;
        for (size_t b = 0; b < var_verts.size(); ++b) Xnew[var_verts[b]] = Y[b];
        if (max_violation_at(t, lengths, Xnew) <= vbest + 1e-12 * scale) {
            X = Xnew;
            return true;
        }
        return false;
    }
    return false;
}

double spatial_scale(const std::vector<Point>& pins, const std::vector<double>& lengths) {
    double span = 0.0;
    for (size_t i = 0; i < pins.size(); ++i)
        for (size_t j = i + 1; j < pins.size(); ++j)
            span = std::max(span, (to_vec(pins[i]) - to_vec(pins[j])).norm());
    double total = 0.0;
    for (double l : lengths) total += l;
    return 1.0 + span + total;
}

}  // namespace

Placement feasibility(const Topology& t, const std::vector<double>& lengths,
                      const std::vector<Point>& pins, int iterations) {
    if (static_cast<int>(lengths.size()) != t.edge_count())
        throw GraphError("feasibility: length count mismatch");
    if (static_cast<int>(pins.size()) < t.k) throw GraphError("feasibility: missing pins");

    int n = static_cast<int>(t.vertices.size());
    int dim = static_cast<int>(pins[0].size());
    double scale = spatial_scale(pins, lengths);

    VectorXd centroid = VectorXd::Zero(dim);
    for (const auto& p : pins) centroid += to_vec(p);
    centroid /= static_cast<double>(pins.size());

    std::vector<bool> is_free(n, true);
    std::vector<VectorXd> X(n, centroid);
    for (int v = 0; v < n; ++v)
        if (t.vertices[v].role == Topology::Role::Dirichlet) {
            is_free[v] = false;
            X[v] = to_vec(pins[t.vertices[v].pin]);
        }

    auto pack = [&](double viol) {
        Placement p;
        for (const auto& x : X) p.positions.push_back(to_point(x));
        p.max_violation = viol;
        return p;
    };

    // Necessary condition: the tree path between two pinned vertices must be
    // at least as long as the straight-line pin distance. Certifies only
    // clear-cut infeasibility; marginal deficits fall through to the solve,
    // whose violation at the returned placement is the honest value.
    double certified = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (is_free[i] || is_free[j]) continue;
            auto path = tree_path(t, i, j);
            double plen = 0.0;
            for (int e : path) plen += lengths[e];
            double deficit = (X[i] - X[j]).norm() - plen;
            certified = std::max(certified, deficit / static_cast<double>(path.size()));
        }
    if (certified > 1e-6 * scale) return pack(certified);

    bool any_free = std::find(is_free.begin(), is_free.end(), true) != is_free.end();
    if (!any_free) return pack(max_violation_at(t, lengths, X));

    auto movable_worst = [&](int* edge) {
        double worst = -std::numeric_limits<double>::infinity();
        *edge = -1;
        for (int e = 0; e < t.edge_count(); ++e) {
            auto [i, j] = t.edges[e];
            if (!is_free[i] && !is_free[j]) continue;
            double v = (X[i] - X[j]).norm() - lengths[e];
            if (v > worst) {
                worst = v;
                *edge = e;
            }
        }
        return worst;
    };

    std::vector<VectorXd> best = X;
    double best_v = max_violation_at(t, lengths, X);
    double step0 = 0.25 * scale;

    for (int round = 0; round < 3; ++round) {
        int iters = std::max(iterations / (round == 0 ? 1 : 4), 50);
        for (int it = 1; it <= iters; ++it) {
            double global = max_violation_at(t, lengths, X);
            if (global < best_v) {
                best_v = global;
                best = X;
            }
            if (best_v <= 0.0) return pack(best_v);
            int e = -1;
            double v = movable_worst(&e);
            if (e < 0 || v <= 0.0) break;
            auto [i, j] = t.edges[e];
            VectorXd diff = X[i] - X[j];
            double r = diff.norm();
            if (r < 1e-15) continue;
            VectorXd u = diff / r;
            double eta = step0 / static_cast<double>(it);
            if (is_free[i]) X[i] -= eta * u;
            if (is_free[j]) X[j] += eta * u;
        }
        double global = max_violation_at(t, lengths, X);
        if (global < best_v) {
            best_v = global;
            best = X;
        }
        if (best_v <= 0.0) return pack(best_v);

        X = best;
        if (newton_polish(t, lengths, X, is_free, scale)) {
            int arg = -1;
            double polished = max_violation_at(t, lengths, X, &arg);
            if (polished < best_v) {
                best_v = polished;
                best = X;
            }
            if (best_v <= 0.0) return pack(best_v);
            // Converged when the binding edge survived the polish; otherwise a
            // previously slack edge took over the max and another round runs.
            auto [i, j] = t.edges[arg];
            double vb = (best[i] - best[j]).norm() - lengths[arg];
            if (vb >= best_v - 1e-9 * scale) break;
        } else {
            break;
        }
        X = best;
    }

    X = best;
    return pack(best_v);
}

namespace {

struct NMResult {
    VectorXd x;
    double f = 0.0;
};

NMResult nelder_mead(const std::function<double(const VectorXd&)>& f, const VectorXd& x0,
                     double spread, int max_evals) {
    int n = static_cast<int>(x0.size());
    int evals = 0;
    auto eval = [&](const VectorXd& x) {
        ++evals;
        return f(x);
    };

    std::vector<std::pair<double, VectorXd>> simplex;
    simplex.emplace_back(eval(x0), x0);
    for (int i = 0; i < n; ++i) {
        VectorXd x = x0;
        x(i) += spread;
        simplex.emplace_back(eval(x), x);
    }
    auto order = [&] {
        std::sort(simplex.begin(), simplex.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    };
    order();

    while (evals < max_evals) {
        double fb = simplex.front().first, fw = simplex.back().first;
        double diam = 0.0;
        for (int i = 1; i <= n; ++i)
            diam = std::max(diam, (simplex[static_cast<size_t>(i)].second - simplex[0].second)
                                      .lpNorm<Eigen::Infinity>());
        if (fw - fb <= 1e-13 * (1.0 + std::abs(fb)) && diam <= 1e-10) break;

        VectorXd c = VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) c += simplex[static_cast<size_t>(i)].second;
        c /= static_cast<double>(n);
        const VectorXd& xw = simplex.back().second;

        VectorXd xr = c + (c - xw);
        double fr = eval(xr);
        if (fr < simplex[0].first) {
            VectorXd xe = c + 2.0 * (c - xw);
            double fe = eval(xe);
            simplex.back() = fe < fr ? std::make_pair(fe, xe) : std::make_pair(fr, xr);
        } else if (fr < simplex[static_cast<size_t>(n - 1)].first) {
            simplex.back() = {fr, xr};
        } else {
            bool outside = fr < fw;
            VectorXd xc = outside ? c + 0.5 * (xr - c) : c + 0.5 * (xw - c);
            double fc = eval(xc);
            if (fc < (outside ? fr : fw)) {
                simplex.back() = {fc, xc};
            } else {
                for (int i = 1; i <= n; ++i) {
                    auto& [fi, xi] = simplex[static_cast<size_t>(i)];
                    xi = simplex[0].second + 0.5 * (xi - simplex[0].second);
                    fi = eval(xi);
                }
            }
        }
        order();
    }
    return {simplex[0].second, simplex[0].first};
}

std::vector<double> softmax_lengths(const VectorXd& z, double L) {
    int m = static_cast<int>(z.size()) + 1;
    double zmax = std::max(0.0, z.size() ? z.maxCoeff() : 0.0);
    std::vector<double> w(static_cast<size_t>(m));
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        double zi = i < m - 1 ? z(i) : 0.0;
        w[static_cast<size_t>(i)] = std::exp(zi - zmax);
        sum += w[static_cast<size_t>(i)];
    }
    for (auto& x : w) x *= L / sum;
    return w;
}

double evaluate_graph(const MetricGraph& g, Functional f) {
    if (f == Functional::Energy) return solve_energy(g).energy;
    // the secular scan cost grows like l_max/l_min: collapse near-degenerate
    // edges before the eigenvalue solve (merging two pins throws, which the
    // callers map to an unusable candidate)
    double L = total_length(g);
    double l_min = L;
    for (const auto& e : g.edges()) l_min = std::min(l_min, e.length);
    if (l_min >= 1e-5 * L) return lambda1(g).lambda1;
    MetricGraph h = contract_short_edges(g, 1e-5 * L);
    if (h.edges().empty()) throw GraphError("degenerate graph");
    return lambda1(h).lambda1;
}

VectorXd start_point(int m, double L, int seed) {
    (void)L;
    VectorXd z = VectorXd::Zero(m - 1);
    if (seed == 0) return z;  // equal lengths
    std::mt19937 rng(static_cast<unsigned>(seed));
    std::exponential_distribution<double> exp_dist(1.0);
    std::vector<double> g(static_cast<size_t>(m));
    for (auto& x : g) x = std::max(exp_dist(rng), 1e-6);
    for (int i = 0; i < m - 1; ++i) z(i) = std::log(g[static_cast<size_t>(i)] / g[static_cast<size_t>(m - 1)]);
    return z;
}

struct StartResult {
    std::vector<double> lengths;
    double score = std::numeric_limits<double>::infinity();
};

StartResult run_start(const Topology& t, const ProblemSpec& spec, const OptimizerOptions& opts,
                      int seed) {
    int m = t.edge_count();
    double L = spec.total_length;

    auto objective = [&](double c_quad, double c_lin) {
        return std::function<double(const VectorXd&)>([&t, &spec, &opts, c_quad, c_lin,
                                                       L](const VectorXd& z) {
            auto lens = softmax_lengths(z, L);
            double obj;
            try {
                MetricGraph g = contract_short_edges(to_metric_graph(t, lens), kMinEdgeLength);
                obj = evaluate_graph(g, spec.functional);
            } catch (const GraphError&) {
                return 1e100;
            }
            Placement p = feasibility(t, lens, spec.pins, opts.trial_feasibility_iterations);
            double v = std::max(0.0, p.max_violation);
            return obj + c_quad * v * v + c_lin * v;
        });
    };

    double c1 = 1e3 * L * L;
    double c2_lin = 1e4 * (1.0 + L) * (1.0 + L) * (1.0 + L);

    StartResult r;
    if (m == 1) {
        r.lengths = {L};
        r.score = objective(c1, c2_lin)(VectorXd::Zero(0));
        return r;
    }

    VectorXd z0 = start_point(m, L, seed);
    NMResult phase1 = nelder_mead(objective(c1, 0.0), z0, 0.4, opts.nelder_mead_max_evals);
    auto exact = objective(c1, c2_lin);
    NMResult phase2 = nelder_mead(exact, phase1.x, 0.05, opts.nelder_mead_max_evals);
    // fresh small simplex to recover from premature collapse at the penalty kink
    NMResult phase3 = nelder_mead(exact, phase2.x, 0.005, opts.nelder_mead_max_evals);
    const NMResult& final_phase = phase3.f < phase2.f ? phase3 : phase2;
    r.lengths = softmax_lengths(final_phase.x, L);
    r.score = final_phase.f;
    return r;
}

// Grow deficient lengths up to the placed distances, shrinking slack edges
// to restore the budget; the placement then realizes the lengths exactly.
bool repair_lengths(const Topology& t, std::vector<double>& lengths, const Placement& p) {
    int m = t.edge_count();
    std::vector<double> r(static_cast<size_t>(m));
    double need = 0.0;
    for (int e = 0; e < m; ++e) {
        r[static_cast<size_t>(e)] =
            (to_vec(p.positions[t.edges[e].first]) - to_vec(p.positions[t.edges[e].second])).norm();
        need += std::max(0.0, r[static_cast<size_t>(e)] - lengths[static_cast<size_t>(e)]);
    }
    if (need == 0.0) return true;
    double slack = 0.0;
    for (int e = 0; e < m; ++e)
        slack += std::max(0.0, lengths[static_cast<size_t>(e)] - r[static_cast<size_t>(e)]);
    if (slack < need) return false;
    double ratio = need / slack;
    for (int e = 0; e < m; ++e) {
        double le = lengths[static_cast<size_t>(e)], re = r[static_cast<size_t>(e)];
        lengths[static_cast<size_t>(e)] = le < re ? re : re + (le - re) * (1.0 - ratio);
    }
    return true;
}

Optimum finalize_lengths(const Topology& t, std::vector<double> lengths, const ProblemSpec& spec,
                         const OptimizerOptions& opts, int depth);
bool better_optimum(const Optimum& a, const Optimum& b);

// Local refinement around a candidate: moves the free vertices that anchor
// taut edges and ties those edge lengths to the placed distances, while the
// slack edges absorb the remaining budget. Nails tangency corners that the
// outer simplex search only approaches.
std::optional<std::vector<double>> length_polish(const Topology& t,
                                                 const std::vector<double>& lengths,
                                                 const ProblemSpec& spec, const Placement& p,
                                                 int max_evals) {
    double L = spec.total_length;
    double scale = 1.0 + L;
    int m = t.edge_count();
    int dim = spec.dimension;

    std::vector<VectorXd> X0;
    for (const auto& q : p.positions) X0.push_back(to_vec(q));

    std::vector<char> taut(static_cast<size_t>(m), 0);
    for (int e = 0; e < m; ++e) {
        double r = (X0[t.edges[e].first] - X0[t.edges[e].second]).norm();
        taut[static_cast<size_t>(e)] = r >= lengths[static_cast<size_t>(e)] - 1e-2 * scale;
    }
    std::vector<int> movable;
    std::vector<bool> is_mov(t.vertices.size(), false);
    for (int e = 0; e < m; ++e)
        if (taut[static_cast<size_t>(e)])
            for (int v : {t.edges[e].first, t.edges[e].second})
                if (t.vertices[static_cast<size_t>(v)].role != Topology::Role::Dirichlet &&
                    !is_mov[static_cast<size_t>(v)]) {
                    is_mov[static_cast<size_t>(v)] = true;
                    movable.push_back(v);
                }
    if (movable.empty()) return std::nullopt;

    std::vector<double> slack_w(static_cast<size_t>(m), 0.0);
    for (int e = 0; e < m; ++e)
        if (!taut[static_cast<size_t>(e)]) {
            double r = (X0[t.edges[e].first] - X0[t.edges[e].second]).norm();
            slack_w[static_cast<size_t>(e)] =
                std::max(lengths[static_cast<size_t>(e)] - r, 1e-6 * L);
        }

    auto assemble = [&](const VectorXd& z, std::vector<double>* out) -> double {
        std::vector<VectorXd> X = X0;
        for (size_t i = 0; i < movable.size(); ++i)
            X[static_cast<size_t>(movable[i])] =
                z.segment(static_cast<Eigen::Index>(i) * dim, dim);
        std::vector<double> l(static_cast<size_t>(m), 0.0);
        double taut_sum = 0.0, slack_r_sum = 0.0, w_sum = 0.0;
        for (int e = 0; e < m; ++e) {
            double r = (X[t.edges[e].first] - X[t.edges[e].second]).norm();
            if (taut[static_cast<size_t>(e)]) {
                l[static_cast<size_t>(e)] = r;
                taut_sum += r;
            } else {
                l[static_cast<size_t>(e)] = r;  // floor; the budget tops it up
                slack_r_sum += r;
                w_sum += slack_w[static_cast<size_t>(e)];
            }
        }
        double penalty = 0.0;
        if (w_sum > 0.0) {
            double extra = L - taut_sum - slack_r_sum;
            if (extra < 0.0) penalty += 1e8 * L * extra * extra;
            for (int e = 0; e < m; ++e)
                if (!taut[static_cast<size_t>(e)])
                    l[static_cast<size_t>(e)] +=
                        std::max(extra, 0.0) * slack_w[static_cast<size_t>(e)] / w_sum;
        } else {
            double miss = (taut_sum - L) / L;
            penalty += 1e8 * L * L * miss * miss;
            for (auto& x : l) x *= L / taut_sum;
        }
        double obj;
        try {
            MetricGraph g = contract_short_edges(to_metric_graph(t, l), kMinEdgeLength);
            obj = evaluate_graph(g, spec.functional);
        } catch (const GraphError&) {
            return 1e100;
        }
        if (out) *out = l;
        return obj + penalty;
    };

    VectorXd z0(static_cast<Eigen::Index>(movable.size()) * dim);
    for (size_t i = 0; i < movable.size(); ++i)
        z0.segment(static_cast<Eigen::Index>(i) * dim, dim) =
            X0[static_cast<size_t>(movable[i])];
    NMResult res = nelder_mead([&](const VectorXd& z) { return assemble(z, nullptr); }, z0,
                               1e-3 * scale, max_evals);
    std::vector<double> out;
    if (assemble(res.x, &out) >= 1e100) return std::nullopt;
    return out;
}

Optimum optimize_lengths_impl(const Topology& t, const ProblemSpec& spec,
                              const OptimizerOptions& opts, int depth) {
    int seeds = std::max(1, opts.seeds);
    std::vector<StartResult> results(static_cast<size_t>(seeds));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.parallel && depth == 0)
#endif
    for (int s = 0; s < seeds; ++s) results[static_cast<size_t>(s)] = run_start(t, spec, opts, s);

    int best = 0;
    for (int s = 1; s < seeds; ++s)
        if (results[static_cast<size_t>(s)].score < results[static_cast<size_t>(best)].score)
            best = s;
    return finalize_lengths(t, results[static_cast<size_t>(best)].lengths, spec, opts, depth);
}

Optimum finalize_lengths(const Topology& t, std::vector<double> lengths, const ProblemSpec& spec,
                         const OptimizerOptions& opts, int depth) {
    double L = spec.total_length;

    Placement p = feasibility(t, lengths, spec.pins, opts.feasibility_iterations);
    if (p.max_violation > 0.0 && p.max_violation <= 1e-2 * (1.0 + L)) {
        auto repaired = lengths;
        if (repair_lengths(t, repaired, p)) {
            Placement p2 = feasibility(t, repaired, spec.pins, opts.feasibility_iterations);
            if (p2.max_violation < p.max_violation) {
                lengths = repaired;
                p = p2;
            }
        }
    }

    if (p.feasible(L)) {
        auto objective_of = [&](const std::vector<double>& l) {
            return evaluate_graph(contract_short_edges(to_metric_graph(t, l), kMinEdgeLength),
                                  spec.functional);
        };
        double obj = objective_of(lengths);
        for (int pass = 0; pass < 2; ++pass) {
            auto refined = length_polish(t, lengths, spec, p, 40 * opts.nelder_mead_max_evals);
            if (!refined) break;
            double sum = 0.0;
            for (double l : *refined) sum += l;
            if (std::abs(sum - L) > 1e-9 * (1.0 + L)) break;
            Placement p2 = feasibility(t, *refined, spec.pins, opts.feasibility_iterations);
            if (!p2.feasible(L)) break;
            double obj2 = objective_of(*refined);
            if (obj2 > obj - 1e-15 * (1.0 + std::abs(obj))) break;
            lengths = *refined;
            p = p2;
            obj = obj2;
        }
    }

    Optimum opt;
    opt.topology = t;
    opt.lengths = lengths;
    opt.placement = p;
    opt.feasible = p.feasible(L);
    opt.graph = contract_short_edges(to_metric_graph(t, lengths), kMinEdgeLength);
    opt.objective = evaluate_graph(opt.graph, spec.functional);
    EnergySolution es = solve_energy(opt.graph);
    opt.audit = audit_optimality(opt.graph, es);
    opt.embeddability = embedding_check(opt, spec);

    // Pendant surgery: a Neumann pendant attached at the maximum of w has the
    // same first-order energy rate as slack on a pinned arm (-max w per unit
    // length), so near a topology crossover the two differ only at second
    // order and the simplex search settles on the slack variant. Build the
    // leaf candidate explicitly: make the skeleton taut, split it at the
    // maximum of its energy function and spend the slack on a pendant there.
    if (opt.feasible && spec.functional == Functional::Energy && !t.has_neumann_leaf() &&
        depth < 3) {
        int m = t.edge_count();
        std::vector<double> taut_l(static_cast<size_t>(m));
        double slack_total = 0.0;
        for (int e = 0; e < m; ++e) {
            double r = (to_vec(p.positions[t.edges[static_cast<size_t>(e)].first]) -
                        to_vec(p.positions[t.edges[static_cast<size_t>(e)].second]))
                           .norm();
            double le = lengths[static_cast<size_t>(e)];
            taut_l[static_cast<size_t>(e)] = std::min(le, r);
            slack_total += std::max(0.0, le - r);
        }
        if (slack_total > 1e-5 * L) {
            try {
                EnergySolution skel = solve_energy(to_metric_graph(t, taut_l));
                int max_edge = -1;
                double max_val = -1.0, max_x = 0.0;
                for (int e = 0; e < m; ++e) {
                    const auto& ed = skel.edge_data[static_cast<size_t>(e)];
                    if (ed.max_value > max_val) {
                        max_val = ed.max_value;
                        max_edge = e;
                        max_x = std::clamp(ed.slope_from_u, 0.0, ed.length);
                    }
                }
                Topology t2 = t;
                std::vector<double> l2 = taut_l;
                int leaf = static_cast<int>(t2.vertices.size());
                double el = taut_l[static_cast<size_t>(max_edge)];
                if (max_x > 1e-7 * L && max_x < el - 1e-7 * L) {
                    int hub = leaf++;
                    t2.vertices.push_back({Topology::Role::Kirchhoff, -1});
                    t2.vertices.push_back({Topology::Role::NeumannLeaf, -1});
                    auto [eu, ev] = t2.edges[static_cast<size_t>(max_edge)];
                    t2.edges[static_cast<size_t>(max_edge)] = {eu, hub};
                    t2.edges.emplace_back(hub, ev);
                    t2.edges.emplace_back(hub, leaf);
                    l2[static_cast<size_t>(max_edge)] = max_x;
                    l2.push_back(el - max_x);
                    l2.push_back(slack_total);
                } else {
                    // maximum sits at a vertex: hang the pendant off it
                    auto [eu, ev] = t2.edges[static_cast<size_t>(max_edge)];
                    int host = max_x <= 1e-7 * L ? eu : ev;
                    if (t2.vertices[static_cast<size_t>(host)].role ==
                        Topology::Role::Dirichlet)
                        host = -1;
                    if (host >= 0) {
                        t2.vertices.push_back({Topology::Role::NeumannLeaf, -1});
                        t2.edges.emplace_back(host, leaf);
                        l2.push_back(slack_total);
                    } else {
                        t2.edges.clear();
                    }
                }
                if (!t2.edges.empty() && t2.edge_count() > m) {
                    t2.canonical = canonical_code(t2);
                    Optimum cand = finalize_lengths(t2, l2, spec, opts, depth + 1);
                    if (cand.feasible && better_optimum(cand, opt)) return cand;
                }
            } catch (const GraphError&) {
                // degenerate skeleton: keep the leafless optimum
            }
        }
    }

    double lmin = *std::min_element(lengths.begin(), lengths.end());
    if (lmin < 1e-6 * L && depth < 3) {
        try {
            MetricGraph g2 =
                suppress_degree2(contract_short_edges(to_metric_graph(t, lengths), 1e-6 * L));
            Topology t2 = topology_of(g2);
            if (t2.edge_count() < t.edge_count()) {
                // same metric graph under the collapsed topology, rescaled to L
                std::vector<double> l2;
                double sum2 = 0.0;
                for (const auto& e : g2.edges()) sum2 += e.length;
                for (const auto& e : g2.edges()) l2.push_back(e.length * L / sum2);
                Optimum same = finalize_lengths(t2, l2, spec, opts, depth + 1);
                if (same.feasible && (!opt.feasible || same.objective <= opt.objective + 1e-12))
                    opt = std::move(same);
                Optimum alt = optimize_lengths_impl(t2, spec, opts, depth + 1);
                if (alt.feasible && (!opt.feasible || alt.objective <= opt.objective + 1e-12))
                    return alt;
            }
        } catch (const GraphError&) {
            // contraction merged two pins: the collapsed shape is inadmissible
        }
    }
    return opt;
}

bool better_optimum(const Optimum& a, const Optimum& b) {
    if (a.feasible != b.feasible) return a.feasible;
    if (std::abs(a.objective - b.objective) > 1e-9) return a.objective < b.objective;
    if (a.topology.edge_count() != b.topology.edge_count())
        return a.topology.edge_count() < b.topology.edge_count();
    return a.topology.canonical < b.topology.canonical;
}

}  // namespace

Optimum optimize_lengths(const Topology& t, const ProblemSpec& spec,
                         const OptimizerOptions& opts) {
    spec.check();
    return optimize_lengths_impl(t, spec, opts, 0);
}

Optimum optimize(const ProblemSpec& spec, const OptimizerOptions& opts) {
    spec.check();
    auto topologies = enumerate_topologies(spec.pin_count());
    int seeds = std::max(1, opts.seeds);

    struct Unit {
        int topology;
        int seed;
    };
    std::vector<Unit> units;
    for (int ti = 0; ti < static_cast<int>(topologies.size()); ++ti)
        for (int s = 0; s < seeds; ++s) units.push_back({ti, s});

    std::vector<StartResult> results(units.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
#endif
    for (int u = 0; u < static_cast<int>(units.size()); ++u)
        results[static_cast<size_t>(u)] =
            run_start(topologies[static_cast<size_t>(units[static_cast<size_t>(u)].topology)],
                      spec, opts, units[static_cast<size_t>(u)].seed);

    std::optional<Optimum> winner;
    for (int ti = 0; ti < static_cast<int>(topologies.size()); ++ti) {
        int best = -1;
        for (int u = 0; u < static_cast<int>(units.size()); ++u)
            if (units[static_cast<size_t>(u)].topology == ti &&
                (best < 0 || results[static_cast<size_t>(u)].score <
                                 results[static_cast<size_t>(best)].score))
                best = u;
        Optimum cand = finalize_lengths(topologies[static_cast<size_t>(ti)],
                                        results[static_cast<size_t>(best)].lengths, spec, opts, 0);
        if (!winner || better_optimum(cand, *winner)) winner = std::move(cand);
    }
    if (!winner || !winner->feasible)
        throw InfeasibleError("total length below Steiner feasibility");
    return *winner;
}

namespace {

double point_segment_distance(const VectorXd& p, const VectorXd& a, const VectorXd& b) {
    VectorXd ab = b - a;
    double den = ab.squaredNorm();
    double s = den > 0.0 ? std::clamp((p - a).dot(ab) / den, 0.0, 1.0) : 0.0;
    return (p - (a + s * ab)).norm();
}

double segment_segment_distance(const VectorXd& a, const VectorXd& b, const VectorXd& c,
                                const VectorXd& d) {
    double best = std::numeric_limits<double>::infinity();
    // 2D proper crossing
    if (a.size() == 2) {
        auto cross = [](const VectorXd& u, const VectorXd& v) { return u(0) * v(1) - u(1) * v(0); };
        double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
        double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
        if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return 0.0;
    }
    int steps = 32;
    for (int i = 0; i <= steps; ++i) {
        double s = static_cast<double>(i) / steps;
        best = std::min(best, point_segment_distance(a + s * (b - a), c, d));
        best = std::min(best, point_segment_distance(c + s * (d - c), a, b));
    }
    return best;
}

}  // namespace

Embeddability embedding_check(const Optimum& opt, const ProblemSpec& spec) {
    const Topology& t = opt.topology;
    double L = spec.total_length;
    double tol = 1e-7 * (1.0 + L);
    int n = static_cast<int>(t.vertices.size());

    std::vector<VectorXd> X;
    for (const auto& p : opt.placement.positions) X.push_back(to_vec(p));

    std::vector<int> taut, slack;
    for (int e = 0; e < t.edge_count(); ++e) {
        double r = (X[t.edges[e].first] - X[t.edges[e].second]).norm();
        (r >= opt.lengths[static_cast<size_t>(e)] - tol ? taut : slack).push_back(e);
    }

    std::vector<bool> anchored(n, false);
    for (int v = 0; v < n; ++v)
        if (t.vertices[v].role == Topology::Role::Dirichlet) anchored[v] = true;
    for (int e : taut) {
        anchored[t.edges[e].first] = true;
        anchored[t.edges[e].second] = true;
    }

    // Anchored vertices must be distinct points.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (anchored[i] && anchored[j] && (X[i] - X[j]).norm() < 1e-9)
                return Embeddability::ImmersionOnly;

    // No anchored vertex inside a taut segment; taut segments non-crossing.
    for (int e : taut) {
        auto [a, b] = t.edges[e];
        for (int v = 0; v < n; ++v)
            if (anchored[v] && v != a && v != b &&
                point_segment_distance(X[v], X[a], X[b]) < 1e-9)
                return Embeddability::ImmersionOnly;
    }
    for (size_t i = 0; i < taut.size(); ++i)
        for (size_t j = i + 1; j < taut.size(); ++j) {
            auto [a, b] = t.edges[taut[i]];
            auto [c, d] = t.edges[taut[j]];
            if (a == c || a == d || b == c || b == d) continue;  // endpoint overlap caught above
            if (segment_segment_distance(X[a], X[b], X[c], X[d]) < 1e-9)
                return Embeddability::ImmersionOnly;
        }

    if (slack.empty()) return Embeddability::Embeddable;
    if (spec.dimension == 1) return Embeddability::ImmersionOnly;
    if (spec.dimension >= 3) return Embeddability::Embeddable;

    // A slack edge routes as a detour arc when its anchored endpoints share a
    // supporting half-plane free of the taut skeleton.
    std::vector<VectorXd> skeleton;
    for (int v = 0; v < n; ++v)
        if (anchored[v]) skeleton.push_back(X[v]);
    for (int e : slack) {
        std::vector<VectorXd> ends;
        for (int v : {t.edges[e].first, t.edges[e].second})
            if (anchored[v]) ends.push_back(X[v]);
        if (ends.empty()) continue;
        bool routable = false;
        for (int a = 0; a < 720 && !routable; ++a) {
            double theta = 2.0 * M_PI * a / 720.0;
            VectorXd nrm(2);
            nrm << std::cos(theta), std::sin(theta);
            double h = -std::numeric_limits<double>::infinity();
            for (const auto& p : skeleton) h = std::max(h, nrm.dot(p));
            routable = true;
            for (const auto& q : ends)
                if (nrm.dot(q) < h - 1e-6 * (1.0 + L)) routable = false;
        }
        if (!routable) return Embeddability::ImmersionOnly;
    }
    return Embeddability::Embeddable;
}

MetricGraph suppress_degree2(const MetricGraph& g) {
    std::vector<Vertex> verts = g.vertices();
    std::vector<Edge> edges = g.edges();
    bool changed = true;
    while (changed) {
        changed = false;
        std::map<VertexId, std::vector<size_t>> incident;
        for (size_t i = 0; i < edges.size(); ++i) {
            incident[edges[i].u].push_back(i);
            incident[edges[i].v].push_back(i);
        }
        for (const auto& v : verts) {
            if (v.role.is_dirichlet()) continue;
            auto it = incident.find(v.id);
            if (it == incident.end() || it->second.size() != 2) continue;
            const Edge& e1 = edges[it->second[0]];
            const Edge& e2 = edges[it->second[1]];
            VertexId a = e1.u == v.id ? e1.v : e1.u;
            VertexId b = e2.u == v.id ? e2.v : e2.u;
            if (a == b) continue;
            Edge merged{e1.id, a, b, e1.length + e2.length};
            std::vector<Edge> next;
            for (size_t i = 0; i < edges.size(); ++i)
                if (i != it->second[0] && i != it->second[1]) next.push_back(edges[i]);
            next.push_back(merged);
            edges = std::move(next);
            verts.erase(std::find_if(verts.begin(), verts.end(),
                                     [&](const Vertex& w) { return w.id == v.id; }));
            changed = true;
            break;
        }
    }
    for (size_t i = 0; i < edges.size(); ++i) edges[i].id = static_cast<EdgeId>(i);
    return MetricGraph(std::move(verts), std::move(edges));
}

std::pair<double, double> compare_example42(int n) {
    if (n < 2) throw GraphError("compare_example42: n must be >= 2");
    double nn = static_cast<double>(n);

    MetricGraph star({{0, VertexRole::dirichlet(0)},
                      {1, VertexRole::dirichlet(1)},
                      {2, VertexRole::dirichlet(2)},
                      {3, VertexRole::free_vertex()}},
                     {{0, 0, 3, 1.0}, {1, 1, 3, 1.0}, {2, 2, 3, nn}});

    double half = (nn - 1.0) / 2.0;
    MetricGraph chain({{0, VertexRole::dirichlet(0)},
                       {1, VertexRole::dirichlet(1)},
                       {2, VertexRole::dirichlet(2)},
                       {3, VertexRole::free_vertex()},
                       {4, VertexRole::free_vertex()}},
                      {{0, 0, 1, 2.0}, {1, 1, 3, half}, {2, 3, 2, half}, {3, 3, 4, 1.0}});

    return {solve_energy(star).energy, solve_energy(chain).energy};
}

}  // namespace graphopt
