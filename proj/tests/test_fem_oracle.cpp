#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "graphopt/dirichlet_energy.hpp"
#include "graphopt/fem_oracle.hpp"

using namespace graphopt;

namespace {

MetricGraph segment(bool both_dirichlet, double l = 1.0) {
    return MetricGraph({{0, VertexRole::dirichlet(0)},
                        {1, both_dirichlet ? VertexRole::dirichlet(1) : VertexRole::free_vertex()}},
                       {{0, 0, 1, l}});
}

MetricGraph t_graph() {
    return MetricGraph({{1, VertexRole::dirichlet(0)},
                        {2, VertexRole::dirichlet(1)},
                        {3, VertexRole::free_vertex()},
                        {4, VertexRole::free_vertex()}},
                       {{0, 1, 3, 0.5}, {1, 2, 3, 0.5}, {2, 3, 4, 1.0}});
}

}  // namespace

TEST_CASE("coarse segment value is exact") {
    CHECK(fem_energy(segment(false), 2) == doctest::Approx(-0.15625).epsilon(1e-14));
}

TEST_CASE("conformity: discrete energy bounds the exact one from above") {
    for (auto g : {segment(false), segment(true), t_graph()}) {
        double exact = solve_energy(g).energy;
        for (int n : {2, 8, 32}) CHECK(fem_energy(g, n) >= exact - 1e-13);
    }
}

TEST_CASE("energy converges at the Richardson rate 4") {
    for (auto g : {segment(false), t_graph()}) {
        double exact = solve_energy(g).energy;
        double e64 = fem_energy(g, 64), e128 = fem_energy(g, 128);
        double ratio = (e64 - exact) / (e128 - exact);
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("discrete eigenvalue bounds and converges") {
    auto g = segment(false);
    double exact = M_PI * M_PI / 4.0;
    double l64 = fem_lambda1(g, 64), l128 = fem_lambda1(g, 128);
    CHECK(l64 >= exact);
    CHECK(l128 >= exact);
    CHECK(l128 - exact < l64 - exact);
    double ratio = (l64 - exact) / (l128 - exact);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("rearrangement onto the segment never increases the energy") {
    // one-Dirichlet trees, as in the symmetrization argument
    MetricGraph star({{0, VertexRole::dirichlet(0)},
                      {1, VertexRole::free_vertex()},
                      {2, VertexRole::free_vertex()},
                      {3, VertexRole::free_vertex()}},
                     {{0, 0, 1, 0.6}, {1, 1, 2, 0.7}, {2, 1, 3, 0.4}});
    for (auto g : {segment(false), star}) {
        auto r = rearrangement_check(g);
        CHECK(r.ok);
        CHECK(r.segment_energy <= r.graph_energy + 1e-6);
    }
}

TEST_CASE("rearrangement of a segment is an identity up to grid error") {
    auto r = rearrangement_check(segment(false));
    CHECK(r.segment_energy == doctest::Approx(r.graph_energy).epsilon(1e-6));
}
