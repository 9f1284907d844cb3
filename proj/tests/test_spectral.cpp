#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "graphopt/fem_oracle.hpp"
#include "graphopt/spectral.hpp"

using namespace graphopt;

namespace {

MetricGraph segment(bool both_dirichlet, double l = 1.0) {
    return MetricGraph({{0, VertexRole::dirichlet(0)},
                        {1, both_dirichlet ? VertexRole::dirichlet(1) : VertexRole::free_vertex()}},
                       {{0, 0, 1, l}});
}

MetricGraph star3(double l1, double l2, double l3) {
    return MetricGraph({{0, VertexRole::dirichlet(0)},
                        {1, VertexRole::dirichlet(1)},
                        {2, VertexRole::dirichlet(2)},
                        {3, VertexRole::free_vertex()}},
                       {{0, 0, 3, l1}, {1, 1, 3, l2}, {2, 2, 3, l3}});
}

}  // namespace

TEST_CASE("one-Dirichlet unit segment: lambda1 = pi^2/4") {
    auto s = lambda1(segment(false));
    CHECK(s.lambda1 == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-11));
    CHECK(s.k1 == doctest::Approx(M_PI / 2.0).epsilon(1e-11));
}

TEST_CASE("two-Dirichlet unit segment resolves through the edge resonance") {
    auto s = lambda1(segment(true));
    CHECK(s.lambda1 == doctest::Approx(M_PI * M_PI).epsilon(1e-11));
}

TEST_CASE("symmetric 3-star eigenvalue") {
    // junction value is free; 3 cot(k) = 0 at k = pi/2
    auto s = lambda1(star3(1, 1, 1));
    CHECK(s.lambda1 == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-11));
}

TEST_CASE("secular matrix entries") {
    auto m = secular_matrix(star3(1, 1, 1), 1.0);
    REQUIRE(m.free_vertices.size() == 1);
    CHECK(m.matrix(0, 0) == doctest::Approx(3.0 / std::tan(1.0)).epsilon(1e-12));

    MetricGraph path({{0, VertexRole::dirichlet(0)},
                      {1, VertexRole::free_vertex()},
                      {2, VertexRole::free_vertex()}},
                     {{0, 0, 1, 1.0}, {1, 1, 2, 0.5}});
    auto m2 = secular_matrix(path, 1.0);
    REQUIRE(m2.free_vertices.size() == 2);
    CHECK(m2.matrix(0, 1) == doctest::Approx(-1.0 / std::sin(0.5)).epsilon(1e-12));
    CHECK(m2.matrix(0, 0) ==
          doctest::Approx(1.0 / std::tan(1.0) + 1.0 / std::tan(0.5)).epsilon(1e-12));
}

TEST_CASE("secular matrix throws at a resonance") {
    CHECK_THROWS_AS(secular_matrix(segment(false), M_PI), SecularResonance);
    CHECK_THROWS_AS(secular_matrix(segment(false), -1.0), GraphError);
}

TEST_CASE("inverse-square scaling") {
    auto g = star3(1.0, 0.7, 1.4);
    double l1 = lambda1(g).lambda1;
    double l2 = lambda1(scale_lengths(g, 2.0)).lambda1;
    CHECK(l2 == doctest::Approx(l1 / 4.0).epsilon(1e-9));
}

TEST_CASE("eigenfunction trace is L2-normalized on the segment") {
    auto s = lambda1(segment(false));
    // u(x) = sqrt(2) sin(pi x / 2) has unit norm; the free endpoint carries sqrt(2)
    CHECK(std::abs(s.vertex_values.at(1)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    CHECK(s.vertex_values.at(0) == doctest::Approx(0.0));
}

TEST_CASE("FEM eigenvalue is an upper bound and converges at rate 4") {
    auto g = star3(1, 1, 2);
    double exact = lambda1(g).lambda1;
    double h64 = fem_lambda1(g, 64);
    double h128 = fem_lambda1(g, 128);
    CHECK(h64 >= exact - 1e-12);
    CHECK(h128 >= exact - 1e-12);
    double ratio = (h64 - exact) / (h128 - exact);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("lambda1 requires a Dirichlet vertex") {
    MetricGraph g({{0, VertexRole::free_vertex()}, {1, VertexRole::free_vertex()}},
                  {{0, 0, 1, 1.0}});
    CHECK_THROWS_AS(lambda1(g), GraphError);
}

TEST_CASE("minimum over both mechanisms") {
    auto make = [](double pendant) {
        return MetricGraph({{0, VertexRole::dirichlet(0)},
                            {1, VertexRole::dirichlet(1)},
                            {2, VertexRole::free_vertex()}},
                           {{0, 0, 1, 0.2}, {1, 1, 2, pendant}});
    };
    // long pendant: the vertex-supported mode wins
    CHECK(lambda1(make(5.0)).lambda1 ==
          doctest::Approx(std::pow(M_PI / 10.0, 2)).epsilon(1e-9));
    // short pendant: the pinned-edge resonance wins
    CHECK(lambda1(make(0.05)).lambda1 ==
          doctest::Approx(std::pow(M_PI / 0.2, 2)).epsilon(1e-9));
}
