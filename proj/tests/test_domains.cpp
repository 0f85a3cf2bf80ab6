#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hb/convex.hpp"

#include <cmath>

using namespace hb;

namespace {

Mat klein_form() {
    Vec d(3);
    d << 1, 1, -1;
    return Mat(d.asDiagonal());
}

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Polytope unit_square() {
    return Polytope::box(v2(-1, -1), v2(1, 1));
}

} // namespace

TEST_CASE("quadric domain construction and containment") {
    QuadricDomain disk(klein_form(), AffineChart::standard(2));
    CHECK(disk.classify(disk.chart().embed(v2(0, 0))).interior());
    CHECK(disk.classify(disk.chart().embed(v2(1, 0))).boundary());
    CHECK(disk.classify(disk.chart().embed(v2(2, 0))).exterior());

    // Signature must be exactly (n,1).
    CHECK_THROWS_AS(QuadricDomain(Mat(Mat::Identity(3, 3))), Error);
    Vec d(3);
    d << 1, -1, -1;
    CHECK_THROWS_AS(QuadricDomain(Mat(d.asDiagonal())), Error);
}

TEST_CASE("quadric chord in closed form") {
    QuadricDomain disk(klein_form(), AffineChart::standard(2));
    ProjPoint center = disk.chart().embed(v2(0, 0));
    auto [pm, pp] = disk.ray_boundary(center, v2(1, 0));
    CHECK((disk.chart().project(pm) - v2(-1, 0)).norm() < 1e-12);
    CHECK((disk.chart().project(pp) - v2(1, 0)).norm() < 1e-12);

    CHECK_THROWS_AS(disk.ray_boundary(disk.chart().embed(v2(2, 0)), v2(1, 0)), Error);
}

TEST_CASE("polytope chord by clipping") {
    Polytope square = unit_square();
    ProjPoint center = square.chart().embed(v2(0, 0));
    auto [pm, pp] = square.ray_boundary(center, v2(1, 1) / std::sqrt(2.0));
    CHECK((square.chart().project(pm) - v2(-1, -1)).norm() < 1e-12);
    CHECK((square.chart().project(pp) - v2(1, 1)).norm() < 1e-12);

    CHECK(square.classify(square.chart().embed(v2(0.999, 0))).interior());
    CHECK(square.classify(square.chart().embed(v2(1, 0.2))).boundary());
    CHECK(square.classify(square.chart().embed(v2(1.5, 0))).exterior());

    // Unbounded half-space sets are rejected.
    std::vector<std::pair<Vec, double>> open_slab;
    open_slab.emplace_back(v2(1, 0), 1.0);
    open_slab.emplace_back(v2(-1, 0), 1.0);
    CHECK_THROWS_AS(Polytope(open_slab, AffineChart::standard(2)), Error);
}

TEST_CASE("polytope from hyperplane-side pairs") {
    AffineChart chart = AffineChart::standard(2);
    std::vector<std::pair<ProjHyperplane, int>> walls;
    auto plane = [](double a, double b, double c) {
        Vec v(3);
        v << a, b, c;
        return ProjHyperplane(v);
    };
    // x <= 1, -x <= 1, y <= 1, -y <= 1 written as side * <cov, lift> <= 0.
    walls.emplace_back(plane(1, 0, -1), 1);
    walls.emplace_back(plane(1, 0, 1), -1);
    walls.emplace_back(plane(0, 1, -1), 1);
    walls.emplace_back(plane(0, 1, 1), -1);
    Polytope p(walls, chart);
    CHECK(p.classify(chart.embed(v2(0.5, -0.5))).interior());
    CHECK(p.classify(chart.embed(v2(1.2, 0))).exterior());
}

TEST_CASE("chord endpoints are boundary points collinear with the base point") {
    QuadricDomain disk(klein_form(), AffineChart::standard(2));
    Polytope square = unit_square();
    Rng rng(101);
    for (const ConvexDomain* dom :
         std::initializer_list<const ConvexDomain*>{&disk, &square}) {
        for (int i = 0; i < 200; ++i) {
            ProjPoint x = dom->sample_interior(rng);
            auto [pm, pp] = dom->ray_boundary(x, rng.direction(2));
            CHECK(!dom->classify(pm).interior());
            CHECK(!dom->classify(pp).interior());
            CHECK(!dom->classify(pm).exterior());
            CHECK(!dom->classify(pp).exterior());
            CHECK(collinearity_residual(pm, x, x, pp) < 1e-9);
        }
    }
}

TEST_CASE("strict convexity probe separates round from flat boundaries") {
    QuadricDomain disk(klein_form(), AffineChart::standard(2));
    auto disk_violations = strict_convexity_probe(disk, 10000, 4242);
    CHECK(disk_violations.empty());

    Polytope square = unit_square();
    auto square_violations = strict_convexity_probe(square, 10000, 4242);
    CHECK(square_violations.size() >= 1);
}

TEST_CASE("pencil members are internally tangent nested quadrics") {
    QuadricDomain disk(klein_form(), AffineChart::standard(2));
    ProjPoint p = disk.chart().embed(v2(1, 0));

    QuadricDomain same = pencil_ellipsoid(disk, p, 0.0);
    Rng rng(55);
    for (int i = 0; i < 200; ++i) {
        ProjPoint x = disk.chart().embed(v2(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)));
        CHECK(disk.classify(x).region == same.classify(x).region);
    }

    QuadricDomain inner = pencil_ellipsoid(disk, p, 0.8);
    // Tangency: p is on both boundaries and the tangent hyperplanes agree.
    CHECK(inner.classify(p).boundary());
    CHECK(hyperplanes_equal(polar(p, inner.form()), polar(p, disk.form()), 1e-9));

    // Inner member boundary stays inside the closed disk, and chord endpoint
    // pairs of the inner domain stay inside the outer closure.
    for (int i = 0; i < 300; ++i) {
        ProjPoint x = inner.sample_interior(rng);
        auto [qm, qp] = inner.ray_boundary(x, rng.direction(2));
        CHECK(!disk.classify(qm).exterior());
        CHECK(!disk.classify(qp).exterior());
    }

    CHECK_THROWS_AS(pencil_ellipsoid(disk, disk.chart().embed(v2(0.5, 0)), 0.4), Error);
}

TEST_CASE("transformed quadric is the image domain") {
    QuadricDomain disk(klein_form(), AffineChart::standard(2));
    Mat m(3, 3);
    m << 1.1, 0.2, 0.05, -0.1, 0.9, 0.0, 0.03, 0.01, 1.0;
    ProjMap g = ProjMap::from_matrix(m);
    QuadricDomain image = disk.transformed(g);
    Rng rng(77);
    for (int i = 0; i < 300; ++i) {
        ProjPoint x = disk.sample_interior(rng);
        CHECK(image.classify(g.apply(x)).interior());
        auto [pm, pp] = disk.ray_boundary(x, rng.direction(2));
        CHECK(image.classify(g.apply(pp)).boundary());
    }
}
