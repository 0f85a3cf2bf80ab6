#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hb/projective.hpp"
#include "hb/rng.hpp"

#include <cmath>

using namespace hb;

namespace {

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

// Direct affine formula in a chart containing all four points: the oracle
// the cross-ratio implementation must reproduce.
double cross_ratio_affine_oracle(const AffineChart& chart, const ProjPoint& p,
                                 const ProjPoint& x, const ProjPoint& y, const ProjPoint& q) {
    Vec cp = chart.project(p), cx = chart.project(x), cy = chart.project(y),
        cq = chart.project(q);
    return ((cp - cy).norm() * (cq - cx).norm()) / ((cp - cx).norm() * (cq - cy).norm());
}

ProjMap random_map(Rng& rng, int n1, double cond_limit = 50.0) {
    while (true) {
        Mat m(n1, n1);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n1; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
        if (std::abs(m.determinant()) < 1e-3) continue;
        Eigen::JacobiSVD<Mat> svd(m);
        if (svd.singularValues()[0] / svd.singularValues()[n1 - 1] > cond_limit) continue;
        if (n1 % 2 == 0 && m.determinant() < 0) m.row(0) *= -1.0;
        return ProjMap::from_matrix(m);
    }
}

struct Quadruple {
    ProjPoint p, x, y, q;
};

Quadruple random_collinear(Rng& rng, int n1) {
    Vec a(n1), b(n1);
    while (true) {
        for (int i = 0; i < n1; ++i) {
            a[i] = rng.uniform(-1.0, 1.0);
            b[i] = rng.uniform(-1.0, 1.0);
        }
        if (a.norm() < 0.1 || b.norm() < 0.1) continue;
        double ts[4];
        for (double& t : ts) t = rng.uniform(-2.0, 2.0);
        if (std::abs(ts[0] - ts[1]) < 0.1 || std::abs(ts[3] - ts[2]) < 0.1) continue;
        Quadruple quad{ProjPoint(a + ts[0] * b), ProjPoint(a + ts[1] * b),
                       ProjPoint(a + ts[2] * b), ProjPoint(a + ts[3] * b)};
        return quad;
    }
}

} // namespace

TEST_CASE("canonical representatives") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        Vec v(4);
        for (int k = 0; k < 4; ++k) v[k] = rng.uniform(-1, 1);
        if (v.norm() < 1e-3) continue;
        double lambda = rng.uniform(-3.0, 3.0);
        if (std::abs(lambda) < 0.05) continue;
        Vec c1 = canonical_rep(v);
        Vec c2 = canonical_rep(lambda * v);
        CHECK((c1 - c2).norm() < 1e-12);
        CHECK(std::abs(c1.norm() - 1.0) < 1e-12);
        CHECK((canonical_rep(c1) - c1).norm() < 1e-15); // idempotent after first pass
    }
    CHECK_THROWS_AS(canonical_rep(Vec::Zero(3)), Error);
}

TEST_CASE("projective maps normalize to determinant one") {
    Rng rng(11);
    for (int n1 : {3, 4, 5}) {
        for (int i = 0; i < 20; ++i) {
            ProjMap g = random_map(rng, n1);
            CHECK(g.mat.determinant() == doctest::Approx(1.0).epsilon(1e-9));
            Mat should_be_id = g.compose(g.inverse()).mat;
            CHECK((should_be_id - Mat::Identity(n1, n1)).norm() < 1e-9);
        }
    }
}

TEST_CASE("apply_map commutes with canonicalization and composition") {
    ProjPoint x(vec3(0.3, -0.2, 1.0));
    CHECK(points_equal(ProjMap::identity(3).apply(x), x));

    // diag(e^{2t}, e^{-t}, e^{-t}) fixes the e1 direction.
    double t = 0.1;
    Mat a = Vec(vec3(std::exp(2 * t), std::exp(-t), std::exp(-t))).asDiagonal();
    ProjPoint e1(vec3(1, 0, 0));
    CHECK(points_equal(ProjMap::from_matrix(a).apply(e1), e1));

    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        ProjMap g = random_map(rng, 3), h = random_map(rng, 3);
        Vec v = vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        if (v.norm() < 1e-2) continue;
        ProjPoint p(v);
        CHECK(points_equal(g.compose(h).apply(p), g.apply(h.apply(p)), 1e-9));
    }
}

TEST_CASE("chart projection") {
    AffineChart chart = AffineChart::standard(2);
    Vec y = chart.project(ProjPoint(vec3(0.3, -0.4, 1.0)));
    CHECK(y[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-0.4).epsilon(1e-12));
    CHECK_THROWS_AS(chart.project(ProjPoint(vec3(1, 0, 0))), Error);

    Rng rng(17);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        Vec a(2);
        a << rng.uniform(-5, 5), rng.uniform(-5, 5);
        Vec back = chart.project(chart.embed(a));
        worst = std::max(worst, (back - a).norm());
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("cross ratio on affine points") {
    AffineChart chart = AffineChart::standard(2);
    auto pt = [&](double t) {
        Vec a(2);
        a << t, 0.0;
        return chart.embed(a);
    };
    CHECK(cross_ratio(pt(0), pt(1), pt(2), pt(4)) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(cross_ratio(pt(0), pt(1), pt(1), pt(4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(cross_ratio(pt(0), pt(0), pt(2), pt(4)), Error);

    ProjPoint off(vec3(0.5, 1.0, 1.0));
    CHECK_THROWS_AS(cross_ratio(pt(0), pt(1), off, pt(4)), Error);
}

TEST_CASE("cross ratio equals the chart formula and is projectively invariant") {
    Rng rng(23);
    AffineChart std2 = AffineChart::standard(2);
    double worst_inv = 0;
    int checked = 0;
    for (int i = 0; i < 1200; ++i) {
        Quadruple quad = random_collinear(rng, 3);
        double cr;
        try {
            cr = cross_ratio(quad.p, quad.x, quad.y, quad.q);
        } catch (const Error&) {
            continue;
        }
        // Oracle: the defining affine formula, whenever all four points are
        // visible in the standard chart.
        try {
            double oracle = cross_ratio_affine_oracle(std2, quad.p, quad.x, quad.y, quad.q);
            CHECK(cr == doctest::Approx(oracle).epsilon(1e-8));
        } catch (const Error&) {
        }
        ProjMap g = random_map(rng, 3);
        double cr_g = cross_ratio(g.apply(quad.p), g.apply(quad.x), g.apply(quad.y),
                                  g.apply(quad.q));
        worst_inv = std::max(worst_inv, std::abs(cr - cr_g) / std::max(1.0, cr));
        ++checked;
    }
    CHECK(checked > 1000);
    CHECK(worst_inv < 1e-9);
}

TEST_CASE("pole of a hyperplane") {
    Mat q = Vec(vec3(1, 1, -1)).asDiagonal();

    ProjPoint p1 = pole(ProjHyperplane(vec3(1, 0, 0)), q);
    CHECK(points_equal(p1, ProjPoint(vec3(1, 0, 0))));

    // H = {x1 = 0.5 x3}: affine pole (2, 0), outside the disk.
    ProjPoint p2 = pole(ProjHyperplane(vec3(1, 0, -0.5)), q);
    AffineChart chart = AffineChart::standard(2);
    Vec y = chart.project(p2);
    CHECK(y[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(0.0).epsilon(1e-12));

    // Oracle: the tangent lines from (2,0) touch the unit circle exactly at
    // H ∩ ∂disk = (0.5, ±sqrt(0.75)); tangency means radius ⊥ segment to pole.
    for (double sign : {1.0, -1.0}) {
        Vec touch(2);
        touch << 0.5, sign * std::sqrt(0.75);
        CHECK(std::abs(touch.squaredNorm() - 1.0) < 1e-12); // on the circle and on H
        CHECK(std::abs(touch.dot(y - touch)) < 1e-12);
    }

    // Tangent hyperplane has its pole on the quadric.
    CHECK_THROWS_AS(pole(ProjHyperplane(vec3(1, 0, -1)), q), Error);
    CHECK_THROWS_AS(pole(ProjHyperplane(vec3(1, 0, 0)), Mat(Mat::Zero(3, 3))), Error);
}

TEST_CASE("pole is equivariant and polarity is involutive") {
    Mat q = Vec(vec3(1, 1, -1)).asDiagonal();
    Rng rng(29);
    for (int i = 0; i < 100; ++i) {
        ProjHyperplane h(vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
        ProjPoint p;
        try {
            p = pole(h, q);
        } catch (const Error&) {
            continue;
        }
        CHECK(hyperplanes_equal(polar(p, q), h, 1e-9));

        ProjMap g = random_map(rng, 3);
        Mat gi = g.inverse().mat;
        Mat q_g = gi.transpose() * q * gi;
        ProjHyperplane h_g(gi.transpose() * h.covector);
        CHECK(points_equal(pole(h_g, q_g), g.apply(p), 1e-9));
    }
}
