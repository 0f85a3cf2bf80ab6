#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hb/groups.hpp"
#include "hb/hilbert.hpp"

#include <cmath>

using namespace hb;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Mat minkowski3() {
    Vec d(3);
    d << 1, 1, -1;
    return Mat(d.asDiagonal());
}

// Oracle: 2x2 integer arithmetic for the commutator of the standard pair.
Mat sl2_commutator(const Mat& a, const Mat& b) {
    return a * b * a.inverse() * b.inverse();
}

} // namespace

TEST_CASE("word parsing, inversion, associativity of evaluation") {
    Word w = parse_word("A B A^-1 B^-1");
    CHECK(w.size() == 4);
    CHECK(word_to_string(w) == "A B A^-1 B^-1");
    CHECK(word_to_string(parse_word("a b")) == "A^-1 B^-1");
    CHECK(word_to_string(inverse_word(parse_word("A B"))) == "B^-1 A^-1");
    CHECK(parse_word("A^3").size() == 3);

    PuncturedTorus pt = punctured_torus_rep();
    Rng rng(41);
    for (int i = 0; i < 50; ++i) {
        Word w1 = random_reduced_word(pt.rep.generators, 6, rng);
        ProjMap whole = pt.rep.evaluate(w1);
        int split = rng.uniform_int(1, 5);
        Word head(w1.begin(), w1.begin() + split), tail(w1.begin() + split, w1.end());
        ProjMap parts = pt.rep.evaluate(head).compose(pt.rep.evaluate(tail));
        CHECK((whole.mat - parts.mat).norm() < 1e-9 * std::max(1.0, whole.mat.norm()));
    }
}

TEST_CASE("punctured torus representation") {
    PuncturedTorus pt = punctured_torus_rep();

    // The SL(2) commutator has trace exactly -2 (parabolic commutator).
    Mat comm2 = sl2_commutator(pt.sl2_a, pt.sl2_b);
    CHECK(comm2.trace() == -2.0);

    // Images preserve the Minkowski form to machine precision.
    for (const auto& name : pt.rep.generators) {
        const Mat& g = pt.rep.images.at(name).mat;
        CHECK((g.transpose() * pt.base_form * g - pt.base_form).norm() < 1e-12);
        CHECK(so_q_membership(pt.rep.images.at(name), pt.base_form));
    }

    // Orbit of the disk center stays in the disk.
    QuadricDomain disk(pt.base_form, AffineChart::standard(2));
    ProjPoint center = disk.chart().embed(v2(0, 0));
    Rng rng(43);
    for (int i = 0; i < 1000; ++i) {
        Word w = random_reduced_word(pt.rep.generators, rng.uniform_int(1, 6), rng);
        // Long words drive the center exponentially close to the circle, so
        // the verdict may fall in the boundary band; it must never be exterior.
        CHECK(!disk.classify(pt.rep.evaluate(w).apply(center)).exterior());
    }

    // Wall data: the pole is the remaining eigendirection and the Q-dual.
    CHECK(points_equal(pt.wall_pole, pole(pt.wall, pt.base_form), 1e-9));
    CHECK(disk.classify(pt.wall_pole).exterior());
    // rho(A) preserves the wall.
    ProjHyperplane moved = pt.rep.images.at("A").apply(pt.wall);
    CHECK(hyperplanes_equal(moved, pt.wall, 1e-9));

    // HNN pairing holds for rho_0.
    const Decomposition& dec = *pt.rep.decomposition;
    for (const auto& [gg, gd] : dec.pairings) {
        Word alpha = parse_word(dec.stable_letter);
        Word rhs = concat(concat(inverse_word(alpha), gd), alpha);
        CHECK((pt.rep.evaluate(gg).mat - pt.rep.evaluate(rhs).mat).norm() < 1e-9);
    }
}

TEST_CASE("element classification") {
    PuncturedTorus pt = punctured_torus_rep();

    CHECK(classify_element(ProjMap::identity(3)).type == ElementType::EllipticOrIdentity);

    // sym^2 of the trace-3 matrix: hyperbolic with eigenvalues l^2, 1, l^-2.
    Classification cls = classify_element(pt.rep.images.at("A"));
    CHECK(cls.type == ElementType::Hyperbolic);
    CHECK(cls.loxodromic);
    const double lambda = (3.0 + std::sqrt(5.0)) / 2.0;
    std::vector<double> expected{lambda * lambda, 1.0, 1.0 / (lambda * lambda)};
    std::vector<double> got;
    for (const auto& ev : cls.eigenvalues) {
        CHECK(std::abs(ev.imag()) < 1e-9);
        got.push_back(ev.real());
    }
    std::sort(got.begin(), got.end(), std::greater<>());
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-9));

    // The commutator is unipotent: every eigenvalue within 1e-6 of 1 via the
    // nilpotency certificate, and classified parabolic.
    Word comm = parse_word("A B A^-1 B^-1");
    Classification ccls = classify_element(pt.rep.evaluate(comm));
    CHECK(ccls.type == ElementType::ParabolicUnipotent);
    CHECK(ccls.unipotent_bound < 1e-6);
    CHECK(!ccls.loxodromic);

    // Classification is a conjugation invariant. Conjugation amplifies the
    // defective-eigenvalue noise by the conjugator's condition number, so
    // keep the conjugators well conditioned and the tolerance matched.
    Rng rng(47);
    for (int i = 0; i < 50; ++i) {
        Mat h(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) h(r, c) = rng.uniform(-1, 1);
        if (std::abs(h.determinant()) < 1e-2) continue;
        Eigen::JacobiSVD<Mat> svd(h);
        if (svd.singularValues()[0] / svd.singularValues()[2] > 20) continue;
        ProjMap conj = ProjMap::from_matrix(h);
        Word w = random_reduced_word(pt.rep.generators, rng.uniform_int(1, 4), rng);
        ProjMap g = pt.rep.evaluate(w);
        ProjMap gc = conj.compose(g).compose(conj.inverse());
        CHECK(classify_element(g, 1e-4).type == classify_element(gc, 1e-4).type);
    }
}

TEST_CASE("irreducibility dimension") {
    // Trivial representation spans only the identity.
    Representation trivial;
    trivial.generators = {"A"};
    trivial.images["A"] = ProjMap::identity(3);
    CHECK(irreducibility_dimension(trivial, 4) == 1);

    // A single diagonal generator spans at most the diagonal algebra.
    Representation diag_rep;
    diag_rep.generators = {"A"};
    Vec d(3);
    double t = 0.3;
    d << std::exp(2 * t), std::exp(-t), std::exp(-t);
    diag_rep.images["A"] = ProjMap::from_matrix(Mat(d.asDiagonal()));
    int dim = irreducibility_dimension(diag_rep, 4);
    CHECK(dim <= 3);
    CHECK(dim >= 2);

    // The punctured-torus group acts irreducibly: full 9-dimensional span.
    PuncturedTorus pt = punctured_torus_rep();
    CHECK(irreducibility_dimension(pt.rep, 4) == 9);
    // Monotone in the word length.
    CHECK(irreducibility_dimension(pt.rep, 1) <= irreducibility_dimension(pt.rep, 2));
}

TEST_CASE("limit set sampling") {
    PuncturedTorus pt = punctured_torus_rep();
    QuadricDomain disk(pt.base_form, AffineChart::standard(2));

    // Cyclic hyperbolic group: exactly the two axis endpoints.
    Representation cyclic;
    cyclic.generators = {"A"};
    cyclic.images["A"] = pt.rep.images.at("A");
    LimitSetSample cyc = limit_set_sample(cyclic, disk, 5, 60, 7);
    std::vector<ProjPoint> distinct;
    for (const auto& p : cyc.points) {
        bool seen = false;
        for (const auto& q : distinct)
            if (points_equal(p, q, 1e-8)) seen = true;
        if (!seen) distinct.push_back(p);
    }
    CHECK(distinct.size() == 2);

    // Punctured torus: attracting points lie on the unit circle.
    LimitSetSample ls = limit_set_sample(pt.rep, disk, 5, 100, 11);
    double worst = 0;
    for (const auto& p : ls.points) worst = std::max(worst, std::abs(disk.form_value(p)));
    CHECK(worst < 1e-6);

    // Iteration converges to the attracting point.
    ProjPoint x0 = disk.chart().embed(v2(0.05, -0.02));
    for (std::size_t i = 0; i < std::min<std::size_t>(ls.words.size(), 10); ++i) {
        ProjMap g = pt.rep.evaluate(ls.words[i]);
        ProjPoint z = x0;
        for (int k = 0; k < 50; ++k) z = g.apply(z);
        CHECK(points_equal(z, ls.points[i], 1e-6));
    }

    // Elliptic-only input reports NoHyperbolicFound.
    Representation identity_rep;
    identity_rep.generators = {"A"};
    identity_rep.images["A"] = ProjMap::identity(3);
    CHECK_THROWS_AS(limit_set_sample(identity_rep, disk, 3, 10, 3), Error);
}

TEST_CASE("Dirichlet domains in the Klein model") {
    PuncturedTorus pt = punctured_torus_rep();
    QuadricDomain disk(pt.base_form, AffineChart::standard(2));
    ProjPoint x0 = disk.chart().embed(v2(0.013, 0.027));

    // Trivial group: the whole domain, no walls.
    Representation trivial;
    trivial.generators = {"A"};
    trivial.images["A"] = ProjMap::identity(3);
    DirichletDomain whole = dirichlet_domain(trivial, disk, x0, 3);
    CHECK(whole.bisectors.empty());
    CHECK(whole.contains(disk.chart().embed(v2(-0.6, 0.3))));

    // Cyclic hyperbolic group: exactly two active walls.
    Representation cyclic;
    cyclic.generators = {"A"};
    cyclic.images["A"] = pt.rep.images.at("A");
    DirichletDomain band = dirichlet_domain(cyclic, disk, x0, 4);
    CHECK(band.bisectors.size() == 2);
    CHECK(band.contains(x0));

    // Punctured torus at word length 3: contains the base point, translates
    // tile a neighbourhood, and distinct translates have disjoint interiors.
    DirichletDomain dom = dirichlet_domain(pt.rep, disk, x0, 3);
    CHECK(dom.contains(x0));

    std::vector<Word> words = reduced_words(pt.rep.generators, 3);
    std::vector<ProjMap> trans;
    for (const auto& w : words) trans.push_back(pt.rep.evaluate(w));

    Rng rng(53);
    MetricContext ctx(disk);
    int covered = 0, tested = 0;
    for (int i = 0; i < 2000; ++i) {
        ProjPoint z = disk.sample_interior(rng);
        // Disjointness of translate interiors.
        int strictly_inside = 0;
        for (const auto& g : trans)
            if (dom.margin(g.inverse().apply(z)) < -1e-7) ++strictly_inside;
        CHECK(strictly_inside <= 1);
        // Partial covering: points near the base point are covered by some
        // translate of the domain within the word ball.
        if (distance(ctx, x0, z) < 1.0) {
            ++tested;
            for (const auto& g : trans)
                if (dom.margin(g.inverse().apply(z)) <= 1e-9) {
                    ++covered;
                    break;
                }
        }
    }
    CHECK(tested > 50);
    CHECK(covered == tested);
}

TEST_CASE("so(q) membership and random elements") {
    Mat q = minkowski3();
    CHECK(so_q_membership(ProjMap::identity(3), q));

    Vec d(3);
    double t = 0.4;
    d << std::exp(2 * t), std::exp(-t), std::exp(-t);
    CHECK(!so_q_membership(ProjMap::from_matrix(Mat(d.asDiagonal())), q));

    Rng rng(59);
    for (int n : {2, 3, 4}) {
        Vec dq(n);
        dq.setOnes();
        dq[n - 1] = -1;
        Mat qn = Mat(dq.asDiagonal());
        for (int i = 0; i < 25; ++i) {
            Mat h = random_so_q(qn, rng);
            CHECK((h.transpose() * qn * h - qn).norm() < 1e-11);
        }
    }
}
