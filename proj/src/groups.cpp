#include "hb/groups.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace hb {

// ---------------------------------------------------------------------------
// Words

Word parse_word(const std::string& text) {
    Word w;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        int exp = 1;
        std::string name = tok;
        auto caret = tok.find('^');
        if (caret != std::string::npos) {
            name = tok.substr(0, caret);
            exp = std::stoi(tok.substr(caret + 1));
        } else if (tok.size() == 1 && std::islower(static_cast<unsigned char>(tok[0]))) {
            // lower-case shorthand for the inverse of the upper-case generator
            name = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0]))));
            exp = -1;
        }
        int step = exp >= 0 ? 1 : -1;
        for (int i = 0; i != exp; i += step) w.emplace_back(name, step);
    }
    return w;
}

std::string word_to_string(const Word& w) {
    std::ostringstream out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out << ' ';
        out << w[i].first;
        if (w[i].second < 0) out << "^-1";
    }
    return out.str();
}

Word inverse_word(const Word& w) {
    Word inv;
    for (auto it = w.rbegin(); it != w.rend(); ++it)
        inv.emplace_back(it->first, -it->second);
    return inv;
}

Word concat(const Word& a, const Word& b) {
    Word out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

ProjMap Representation::image_of(const std::string& name, int exponent) const {
    auto it = images.find(name);
    if (it == images.end())
        throw Error(ErrorCode::SchemaError, "unknown generator: " + name);
    if (exponent > 0) return it->second;
    auto inv = inverse_images.find(name);
    return inv != inverse_images.end() ? inv->second : it->second.inverse();
}

ProjMap Representation::evaluate(const Word& w) const {
    Mat acc = Mat::Identity(ambient_dim(), ambient_dim());
    for (const auto& [name, exp] : w) acc = acc * image_of(name, exp).mat;
    return ProjMap::from_unimodular(acc);
}

Word random_reduced_word(const std::vector<std::string>& generators, int len, Rng& rng) {
    Word w;
    int prev_gen = -1, prev_exp = 0;
    for (int i = 0; i < len; ++i) {
        while (true) {
            int g = rng.uniform_int(0, static_cast<int>(generators.size()) - 1);
            int e = rng.uniform_int(0, 1) ? 1 : -1;
            if (g == prev_gen && e == -prev_exp) continue; // no immediate cancellation
            w.emplace_back(generators[g], e);
            prev_gen = g;
            prev_exp = e;
            break;
        }
    }
    return w;
}

std::vector<Word> reduced_words(const std::vector<std::string>& generators, int max_len) {
    std::vector<Word> out{{}};
    std::vector<Word> frontier{{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Word> next;
        for (const auto& w : frontier) {
            for (const auto& g : generators) {
                for (int e : {1, -1}) {
                    if (!w.empty() && w.back().first == g && w.back().second == -e) continue;
                    Word child = w;
                    child.emplace_back(g, e);
                    out.push_back(child);
                    next.push_back(std::move(child));
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Element classification

Classification classify_element(const ProjMap& g, double tol) {
    const int n1 = g.ambient_dim();
    Classification out;

    Eigen::EigenSolver<Mat> es(g.mat);
    for (int i = 0; i < n1; ++i) out.eigenvalues.push_back(es.eigenvalues()[i]);
    out.spectral_radius = 0.0;
    for (const auto& ev : out.eigenvalues)
        out.spectral_radius = std::max(out.spectral_radius, std::abs(ev));

    // Nilpotency certificate: rho(g - I)^{n+1} bounds every |lambda - 1|.
    Mat nil = g.mat - Mat::Identity(n1, n1);
    Mat power = nil;
    for (int i = 1; i < n1; ++i) power = power * nil;
    out.unipotent_bound = std::pow(power.norm(), 1.0 / n1);

    // Loxodromic flag: eigenvalues of g^2 simple and positive.
    Eigen::EigenSolver<Mat> es2(Mat(g.mat * g.mat));
    bool lox = true;
    for (int i = 0; i < n1; ++i) {
        auto li = es2.eigenvalues()[i];
        if (std::abs(li.imag()) > tol || li.real() < tol) lox = false;
        for (int j = i + 1; j < n1; ++j)
            if (std::abs(li - es2.eigenvalues()[j]) < tol) lox = false;
    }
    out.loxodromic = lox;

    if (nil.norm() < tol) {
        out.type = ElementType::EllipticOrIdentity; // identity
        return out;
    }

    bool all_near_one = out.unipotent_bound < std::max(tol, 1e-5);
    if (!all_near_one) {
        all_near_one = true;
        for (const auto& ev : out.eigenvalues)
            if (std::abs(ev - std::complex<double>(1.0, 0.0)) > tol) all_near_one = false;
    }
    if (all_near_one) {
        out.type = ElementType::ParabolicUnipotent;
        return out;
    }

    if (out.spectral_radius > 1.0 + tol) {
        // For automorphisms of a properly convex set the spectral radius is
        // attained by a real positive eigenvalue; report both fixed points.
        int top = -1, bottom = -1;
        double top_val = 0, bottom_val = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n1; ++i) {
            auto ev = es.eigenvalues()[i];
            if (std::abs(ev.imag()) > tol * std::abs(ev) || ev.real() <= 0) continue;
            if (ev.real() > top_val) {
                top_val = ev.real();
                top = i;
            }
            if (ev.real() < bottom_val) {
                bottom_val = ev.real();
                bottom = i;
            }
        }
        if (top >= 0 && top_val > out.spectral_radius * (1.0 - 1e-9)) {
            out.type = ElementType::Hyperbolic;
            out.attracting = ProjPoint(Vec(es.eigenvectors().col(top).real()));
            if (bottom >= 0 && bottom != top)
                out.repelling = ProjPoint(Vec(es.eigenvectors().col(bottom).real()));
            return out;
        }
    }
    out.type = ElementType::EllipticOrIdentity;
    return out;
}

// ---------------------------------------------------------------------------
// Reduced-word enumeration (matrices and words in lockstep)

namespace {

struct Enumerated {
    std::vector<Mat> matrices;
    std::vector<Word> words;
};

Enumerated enumerate_reduced(const Representation& rho, int max_len) {
    Enumerated out;
    const int n1 = rho.ambient_dim();
    struct Item {
        Mat m;
        Word w;
        int last_gen, last_exp;
    };
    std::vector<Item> frontier{{Mat::Identity(n1, n1), Word{}, -1, 0}};
    out.matrices.push_back(frontier[0].m);
    out.words.push_back(frontier[0].w);
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Item> next;
        for (const auto& item : frontier) {
            for (int g = 0; g < static_cast<int>(rho.generators.size()); ++g) {
                for (int e : {1, -1}) {
                    if (g == item.last_gen && e == -item.last_exp) continue;
                    Item child;
                    child.m = item.m * rho.image_of(rho.generators[g], e).mat;
                    child.w = item.w;
                    child.w.emplace_back(rho.generators[g], e);
                    child.last_gen = g;
                    child.last_exp = e;
                    out.matrices.push_back(child.m);
                    out.words.push_back(child.w);
                    next.push_back(std::move(child));
                }
            }
        }
        frontier = std::move(next);
    }
    return out;
}

} // namespace

int irreducibility_dimension(const Representation& rho, int max_word_len, double rank_tol) {
    Enumerated en = enumerate_reduced(rho, max_word_len);
    const int n1 = rho.ambient_dim();
    Mat stacked(static_cast<int>(en.matrices.size()), n1 * n1);
    for (std::size_t i = 0; i < en.matrices.size(); ++i) {
        Eigen::Map<const Vec> flat(en.matrices[i].data(), n1 * n1);
        stacked.row(static_cast<int>(i)) = flat.transpose();
    }
    Eigen::JacobiSVD<Mat> svd(stacked);
    const Vec& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > rank_tol * sv[0]) ++rank;
    return rank;
}

// ---------------------------------------------------------------------------
// Limit set

LimitSetSample limit_set_sample(const Representation& rho, const ConvexDomain& domain,
                                int word_len, int count, std::uint64_t seed) {
    LimitSetSample out;
    Rng rng = Rng::split(seed, 0x115);
    int attempts = 0, found = 0;
    const int max_attempts = count * 50;
    (void)domain;
    while (found < count && attempts < max_attempts) {
        ++attempts;
        int len = rng.uniform_int(1, word_len);
        Word w = random_reduced_word(rho.generators, len, rng);
        Classification cls = classify_element(rho.evaluate(w), 1e-8);
        if (cls.type != ElementType::Hyperbolic || !cls.attracting) continue;
        out.points.push_back(*cls.attracting);
        out.words.push_back(w);
        ++found;
    }
    if (out.points.empty())
        throw Error(ErrorCode::NoHyperbolicFound, "no hyperbolic word found in the sample");
    return out;
}

// ---------------------------------------------------------------------------
// Dirichlet domains in the Klein model

namespace {

// Bisector of [x0, y0]: covector Q (x0/sqrt(-q(x0)) - y0/sqrt(-q(y0))).
Vec bisector_covector(const Mat& q, const Vec& x0, const Vec& y0) {
    double qx = -(x0.dot(q * x0));
    double qy = -(y0.dot(q * y0));
    if (qx <= 0 || qy <= 0)
        throw Error(ErrorCode::NotInterior, "bisector base points must be interior");
    return q * (x0 / std::sqrt(qx) - y0 / std::sqrt(qy));
}

} // namespace

bool DirichletDomain::contains(const ProjPoint& x, double tol) const {
    return margin(x) <= tol && !domain->classify(x).exterior();
}

double DirichletDomain::margin(const ProjPoint& x) const {
    Vec y = chart.project(x);
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : all_bisectors) m = std::max(m, a.dot(y) - b);
    return m;
}

DirichletDomain dirichlet_domain(const Representation& rho, const QuadricDomain& domain,
                                 const ProjPoint& x0, int word_len) {
    DirichletDomain out;
    out.domain = &domain;
    out.chart = domain.chart();
    if (!domain.classify(x0).interior())
        throw Error(ErrorCode::NotInterior, "Dirichlet base point must be interior");

    Enumerated en = enumerate_reduced(rho, word_len);
    const Vec lift0 = out.chart.lift(x0);
    ProjPoint x0c(lift0);

    std::vector<ProjPoint> orbit;
    std::vector<Word> orbit_words;
    const int n1 = rho.ambient_dim();
    for (std::size_t i = 0; i < en.matrices.size(); ++i) {
        if (en.words[i].empty()) continue;
        ProjMap gm = ProjMap::from_unimodular(en.matrices[i]);
        if ((gm.mat - Mat::Identity(n1, n1)).norm() < 1e-9) continue; // trivial element
        ProjPoint y = gm.apply(x0c);
        if (points_equal(y, x0c, 1e-10))
            throw Error(ErrorCode::StabilizerNontrivial,
                        "orbit point coincides with the base point: " +
                            word_to_string(en.words[i]));
        bool dup = false;
        for (const auto& prev : orbit)
            if (points_equal(prev, y, 1e-10)) dup = true;
        if (dup) continue;
        orbit.push_back(y);
        orbit_words.push_back(en.words[i]);
    }

    const Mat& q = domain.form();
    const int n = domain.dim();
    for (std::size_t i = 0; i < orbit.size(); ++i) {
        Vec cov = bisector_covector(q, lift0, out.chart.lift(orbit[i]));
        Vec c = out.chart.frame_inverse().transpose() * cov;
        Vec a = c.head(n);
        double b = -c[n];
        if (a.dot(out.chart.project(x0)) - b > 0) { // orient x0 to the inside
            a = -a;
            b = -b;
        }
        out.all_bisectors.emplace_back(a, b);
    }
    out.base_point = x0;

    // Activity: a bisector is a facet when it is approached by points of the
    // region cut out by all constraints. Sampled probe in the chart box.
    Rng rng(0x411d);
    auto [lo, hi] = domain.bounding_box();
    const int probes = 6000;
    std::vector<double> best(out.all_bisectors.size(),
                             -std::numeric_limits<double>::infinity());
    for (int t = 0; t < probes; ++t) {
        Vec y = rng.box_point(lo, hi);
        if (!domain.classify(out.chart.embed(y)).interior()) continue;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : out.all_bisectors)
            worst = std::max(worst, a.dot(y) - b);
        if (worst > 0) continue; // outside the Dirichlet region
        for (std::size_t i = 0; i < out.all_bisectors.size(); ++i) {
            double v = out.all_bisectors[i].first.dot(y) - out.all_bisectors[i].second;
            best[i] = std::max(best[i], v);
        }
    }
    for (std::size_t i = 0; i < out.all_bisectors.size(); ++i) {
        double scale = out.all_bisectors[i].first.norm();
        if (best[i] > -0.08 * scale) {
            out.bisectors.push_back(out.all_bisectors[i]);
            out.bisector_words.push_back(orbit_words[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// The punctured-torus representation

Mat sym_square(const Mat& g2) {
    double a = g2(0, 0), b = g2(0, 1), c = g2(1, 0), d = g2(1, 1);
    Mat m(3, 3);
    // action on coefficients (u, v, w) of the binary quadratic u x^2 + 2v xy + w y^2
    m << a * a, 2 * a * b, b * b,
         a * c, a * d + b * c, b * d,
         c * c, 2 * c * d, d * d;
    return m;
}

PuncturedTorus punctured_torus_rep() {
    PuncturedTorus pt;
    Mat a2(2, 2), b2(2, 2);
    a2 << 1, 1, 1, 2;
    b2 << 1, -1, -1, 2;
    pt.sl2_a = a2;
    pt.sl2_b = b2;

    // sym_square preserves v^2 - uw; L below is a congruence taking the
    // standard Minkowski form diag(1,1,-1) to it, so the conjugated images
    // preserve diag(1,1,-1).
    Mat l(3, 3);
    l << 0, 1, 1,
         1, 0, 0,
         0, -1, 1;
    Mat l_inv = l.inverse();

    Vec diag(3);
    diag << 1, 1, -1;
    pt.base_form = Mat(diag.asDiagonal());

    Representation rep;
    rep.generators = {"A", "B"};
    rep.images["A"] = ProjMap::from_unimodular(l_inv * sym_square(a2) * l);
    rep.images["B"] = ProjMap::from_unimodular(l_inv * sym_square(b2) * l);
    // Integer inverses upstairs keep word products exact.
    rep.inverse_images["A"] = ProjMap::from_unimodular(l_inv * sym_square(a2.inverse()) * l);
    rep.inverse_images["B"] = ProjMap::from_unimodular(l_inv * sym_square(b2.inverse()) * l);

    Decomposition dec;
    dec.kind = Decomposition::Kind::Hnn;
    dec.wall_subgroup = {parse_word("A")};
    dec.stable_letter = "B";
    dec.pairings = {{parse_word("A"), parse_word("B A B^-1")}};
    rep.decomposition = dec;
    pt.rep = rep;

    // Wall: the projective line through the axis endpoints of rho(A);
    // its pole is the remaining eigendirection.
    Classification cls = classify_element(rep.images.at("A"));
    if (cls.type != ElementType::Hyperbolic || !cls.attracting || !cls.repelling)
        throw Error(ErrorCode::NumericalFailure, "wall generator is not hyperbolic");
    const Vec& plus = cls.attracting->rep;
    const Vec& minus = cls.repelling->rep;
    Vec cov(3);
    cov << plus[1] * minus[2] - plus[2] * minus[1],
           plus[2] * minus[0] - plus[0] * minus[2],
           plus[0] * minus[1] - plus[1] * minus[0];
    pt.wall = ProjHyperplane(cov);
    pt.wall_pole = pole(pt.wall, pt.base_form);
    return pt;
}

bool so_q_membership(const ProjMap& g, const Mat& q, double tol) {
    return (g.mat.transpose() * q * g.mat - q).norm() < tol * q.norm();
}

Mat expm(const Mat& x) {
    const int n = static_cast<int>(x.rows());
    int squarings = 0;
    double norm = x.norm();
    Mat scaled = x;
    while (norm > 0.5) {
        scaled *= 0.5;
        norm *= 0.5;
        ++squarings;
    }
    Mat sum = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k <= 24; ++k) {
        term = term * scaled / k;
        sum += term;
        if (term.norm() < 1e-18 * sum.norm()) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

Mat random_so_q(const Mat& q, Rng& rng, double scale) {
    const int n = static_cast<int>(q.rows());
    Mat anti(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) anti(i, j) = rng.uniform(-scale, scale);
    anti = 0.5 * (anti - anti.transpose().eval());
    Mat x = q.fullPivLu().solve(anti); // X^T q = -q X
    return expm(x);
}

} // namespace hb
