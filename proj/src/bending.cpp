#include "hb/bending.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <cstdio>
#include <cstdlib>

namespace hb {

ProjMap bending_map(const ProjHyperplane& h, const ProjPoint& p, double t, int n) {
    const Vec& nu = h.covector;
    const Vec& pv = p.rep;
    double pairing = nu.dot(pv);
    // Deep conjugated walls legitimately have small pairings (the pole
    // approaches its own wall near the boundary), so only reject genuine
    // incidence at roundoff scale.
    if (std::abs(pairing) < 1e-13)
        throw Error(ErrorCode::IncidentPolePlane, "pole is incident to the wall hyperplane");
    const int n1 = n + 1;
    Mat m = std::exp(-t) *
            (Mat::Identity(n1, n1) + std::expm1((n + 1) * t) * (pv * nu.transpose()) / pairing);
    return ProjMap::from_unimodular(m);
}

// ---------------------------------------------------------------------------
// Cone condition

namespace {

// Chart containing the closure of the domain and the apex point.
AffineChart apex_chart(const ConvexDomain& omega, const ProjPoint& p) {
    Vec nu0 = omega.chart().at_infinity().covector;
    std::vector<ProjPoint> boundary;
    Rng rng(0xc0de);
    ProjPoint a = omega.anchor();
    for (int k = 0; k < 24; ++k) {
        auto [pm, pp] = omega.ray_boundary(a, rng.direction(omega.dim()));
        boundary.push_back(pm);
        boundary.push_back(pp);
    }
    auto admissible = [&](const Vec& cov) {
        if (std::abs(cov.dot(p.rep)) < 0.05) return false;
        for (const auto& b : boundary)
            if (std::abs(cov.dot(b.rep)) < 0.05) return false;
        return true;
    };
    if (admissible(nu0)) return AffineChart::with_infinity(ProjHyperplane(nu0));
    for (double delta : {0.5, -0.5, 0.25, -0.25, 1.0, -1.0, 2.0, -2.0}) {
        Vec cov = (nu0 + delta * p.rep).normalized();
        if (admissible(cov)) return AffineChart::with_infinity(ProjHyperplane(cov));
    }
    throw Error(ErrorCode::NumericalFailure, "no affine chart contains both domain and apex");
}

} // namespace

bool cone_condition(const ConvexDomain& omega, const ProjHyperplane& h, const ProjPoint& p,
                    int samples, std::uint64_t seed) {
    if (!omega.classify(p).exterior())
        throw Error(ErrorCode::PoleInsideDomain, "cone apex must lie outside the closure");

    AffineChart chart = apex_chart(omega, p);
    const int n = omega.dim();
    Vec c = chart.frame_inverse().transpose() * h.covector;
    Vec a_form = c.head(n);
    double b_form = -c[n];

    // The wall must meet the domain: interior samples on both sides.
    Rng side_rng = Rng::split(seed, 0x31);
    bool seen_pos = false, seen_neg = false;
    for (int i = 0; i < 400 && !(seen_pos && seen_neg); ++i) {
        Vec y = chart.project(omega.sample_interior(side_rng));
        double s = a_form.dot(y) - b_form;
        if (s > 0) seen_pos = true;
        if (s < 0) seen_neg = true;
    }
    if (!(seen_pos && seen_neg))
        throw Error(ErrorCode::WallMissesDomain, "wall does not cross the domain");

    Vec yp = chart.project(p);
    Rng rng = Rng::split(seed, 0x32);
    for (int i = 0; i < samples; ++i) {
        Vec yx = chart.project(omega.sample_interior(rng));
        Vec d = yx - yp;
        double den = a_form.dot(d);
        double num = b_form - a_form.dot(yp);
        if (std::abs(den) < 1e-14) return false; // line through apex misses the wall
        double s = num / den;
        if (s <= 0) return false; // base point behind the apex
        if (omega.classify(chart.embed(yp + s * d)).exterior()) return false;
    }
    return true;
}

PliResult pli(std::shared_ptr<const ConvexDomain> omega, const WallSpec& wall, double t,
              int samples, std::uint64_t seed, bool enforce_guard) {
    PliResult res;
    res.cone_ok = cone_condition(*omega, wall.plane, wall.pole_point,
                                 std::max(200, samples / 4), seed);
    if (!res.cone_ok && enforce_guard)
        throw Error(ErrorCode::ConeConditionFailed, "half-cone over the wall misses the domain");

    // Interior reference point on the kept side.
    Rng rng = Rng::split(seed, 0x33);
    ProjPoint kept;
    bool found = false;
    for (int i = 0; i < 4000 && !found; ++i) {
        ProjPoint x = omega->sample_interior(rng);
        double s = omega->chart().side_value(wall.plane.covector, x);
        if (s * wall.side > 1e-9) {
            kept = x;
            found = true;
        }
    }
    if (!found)
        throw Error(ErrorCode::WallMissesDomain, "no interior point on the requested side");

    ProjMap bend = bending_map(wall.plane, wall.pole_point, t, omega->dim());
    res.domain = std::make_shared<PliDomain>(omega, wall.plane, bend, kept);

    // Convexity spot-check by midpoint sampling.
    const AffineChart& chart = res.domain->chart();
    Rng mid_rng = Rng::split(seed, 0x34);
    for (int i = 0; i < samples; ++i) {
        Vec y1 = chart.project(res.domain->sample_interior(mid_rng));
        Vec y2 = chart.project(res.domain->sample_interior(mid_rng));
        if (res.domain->classify(chart.embed(0.5 * (y1 + y2))).exterior())
            ++res.convexity_violations;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Deformed representation

Representation bend_representation(const Representation& rho0, const Decomposition& dec,
                                   const ProjMap& a_t, const ProjMap& a_t_inv) {
    Representation out;
    out.generators = rho0.generators;
    out.decomposition = dec;
    if (dec.kind == Decomposition::Kind::Hnn) {
        for (const auto& g : rho0.generators) {
            if (g == dec.stable_letter) {
                out.images[g] = ProjMap::from_unimodular(a_t.mat * rho0.images.at(g).mat);
                out.inverse_images[g] =
                    ProjMap::from_unimodular(rho0.image_of(g, -1).mat * a_t_inv.mat);
            } else {
                out.images[g] = rho0.images.at(g);
                out.inverse_images[g] = rho0.image_of(g, -1);
            }
        }
    } else {
        auto is_right = [&](const std::string& g) {
            return std::find(dec.right_generators.begin(), dec.right_generators.end(), g) !=
                   dec.right_generators.end();
        };
        for (const auto& g : rho0.generators) {
            if (is_right(g)) {
                out.images[g] = ProjMap::from_unimodular(a_t.mat * rho0.images.at(g).mat *
                                                         a_t_inv.mat);
                out.inverse_images[g] = ProjMap::from_unimodular(
                    a_t.mat * rho0.image_of(g, -1).mat * a_t_inv.mat);
            } else {
                out.images[g] = rho0.images.at(g);
                out.inverse_images[g] = rho0.image_of(g, -1);
            }
        }
    }
    return out;
}

double decomposition_residual(const Representation& rho, const Decomposition& dec) {
    double worst = 0.0;
    if (dec.kind == Decomposition::Kind::Hnn) {
        Word alpha = parse_word(dec.stable_letter);
        for (const auto& [gg, gd] : dec.pairings) {
            Mat lhs = rho.evaluate(gg).mat;
            Mat rhs = rho.evaluate(concat(concat(inverse_word(alpha), gd), alpha)).mat;
            worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Wall system and chamber tree

namespace {

struct WallSystem {
    std::vector<Wall> walls;
    std::vector<Vec> midpoints; // chord midpoints, chart coords
    // side sign of wall wp at the midpoint of wall w: sgn[wp][w]
    std::vector<std::vector<int8_t>> sgn;
};

int sign_of(double v) { return v >= 0 ? 1 : -1; }

// Chord of a projective line with the base quadric in its chart; false when
// the line misses the domain (dimension 2).
bool quadric_line_chord(const QuadricDomain& base, const Vec& a_form, double b_form,
                        Vec& out_a, Vec& out_b) {
    const AffineChart& chart = base.chart();
    Vec dir(2);
    dir << -a_form[1], a_form[0];
    Vec foot = a_form * (b_form / a_form.squaredNorm());
    Vec l0 = chart.frame_inverse() * (Vec(3) << foot[0], foot[1], 1.0).finished();
    Vec l1 = chart.frame_inverse() * (Vec(3) << foot[0] + dir[0], foot[1] + dir[1], 1.0).finished();
    Vec d = l1 - l0;
    const Mat& q = base.form();
    double qa = d.dot(q * d);
    double qb = l0.dot(q * d);
    double qc = l0.dot(q * l0);
    double disc = qb * qb - qa * qc;
    if (!(disc > 1e-18) || std::abs(qa) < 1e-18) return false;
    double sq = std::sqrt(disc);
    double r1 = (-qb - sq) / qa, r2 = (-qb + sq) / qa;
    out_a = chart.project(ProjPoint(Vec(l0 + r1 * d)));
    out_b = chart.project(ProjPoint(Vec(l0 + r2 * d)));
    return (out_a - out_b).norm() > 1e-9;
}

} // namespace

class BentDomainBuilder {
  public:
    static BendResult build(const Representation& rho0, const Decomposition& dec,
                            const QuadricDomain& base, const WallSpec& wall0,
                            const BendParams& params);
};

BendResult build_bent_domain(const Representation& rho0, const Decomposition& dec,
                             const QuadricDomain& base, const WallSpec& wall0,
                             const BendParams& params) {
    return BentDomainBuilder::build(rho0, dec, base, wall0, params);
}

BendResult BentDomainBuilder::build(const Representation& rho0, const Decomposition& dec,
                                    const QuadricDomain& base, const WallSpec& wall0,
                                    const BendParams& params) {
    const int n = base.dim();
    if (params.n != 0 && params.n != n)
        throw Error(ErrorCode::DimensionUnsupported, "parameter dimension disagrees with base");
    if (n != 2)
        throw Error(ErrorCode::DimensionUnsupported,
                    "chamber-tree construction is implemented for dimension 2");
    const AffineChart& chart = base.chart();

    // --- input validation ---------------------------------------------------
    for (const auto& g : rho0.generators) {
        const Mat& m = rho0.images.at(g).mat;
        if ((m.transpose() * base.form() * m - base.form()).norm() > 1e-8 * base.form().norm())
            throw Error(ErrorCode::RelationViolated,
                        "generator does not preserve the base quadric");
    }
    {
        Rng rng = Rng::split(params.seed, 0x41);
        for (int i = 0; i < 40; ++i) {
            Word w = random_reduced_word(rho0.generators, rng.uniform_int(1, 4), rng);
            if (base.classify(rho0.evaluate(w).apply(base.anchor())).exterior())
                throw Error(ErrorCode::RelationViolated, "orbit leaves the base domain");
        }
    }
    for (const auto& delta : dec.wall_subgroup) {
        if (!hyperplanes_equal(rho0.evaluate(delta).apply(wall0.plane), wall0.plane, 1e-8))
            throw Error(ErrorCode::RelationViolated,
                        "wall subgroup does not stabilize the base wall");
    }
    ProjPoint pole0 = wall0.pole_point.rep.size() ? wall0.pole_point
                                                  : pole(wall0.plane, base.form());
    if (!points_equal(pole0, pole(wall0.plane, base.form()), 1e-6))
        throw Error(ErrorCode::DegenerateConfiguration,
                    "supplied pole is not the dual of the wall");

    // --- deformed representation --------------------------------------------
    ProjMap a_t = bending_map(wall0.plane, pole0, params.t, n);
    ProjMap a_t_inv = bending_map(wall0.plane, pole0, -params.t, n);
    Representation rho_t = bend_representation(rho0, dec, a_t, a_t_inv);

    BendResult result;
    result.bend_generator = a_t;
    result.base_wall = wall0;
    result.base_wall.pole_point = pole0;

    for (const auto& delta : dec.wall_subgroup) {
        Mat d = rho0.evaluate(delta).mat;
        double r = (a_t.mat * d - d * a_t.mat).norm() / std::max(1.0, d.norm());
        result.centralizer_residual = std::max(result.centralizer_residual, r);
    }
    result.relation_residual =
        std::max(decomposition_residual(rho0, dec), decomposition_residual(rho_t, dec));
    if (result.relation_residual > 1e-9 || result.centralizer_residual > 1e-9)
        throw Error(ErrorCode::RelationViolated, "decomposition relations fail under bending");
    result.rho_t = rho_t;

    // --- wall system ----------------------------------------------------------
    // Walls are cosets of the wall stabilizer: carriers are canonicalized by
    // stripping trailing wall-subgroup letters. This is exact (no float
    // tolerance) and keeps the carriers short, which preserves transport
    // precision; a geometric comparison backs it up for other coincidences.
    WallSystem ws;
    {
        std::vector<std::string> strip_letters;
        for (const auto& delta : dec.wall_subgroup)
            if (delta.size() == 1) strip_letters.push_back(delta.front().first);
        auto canonical_carrier = [&](Word w) {
            while (!w.empty() &&
                   std::find(strip_letters.begin(), strip_letters.end(), w.back().first) !=
                       strip_letters.end())
                w.pop_back();
            return w;
        };

        // The base wall's ideal endpoints; their orbit gives every wall's
        // chord. Points transport without the cancellation that covector
        // transport suffers through long words.
        Vec e0a, e0b;
        {
            Vec c = chart.frame_inverse().transpose() * wall0.plane.covector;
            Vec a_form = c.head(2);
            double b_form = -c[2];
            double an = a_form.norm();
            if (!quadric_line_chord(base, Vec(a_form / an), b_form / an, e0a, e0b))
                throw Error(ErrorCode::WallMissesDomain, "base wall misses the domain");
        }
        ProjPoint end_a = chart.embed(e0a), end_b = chart.embed(e0b);

        std::vector<Word> words = reduced_words(rho0.generators, params.wall_words);
        std::map<std::string, int> seen;
        for (const auto& raw : words) {
            Word w = canonical_carrier(raw);
            std::string key = word_to_string(w);
            if (seen.count(key)) continue;
            seen[key] = 1;

            ProjMap g = rho0.evaluate(w);
            Vec pa, pb;
            try {
                pa = chart.project(g.apply(end_a));
                pb = chart.project(g.apply(end_b));
            } catch (const Error&) {
                continue;
            }
            Vec dir = pb - pa;
            if (dir.norm() < 1e-9) continue;

            Wall wall;
            wall.carrier = w;
            wall.chord_a = pa;
            wall.chord_b = pb;
            Vec a_form(2);
            a_form << -dir[1], dir[0];
            a_form.normalize();
            wall.halfspace_normal = a_form;
            wall.halfspace_offset = a_form.dot(pa);
            // Line through the two lifted endpoints.
            Vec la = chart.frame_inverse() * (Vec(3) << pa[0], pa[1], 1.0).finished();
            Vec lb = chart.frame_inverse() * (Vec(3) << pb[0], pb[1], 1.0).finished();
            Vec cov(3);
            cov << la[1] * lb[2] - la[2] * lb[1], la[2] * lb[0] - la[0] * lb[2],
                la[0] * lb[1] - la[1] * lb[0];
            wall.plane = ProjHyperplane(cov);
            // Deep walls are nearly tangent to the quadric, so compute the
            // dual point directly rather than through the guarded pole().
            wall.pole = ProjPoint(Vec(base.form().fullPivLu().solve(wall.plane.covector)));

            bool dup = false;
            for (const auto& existing : ws.walls)
                if (hyperplanes_equal(wall.plane, existing.plane, 1e-7)) dup = true;
            if (dup) continue;
            ws.walls.push_back(std::move(wall));
        }
    }
    const int wcount = static_cast<int>(ws.walls.size());
    if (wcount == 0) throw Error(ErrorCode::WallMissesDomain, "wall system is empty");

    std::vector<Mat> carrier_mats(wcount), carrier_mats_inv(wcount);
    for (int w = 0; w < wcount; ++w) {
        carrier_mats[w] = rho0.evaluate(ws.walls[w].carrier).mat;
        carrier_mats_inv[w] = rho0.evaluate(inverse_word(ws.walls[w].carrier)).mat;
    }

    // Pairwise disjointness inside the base: boundary angles must not interleave.
    {
        Vec yc = chart.project(base.anchor());
        std::vector<double> ta(wcount), tb(wcount);
        for (int i = 0; i < wcount; ++i) {
            ta[i] = std::atan2(ws.walls[i].chord_a[1] - yc[1], ws.walls[i].chord_a[0] - yc[0]);
            tb[i] = std::atan2(ws.walls[i].chord_b[1] - yc[1], ws.walls[i].chord_b[0] - yc[0]);
        }
        auto wrap = [](double v) {
            while (v < 0) v += 2 * M_PI;
            while (v >= 2 * M_PI) v -= 2 * M_PI;
            return v;
        };
        auto arc_contains = [&](double a, double b, double x) {
            return wrap(x - a) < wrap(b - a);
        };
        for (int i = 0; i < wcount; ++i) {
            for (int j = i + 1; j < wcount; ++j) {
                double near = std::min(
                    std::min(std::abs(ta[i] - ta[j]), std::abs(ta[i] - tb[j])),
                    std::min(std::abs(tb[i] - ta[j]), std::abs(tb[i] - tb[j])));
                if (near < 1e-7) continue; // shared ideal endpoint: tangent, not crossing
                bool in1 = arc_contains(ta[i], tb[i], ta[j]);
                bool in2 = arc_contains(ta[i], tb[i], tb[j]);
                if (in1 != in2)
                    throw Error(ErrorCode::WallsIntersect,
                                "orbit walls cross inside the base domain");
            }
        }
    }

    // --- basepoint and side data ----------------------------------------------
    ws.midpoints.resize(wcount);
    for (int i = 0; i < wcount; ++i)
        ws.midpoints[i] = 0.5 * (ws.walls[i].chord_a + ws.walls[i].chord_b);

    auto side_val = [&](int w, const Vec& y) {
        return ws.walls[w].halfspace_normal.dot(y) - ws.walls[w].halfspace_offset;
    };

    // Basepoint candidates on both sides of the base wall. The deformed
    // holonomy restricts to the untouched vertex group only on one of the two
    // chambers bounding the base wall, so the root side is pinned a
    // posteriori by the equivariance test.
    int wall0_index = -1;
    for (int w = 0; w < wcount; ++w)
        if (hyperplanes_equal(ws.walls[w].plane, wall0.plane, 1e-9)) wall0_index = w;
    if (wall0_index < 0)
        throw Error(ErrorCode::NumericalFailure, "base wall missing from the wall system");

    // The root chamber must be adjacent to the base wall: the developing map
    // is normalized to the identity on a chamber bounding it. Step off the
    // base wall's chord midpoint, stopping short of the first other wall.
    auto pick_basepoint = [&](int wall_side) {
        const Wall& w0 = ws.walls[static_cast<std::size_t>(wall0_index)];
        Vec m0 = 0.5 * (w0.chord_a + w0.chord_b);
        Vec u = static_cast<double>(wall_side) * w0.halfspace_normal;
        double step = std::numeric_limits<double>::infinity();
        for (int wp = 0; wp < wcount; ++wp) {
            if (wp == wall0_index) continue;
            double den = ws.walls[wp].halfspace_normal.dot(u);
            if (std::abs(den) < 1e-14) continue;
            double sc = (ws.walls[wp].halfspace_offset -
                         ws.walls[wp].halfspace_normal.dot(m0)) / den;
            if (sc > 1e-12) step = std::min(step, sc);
        }
        Vec y = m0 + std::min(0.02, 0.45 * step) * u;
        if (!base.classify(chart.embed(y)).interior())
            throw Error(ErrorCode::NumericalFailure, "no basepoint adjacent to the base wall");
        return y;
    };
    Vec x_b = pick_basepoint(+1);

    // Side-sign matrix: sgn[wp][w] = side of wall wp at the midpoint of w.
    ws.sgn.assign(wcount, std::vector<int8_t>(wcount, 0));
    for (int wp = 0; wp < wcount; ++wp)
        for (int w = 0; w < wcount; ++w)
            ws.sgn[wp][w] = static_cast<int8_t>(sign_of(side_val(wp, ws.midpoints[w])));

    // Forward distance from an interior-or-near-boundary point to the base
    // quadric along a unit chart direction (no interiority precondition).
    auto forward_boundary_step = [&](const Vec& m, const Vec& u) {
        Vec l0 = chart.frame_inverse() * (Vec(3) << m[0], m[1], 1.0).finished();
        Vec d = chart.frame_inverse() * (Vec(3) << u[0], u[1], 0.0).finished();
        const Mat& q = base.form();
        double qa = d.dot(q * d);
        double qb = l0.dot(q * d);
        double qc = l0.dot(q * l0);
        double disc = qb * qb - qa * qc;
        if (!(qa > 0.0) || !(disc >= 0.0))
            throw Error(ErrorCode::NumericalFailure, "chamber step leaves the base domain");
        return (-qb + std::sqrt(disc)) / qa;
    };

    // --- geometric chamber tree -------------------------------------------------
    auto domain = std::shared_ptr<BentDomain>(new BentDomain());
    domain->base_ = std::make_shared<QuadricDomain>(base);
    domain->walls_ = ws.walls;
    domain->depth_ = params.depth;

    auto construct_tree = [&](const Vec& root) {
        domain->chambers_.clear();

        // Transported co-orientation: the positive side of a wall is the
        // carrier image of the root's side of the base wall.
        ProjPoint root_point = chart.embed(root);
        for (int w = 0; w < wcount; ++w) {
            ProjPoint z = ProjMap::from_unimodular(carrier_mats[w]).apply(root_point);
            domain->walls_[w].orientation = sign_of(side_val(w, chart.project(z)));
        }

        // Disjoint walls nest: the separators of any wall from the root are
        // totally ordered, so the separation count is the wall's tree depth
        // and its parent is its unique separator one level shallower.
        std::vector<int> side_b(wcount), sep(wcount, 0), parent_wall(wcount, -1);
        for (int w = 0; w < wcount; ++w) side_b[w] = sign_of(side_val(w, root));
        for (int w = 0; w < wcount; ++w)
            for (int wp = 0; wp < wcount; ++wp)
                if (wp != w && ws.sgn[wp][w] != side_b[wp]) ++sep[w];
        for (int w = 0; w < wcount; ++w) {
            if (sep[w] == 0) continue;
            for (int wp = 0; wp < wcount; ++wp)
                if (wp != w && ws.sgn[wp][w] != side_b[wp] && sep[wp] == sep[w] - 1) {
                    parent_wall[w] = wp;
                    break;
                }
            if (parent_wall[w] < 0)
                throw Error(ErrorCode::NumericalFailure,
                            "wall nesting order is inconsistent");
        }
        std::vector<std::vector<int>> children(wcount + 1); // index 0 = root
        for (int w = 0; w < wcount; ++w)
            children[parent_wall[w] + 1].push_back(w);

        // Chambers: the root plus the far side of every wall within depth.
        std::vector<int> chamber_of_wall(wcount, -1);
        {
            Chamber c;
            c.id = 0;
            c.parent = -1;
            c.parent_wall = -1;
            c.depth = 0;
            c.rep_point = root;
            c.map = ProjMap::identity(n + 1);
            c.map_inv = ProjMap::identity(n + 1);
            domain->chambers_.push_back(std::move(c));
        }
        std::vector<int> order(wcount);
        for (int w = 0; w < wcount; ++w) order[w] = w;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return sep[a] < sep[b]; });
        for (int w : order) {
            if (sep[w] >= params.depth) continue;
            Chamber c;
            c.id = static_cast<int>(domain->chambers_.size());
            c.parent = sep[w] == 0 ? 0 : chamber_of_wall[parent_wall[w]];
            c.parent_wall = w;
            c.depth = sep[w] + 1;

            // Representative: step off the wall midpoint into the far side,
            // stopping short of the chamber's own walls and the boundary.
            Vec u = -static_cast<double>(side_b[w]) * ws.walls[w].halfspace_normal;
            const Vec& m = ws.midpoints[w];
            double step = forward_boundary_step(m, u);
            for (int wc : children[w + 1]) {
                double den = ws.walls[wc].halfspace_normal.dot(u);
                if (std::abs(den) < 1e-14) continue;
                double s = (ws.walls[wc].halfspace_offset -
                            ws.walls[wc].halfspace_normal.dot(m)) / den;
                if (s > 1e-13) step = std::min(step, s);
            }
            c.rep_point = m + std::min(0.01, 0.45 * step) * u;
            c.map = ProjMap::identity(n + 1);
            c.map_inv = ProjMap::identity(n + 1);
            chamber_of_wall[w] = c.id;
            domain->chambers_.push_back(std::move(c));
        }

        // Facets: the parent wall plus the chamber's child walls (children
        // beyond the truncation stay facets with no chamber attached).
        auto add_facet = [&](Chamber& c, int w, int child_chamber) {
            c.facet_walls.push_back(w);
            c.facet_sides.push_back(static_cast<double>(sign_of(side_val(w, c.rep_point))));
            c.facet_children.push_back(child_chamber);
        };
        for (int w : children[0]) // root facets
            add_facet(domain->chambers_[0], w, chamber_of_wall[w]);
        for (int w = 0; w < wcount; ++w) {
            if (chamber_of_wall[w] < 0) continue;
            Chamber& c = domain->chambers_[chamber_of_wall[w]];
            add_facet(c, w, c.parent); // crossing back over the parent wall
            for (int wc : children[w + 1]) add_facet(c, wc, chamber_of_wall[wc]);
        }
    };
    construct_tree(x_b);

    // --- cocycle assignment with the equivariance-pinned sign --------------------
    // The conjugated bending map of an image wall is computed by conjugating
    // the base bend: better conditioned than re-deriving it from the image
    // pole, whose pairing with the image covector degenerates for deep walls.
    Mat bend_plus = bending_map(wall0.plane, pole0, params.t, n).mat;
    Mat bend_minus = bending_map(wall0.plane, pole0, -params.t, n).mat;
    auto assign_maps = [&](int eps) {
        for (auto& cham : domain->chambers_) {
            if (cham.parent < 0) {
                cham.map = ProjMap::identity(n + 1);
                cham.map_inv = ProjMap::identity(n + 1);
                continue;
            }
            const Chamber& par = domain->chambers_[cham.parent];
            const Wall& wall = domain->walls_[cham.parent_wall];
            int child_side = sign_of(side_val(cham.parent_wall, cham.rep_point));
            // Crossing into the transported positive side applies +eps t.
            double dir = (child_side == static_cast<int>(wall.orientation) ? 1.0 : -1.0) * eps;
            const Mat& bend0 = dir > 0 ? bend_plus : bend_minus;
            Mat conj = par.map.mat * carrier_mats[cham.parent_wall];
            Mat conj_inv = carrier_mats_inv[cham.parent_wall] * par.map_inv.mat;
            cham.map = ProjMap::from_unimodular(conj * bend0 * conj_inv * par.map.mat);
            cham.map_inv = cham.map.inverse();
        }
    };

    const bool debug_bend = std::getenv("HB_DEBUG_BEND") != nullptr;

    // A (chamber, generator) pair is testable only when every wall along the
    // image chamber's path keeps a carrier within the generated word budget;
    // otherwise the image lands in a region whose separating wall is missing
    // and the located chamber is wrong.
    std::vector<std::string> strip_letters;
    for (const auto& delta : dec.wall_subgroup)
        if (delta.size() == 1) strip_letters.push_back(delta.front().first);
    auto image_walls_in_budget = [&](const Chamber& cham, const std::string& gname, int exp,
                                     int budget) {
        for (int cur = cham.id; domain->chambers_[cur].parent >= 0;
             cur = domain->chambers_[cur].parent) {
            Word w = domain->walls_[domain->chambers_[cur].parent_wall].carrier;
            if (static_cast<int>(w.size()) > budget) return false;
            Word moved;
            moved.emplace_back(gname, exp);
            for (const auto& letter : w) {
                if (!moved.empty() && moved.back().first == letter.first &&
                    moved.back().second == -letter.second)
                    moved.pop_back();
                else
                    moved.push_back(letter);
            }
            while (!moved.empty() &&
                   std::find(strip_letters.begin(), strip_letters.end(),
                             moved.back().first) != strip_letters.end())
                moved.pop_back();
            if (static_cast<int>(moved.size()) > std::min(budget + 1, params.wall_words))
                return false;
        }
        return true;
    };

    auto equivariance = [&](int budget, int* tested_out) {
        double worst = 0.0;
        int tested = 0;
        for (const auto& cham : domain->chambers_) {
            if (cham.depth > std::min(2, params.depth - 1)) continue;
            for (const auto& gname : rho0.generators) {
                if (!image_walls_in_budget(cham, gname, 1, budget)) continue;
                const ProjMap& g0 = rho0.images.at(gname);
                const ProjMap& gt = rho_t.images.at(gname);
                ProjPoint image = g0.apply(chart.embed(cham.rep_point));
                int target = domain->locate_base_chamber(image);
                const Chamber& tc = domain->chambers_[target];
                // Skip hits that land near a wall or past the truncation.
                Vec yi = chart.project(image);
                bool clear = true;
                for (std::size_t k = 0; k < tc.facet_walls.size(); ++k) {
                    double sv = side_val(tc.facet_walls[k], yi);
                    if (std::abs(sv) < 1e-7) clear = false;
                    if (sign_of(sv) != static_cast<int>(tc.facet_sides[k])) clear = false;
                }
                if (!clear) continue;
                ++tested;
                Mat lhs = tc.map.mat * g0.mat;
                Mat rhs = gt.mat * cham.map.mat;
                // Compare as projective maps: action on a frame, canonical
                // representatives. Raw matrix differences pick up the
                // determinant drift of long products.
                double r = 0.0;
                for (int col = 0; col < n + 2; ++col) {
                    Vec v;
                    if (col < n + 1) {
                        v = Vec::Zero(n + 1);
                        v[col] = 1.0;
                    } else {
                        v = chart.frame_inverse() *
                            (Vec(3) << cham.rep_point[0], cham.rep_point[1], 1.0).finished();
                    }
                    Vec lv = canonical_rep(lhs * v);
                    Vec rv = canonical_rep(rhs * v);
                    r = std::max(r, std::min((lv - rv).norm(), (lv + rv).norm()));
                }
                if (debug_bend && r > 1e-6)
                    std::fprintf(stderr,
                                 "  equiv fail: cham %d (depth %d) gen %s -> target %d "
                                 "(depth %d) residual %.3e\n",
                                 cham.id, cham.depth, gname.c_str(), target, tc.depth, r);
                worst = std::max(worst, r);
            }
        }
        if (tested_out) *tested_out = tested;
        return worst;
    };

    // The deformed holonomy equals the base holonomy only on the vertex
    // group of one side of the base wall, so the root chamber side and the
    // crossing sign are pinned jointly by the equivariance residual.
    result.equivariance_residual = std::numeric_limits<double>::infinity();
    if (params.t == 0.0) {
        assign_maps(1);
        result.cocycle_sign = 1;
        result.equivariance_residual = equivariance(2, nullptr);
    } else {
        // Pin root side and sign with a loose threshold over all budget-valid
        // pairs (sign errors are order one, precision wobbles of deep walls
        // are orders of magnitude below), then report the residual over the
        // short-carrier pairs where transport is at full precision.
        bool accepted = false;
        for (int root_side : {+1, -1}) {
            if (accepted) break;
            if (root_side < 0) construct_tree(pick_basepoint(-1));
            for (int eps : {1, -1}) {
                assign_maps(eps);
                int tested = 0;
                // Carrier transport noise grows like cond^2 eps with word
                // length; budget 4 keeps it orders of magnitude below a sign
                // error, which is order one.
                double r = equivariance(std::min(4, params.wall_words - 1), &tested);
                if (debug_bend)
                    std::fprintf(stderr, "combo root=%d eps=%d tested=%d worst=%.3e\n",
                                 root_side, eps, tested, r);
                if (tested == 0)
                    throw Error(ErrorCode::NumericalFailure,
                                "equivariance test had no usable samples");
                if (r < 1e-2) {
                    result.cocycle_sign = eps;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted)
            throw Error(ErrorCode::NumericalFailure,
                        "no root side and cocycle sign match the deformed holonomy");
        int tested_tight = 0;
        result.equivariance_residual = equivariance(2, &tested_tight);
        if (tested_tight == 0 || result.equivariance_residual > 1e-6)
            throw Error(ErrorCode::NumericalFailure,
                        "short-carrier equivariance residual out of tolerance");
    }

    domain->identity_maps_ = params.t == 0.0;

    // Equivariant reduction maps for deep membership queries.
    domain->reduce_maps_.clear();
    domain->reduce_maps_.reserve(wcount);
    for (int w = 0; w < wcount; ++w)
        domain->reduce_maps_.push_back(rho_t.evaluate(inverse_word(ws.walls[w].carrier)));

    result.domain = domain;
    return result;
}

} // namespace hb
