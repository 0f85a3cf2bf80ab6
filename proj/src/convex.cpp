#include "hb/convex.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace hb {

namespace {

std::pair<ProjPoint, ProjPoint> bisect_with(const std::function<Containment(const ProjPoint&)>& classify_raw,
                                            const AffineChart& chart, const ProjPoint& x,
                                            const ProjPoint& through, int max_iter) {
    // Points at or beyond the chart's hyperplane at infinity lie outside any
    // domain whose closure the chart contains.
    auto classify = [&](const ProjPoint& p) {
        try {
            return classify_raw(p);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AtInfinity) throw;
            Containment c;
            c.region = Region::Exterior;
            c.margin = std::numeric_limits<double>::infinity();
            return c;
        }
    };
    if (!classify(x).interior())
        throw Error(ErrorCode::NotInterior, "chord base point is not interior");
    Vec y0 = chart.project(x);
    Vec y1 = chart.project(through);
    Vec d = y1 - y0;
    double n = d.norm();
    if (n < 1e-14) throw Error(ErrorCode::ZeroVector, "chord direction is degenerate");
    d /= n;

    // Bisect on the sign of the containment margin so the endpoint converges
    // to the true boundary, not to the inner edge of the tolerance band.
    auto hit = [&](double sign) {
        double lo = 0.0, hi = 0.5;
        int iter = 0;
        while (true) {
            Containment c = classify(chart.embed(y0 + (sign * hi) * d));
            if (c.margin >= 0.0) break;
            lo = hi;
            hi *= 2.0;
            if (++iter > 80)
                throw Error(ErrorCode::NumericalFailure, "chord bisection found no exterior bracket");
        }
        for (int i = 0; i < max_iter && hi - lo > 1e-13 * (1.0 + hi); ++i) {
            double mid = 0.5 * (lo + hi);
            if (classify(chart.embed(y0 + (sign * mid) * d)).margin < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return chart.embed(y0 + (sign * 0.5 * (lo + hi)) * d);
    };

    return {hit(-1.0), hit(1.0)};
}

} // namespace

std::pair<ProjPoint, ProjPoint> ConvexDomain::ray_boundary(const ProjPoint& x,
                                                           const Vec& dir) const {
    Vec y = chart().project(x);
    double n = dir.norm();
    if (n < 1e-14) throw Error(ErrorCode::ZeroVector, "ray direction is zero");
    return chord(x, chart().embed(y + dir / n));
}

std::pair<Vec, Vec> ConvexDomain::bounding_box() const {
    {
        std::lock_guard<std::mutex> lock(bbox_mutex_);
        if (bbox_cache_) return *bbox_cache_;
    }
    auto box = compute_bounding_box();
    std::lock_guard<std::mutex> lock(bbox_mutex_);
    bbox_cache_ = box;
    return *bbox_cache_;
}

std::pair<Vec, Vec> ConvexDomain::compute_bounding_box() const {
    const int n = dim();
    ProjPoint a = anchor();
    Vec ya = chart().project(a);
    Vec lo = ya, hi = ya;
    Rng rng(0x9d2c5680u);
    auto account = [&](const ProjPoint& p) {
        Vec y;
        try {
            y = chart().project(p);
        } catch (const Error&) {
            return; // boundary point at chart infinity: skip
        }
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
    };
    for (int i = 0; i < n; ++i) {
        Vec d = Vec::Zero(n);
        d[i] = 1.0;
        auto [pm, pp] = ray_boundary(a, d);
        account(pm);
        account(pp);
    }
    const int extra = n == 2 ? 64 : 128;
    for (int k = 0; k < extra; ++k) {
        auto [pm, pp] = ray_boundary(a, rng.direction(n));
        account(pm);
        account(pp);
    }
    Vec pad = 0.02 * (hi - lo).cwiseMax(1e-6 * Vec::Ones(n));
    return {lo - pad, hi + pad};
}

ProjPoint ConvexDomain::sample_interior(Rng& rng, int max_tries) const {
    auto [lo, hi] = bounding_box();
    for (int t = 0; t < max_tries; ++t) {
        ProjPoint p = chart().embed(rng.box_point(lo, hi));
        Containment c = classify(p);
        if (c.interior() && c.exact) return p;
    }
    throw Error(ErrorCode::NumericalFailure, "interior rejection sampling failed");
}

// ---------------------------------------------------------------------------
// QuadricDomain

QuadricDomain::QuadricDomain(const Mat& q, double boundary_band) : band_(boundary_band) {
    init(q);
    ProjHyperplane inf = polar(center_, q_);
    chart_ = AffineChart::with_infinity(inf);
}

QuadricDomain::QuadricDomain(const Mat& q, const AffineChart& chart, double boundary_band)
    : chart_(chart), band_(boundary_band) {
    init(q);
}

void QuadricDomain::init(const Mat& q) {
    Mat sym = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    const Vec& ev = es.eigenvalues();
    double scale = ev.cwiseAbs().maxCoeff();
    if (scale < 1e-300) throw Error(ErrorCode::InvalidSignature, "zero quadratic form");
    int neg = 0, pos = 0;
    int neg_index = -1;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-10 * scale) {
            ++neg;
            neg_index = i;
        } else if (ev[i] > 1e-10 * scale) {
            ++pos;
        }
    }
    if (neg != 1 || pos != ev.size() - 1)
        throw Error(ErrorCode::InvalidSignature, "quadratic form must have signature (n,1)");
    q_ = sym / scale;
    center_ = ProjPoint(es.eigenvectors().col(neg_index));
}

Containment QuadricDomain::classify(const ProjPoint& x) const {
    double v = form_value(x);
    Containment c;
    c.margin = v;
    if (v < -band_)
        c.region = Region::Interior;
    else if (v > band_)
        c.region = Region::Exterior;
    else
        c.region = Region::Boundary;
    return c;
}

std::pair<ProjPoint, ProjPoint> QuadricDomain::chord(const ProjPoint& x,
                                                     const ProjPoint& through) const {
    if (!classify(x).interior())
        throw Error(ErrorCode::NotInterior, "chord base point is not interior");
    Vec x0 = chart_.lift(x);
    Vec d = chart_.lift(through) - x0;
    double a = d.dot(q_ * d);
    double b = x0.dot(q_ * d);
    double c = x0.dot(q_ * x0);
    double disc = b * b - a * c;
    if (!(a > 0.0) || !(disc > 0.0))
        throw Error(ErrorCode::NumericalFailure, "chord does not meet the quadric twice");
    double sq = std::sqrt(disc);
    double qq = -(b + (b >= 0 ? sq : -sq));
    double t1 = qq / a;
    double t2 = c / qq;
    double t_fwd = std::max(t1, t2);
    double t_bwd = std::min(t1, t2);
    return {ProjPoint(x0 + t_bwd * d), ProjPoint(x0 + t_fwd * d)};
}

QuadricDomain QuadricDomain::transformed(const ProjMap& g) const {
    Mat gi = g.inverse().mat;
    return QuadricDomain(gi.transpose() * q_ * gi, band_);
}

// ---------------------------------------------------------------------------
// Polytope

Polytope::Polytope(std::vector<std::pair<Vec, double>> halfspaces, const AffineChart& chart,
                   double boundary_band)
    : halfspaces_(std::move(halfspaces)), chart_(chart), band_(boundary_band) {
    init();
}

Polytope::Polytope(const std::vector<std::pair<ProjHyperplane, int>>& walls,
                   const AffineChart& chart, double boundary_band)
    : chart_(chart), band_(boundary_band) {
    const int n = chart_.dim();
    for (const auto& [plane, side] : walls) {
        // side * <covector, lift(y)> <= 0 as an affine inequality a.y <= b.
        Vec c = chart_.frame_inverse().transpose() * plane.covector;
        Vec a = side * c.head(n);
        double b = -side * c[n];
        halfspaces_.emplace_back(a, b);
    }
    init();
}

void Polytope::init() {
    const int n = chart_.dim();
    if (halfspaces_.empty()) throw Error(ErrorCode::UnboundedDomain, "polytope needs half-spaces");
    // Interior point by subgradient descent on the max constraint value.
    Vec y = Vec::Zero(n);
    for (int it = 0; it < 400; ++it) {
        double worst = -std::numeric_limits<double>::infinity();
        Vec grad = Vec::Zero(n);
        for (const auto& [a, b] : halfspaces_) {
            double v = a.dot(y) - b;
            if (v > worst) {
                worst = v;
                grad = a;
            }
        }
        if (worst < -1e-3) break;
        double gn = grad.norm();
        if (gn < 1e-14) break;
        y -= (worst / (gn * gn) + 0.05 / gn) * grad;
    }
    anchor_ = chart_.embed(y);
    if (!classify(anchor_).interior())
        throw Error(ErrorCode::UnboundedDomain, "polytope has empty interior");
    // Bounded-in-chart check on sampled recession directions.
    Rng rng(0xb5297a4du);
    for (int k = 0; k < 64 + 2 * n; ++k) {
        Vec d = k < 2 * n ? Vec(Vec::Zero(n)) : rng.direction(n);
        if (k < 2 * n) d[k / 2] = (k % 2 == 0) ? 1.0 : -1.0;
        double grow = -std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : halfspaces_) grow = std::max(grow, a.dot(d));
        if (grow < 1e-12)
            throw Error(ErrorCode::UnboundedDomain, "polytope is unbounded in its chart");
    }
}

Polytope Polytope::box(const Vec& lo, const Vec& hi) {
    const int n = static_cast<int>(lo.size());
    std::vector<std::pair<Vec, double>> hs;
    for (int i = 0; i < n; ++i) {
        Vec a = Vec::Zero(n);
        a[i] = 1.0;
        hs.emplace_back(a, hi[i]);
        hs.emplace_back(-a, -lo[i]);
    }
    return Polytope(std::move(hs), AffineChart::standard(n));
}

Containment Polytope::classify(const ProjPoint& x) const {
    Containment c;
    Vec y;
    try {
        y = chart_.project(x);
    } catch (const Error&) {
        c.region = Region::Exterior;
        c.margin = std::numeric_limits<double>::infinity();
        return c;
    }
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : halfspaces_) m = std::max(m, a.dot(y) - b);
    c.margin = m;
    if (m < -band_)
        c.region = Region::Interior;
    else if (m > band_)
        c.region = Region::Exterior;
    else
        c.region = Region::Boundary;
    return c;
}

std::pair<ProjPoint, ProjPoint> Polytope::chord(const ProjPoint& x,
                                                const ProjPoint& through) const {
    if (!classify(x).interior())
        throw Error(ErrorCode::NotInterior, "chord base point is not interior");
    Vec y0 = chart_.project(x);
    Vec d = chart_.project(through) - y0;
    if (d.norm() < 1e-14) throw Error(ErrorCode::ZeroVector, "chord direction is degenerate");
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : halfspaces_) {
        double num = b - a.dot(y0);
        double den = a.dot(d);
        if (std::abs(den) < 1e-15) {
            if (num < 0) throw Error(ErrorCode::NumericalFailure, "chord misses the polytope");
            continue;
        }
        double t = num / den;
        if (den > 0)
            t_hi = std::min(t_hi, t);
        else
            t_lo = std::max(t_lo, t);
    }
    if (!(t_lo < 0 && t_hi > 0))
        throw Error(ErrorCode::NumericalFailure, "polytope chord clipping failed");
    return {chart_.embed(y0 + t_lo * d), chart_.embed(y0 + t_hi * d)};
}

// ---------------------------------------------------------------------------
// BentDomain

double BentDomain::wall_side(int wall, const ProjPoint& base_point) const {
    const Wall& w = walls_[wall];
    Vec y = base_->chart().project(base_point);
    return w.halfspace_normal.dot(y) - w.halfspace_offset;
}

BentDomain::WalkResult BentDomain::walk(const ProjPoint& x) const {
    WalkResult best;
    double best_margin = std::numeric_limits<double>::infinity();
    bool frontier_contact = false;
    int first_frontier_wall = -1;

    std::vector<char> visited(chambers_.size(), 0);
    std::vector<int> stack{0};
    visited[0] = 1;
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        const Chamber& c = chambers_[cur];
        ProjPoint u = c.map_inv.apply(x);
        Vec y;
        try {
            y = base_->chart().project(u);
        } catch (const Error&) {
            continue; // pullback at base-chart infinity: no verdict here
        }
        bool inside_cell = true;
        for (std::size_t k = 0; k < c.facet_walls.size(); ++k) {
            const Wall& w = walls_[c.facet_walls[k]];
            double su = w.halfspace_normal.dot(y) - w.halfspace_offset;
            if (su * c.facet_sides[k] >= 0.0) continue;
            inside_cell = false;
            int child = c.facet_children[k];
            if (child < 0) {
                frontier_contact = true;
                if (first_frontier_wall < 0) first_frontier_wall = c.facet_walls[k];
            } else if (!visited[child]) {
                visited[child] = 1;
                stack.push_back(child);
            }
        }
        if (!inside_cell) continue;
        double margin = base_->classify(u).margin;
        if (margin < best_margin) {
            best_margin = margin;
            best.chamber = cur;
            best.pulled = u;
            best.leaf = c.depth >= depth_;
            if (margin < 0.0) break; // interior or boundary certificate
        }
    }
    if (best.chamber < 0) { // nothing reachable: classify through the root
        best.chamber = 0;
        best.pulled = chambers_[0].map_inv.apply(x);
    }
    best.frontier = frontier_contact;
    best.frontier_wall = first_frontier_wall;
    return best;
}

Containment BentDomain::classify(const ProjPoint& x) const {
    return classify(x, Membership::Truncated);
}

Containment BentDomain::classify(const ProjPoint& x, Membership mode) const {
    if (mode == Membership::Truncated) {
        WalkResult r = walk(x);
        Containment c = base_->classify(r.pulled);
        // A verdict is exact when the walk never left the built tree, the
        // witnessing chamber is not a deepest-level leaf (whose further
        // subdivision is unknown), and a strict verdict clears the collar
        // where beyond-budget walls could flip it. With identity maps the
        // truncation is the whole domain and every verdict is exact.
        // Interior certificates are sound regardless of frontier contact
        // elsewhere in the search; exterior verdicts need the whole reachable
        // tree clean.
        bool strict_ok = c.region == Region::Boundary || std::abs(c.margin) >= margin_collar_;
        if (c.region == Region::Exterior)
            c.exact = identity_maps_ || (!r.frontier && !r.leaf && strict_ok);
        else
            c.exact = identity_maps_ || (!r.leaf && strict_ok);
        return c;
    }
    ProjPoint z = x;
    for (int i = 0; i < max_teleports_; ++i) {
        WalkResult r = walk(z);
        Containment probe = base_->classify(r.pulled);
        bool strict_ok = probe.region == Region::Boundary ||
                         std::abs(probe.margin) >= margin_collar_;
        bool sound = probe.region == Region::Exterior
                         ? (!r.frontier && !r.leaf && strict_ok)
                         : (!r.leaf && strict_ok);
        if (identity_maps_ || sound) {
            probe.exact = true;
            return probe;
        }
        int unfold = r.frontier ? r.frontier_wall : chambers_[r.chamber].parent_wall;
        if (unfold < 0) break;
        z = reduce_maps_[unfold].apply(z);
    }
    WalkResult r = walk(z);
    Containment c = base_->classify(r.pulled);
    c.exact = false;
    return c;
}

std::pair<ProjPoint, ProjPoint> BentDomain::chord(const ProjPoint& x,
                                                  const ProjPoint& through) const {
    return chord(x, through, Membership::Truncated);
}

std::pair<ProjPoint, ProjPoint> BentDomain::chord(const ProjPoint& x, const ProjPoint& through,
                                                  Membership mode) const {
    return bisect_with([this, mode](const ProjPoint& p) { return classify(p, mode); },
                       chart(), x, through, 200);
}

ProjPoint BentDomain::anchor() const {
    return base_->chart().embed(chambers_[0].rep_point);
}

int BentDomain::locate_base_chamber(const ProjPoint& base_point) const {
    Vec y = base_->chart().project(base_point);
    int cur = 0, prev = -1;
    int budget = 4 * depth_ + 32;
    while (true) {
        const Chamber& c = chambers_[cur];
        int best = -1;
        double best_t = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c.facet_walls.size(); ++k) {
            if (c.facet_children[k] == prev && prev >= 0) continue;
            const Wall& w = walls_[c.facet_walls[k]];
            double su = w.halfspace_normal.dot(y) - w.halfspace_offset;
            if (su * c.facet_sides[k] >= 0.0) continue;
            double sr = w.halfspace_normal.dot(c.rep_point) - w.halfspace_offset;
            double t = sr / (sr - su);
            if (t < best_t) {
                best_t = t;
                best = static_cast<int>(k);
            }
        }
        if (best < 0 || --budget < 0) return cur;
        int child = c.facet_children[best];
        if (child < 0) return cur;
        prev = cur;
        cur = child;
    }
}

std::pair<ProjPoint, int> BentDomain::pull_back(const ProjPoint& x) const {
    WalkResult r = walk(x);
    return {r.pulled, r.chamber};
}

std::pair<Vec, Vec> BentDomain::compute_bounding_box() const {
    const AffineChart& ch = base_->chart();
    Vec lo = chambers_[0].rep_point, hi = chambers_[0].rep_point;
    auto account = [&](const ProjPoint& p) {
        Vec y;
        try {
            y = ch.project(p);
        } catch (const Error&) {
            return;
        }
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
    };
    for (const auto& c : chambers_) {
        if (c.parent_wall < 0) continue;
        const Wall& w = walls_[c.parent_wall];
        account(c.map.apply(ch.embed(w.chord_a)));
        account(c.map.apply(ch.embed(w.chord_b)));
        for (std::size_t k = 0; k < c.facet_walls.size(); ++k) {
            const Wall& fw = walls_[c.facet_walls[k]];
            account(c.map.apply(ch.embed(fw.chord_a)));
            account(c.map.apply(ch.embed(fw.chord_b)));
        }
    }
    Vec pad = 0.05 * (hi - lo).cwiseMax(1e-6 * Vec::Ones(2));
    return {lo - pad, hi + pad};
}

// ---------------------------------------------------------------------------
// Generic helpers

std::pair<ProjPoint, ProjPoint> bisect_chord(const ConvexDomain& domain, const ProjPoint& x,
                                             const ProjPoint& through, int max_iter) {
    return bisect_with([&domain](const ProjPoint& p) { return domain.classify(p); },
                       domain.chart(), x, through, max_iter);
}

PliDomain::PliDomain(std::shared_ptr<const ConvexDomain> inner, const ProjHyperplane& wall,
                     const ProjMap& bend, const ProjPoint& kept_side_point)
    : inner_(std::move(inner)), wall_(wall), bend_(bend), bend_inv_(bend.inverse()),
      anchor_(kept_side_point) {
    kept_sign_ = inner_->chart().side_value(wall_.covector, kept_side_point);
    if (std::abs(kept_sign_) < kTolGeometry)
        throw Error(ErrorCode::DegenerateConfiguration, "kept-side point lies on the wall");
    kept_sign_ = kept_sign_ > 0 ? 1.0 : -1.0;
    if (!inner_->classify(anchor_).interior())
        throw Error(ErrorCode::NotInterior, "kept-side point must be interior");
}

Containment PliDomain::classify(const ProjPoint& x) const {
    double s;
    try {
        s = inner_->chart().side_value(wall_.covector, x);
    } catch (const Error&) {
        Containment c;
        c.region = Region::Exterior;
        return c;
    }
    if (s * kept_sign_ >= 0.0) return inner_->classify(x);
    return inner_->classify(bend_inv_.apply(x));
}

std::pair<ProjPoint, ProjPoint> PliDomain::chord(const ProjPoint& x,
                                                 const ProjPoint& through) const {
    return bisect_chord(*this, x, through);
}

// ---------------------------------------------------------------------------
// Probes and pencils

std::vector<ChordViolation> strict_convexity_probe(const ConvexDomain& domain, int samples,
                                                   std::uint64_t seed, double resolution,
                                                   double min_chord) {
    auto [lo, hi] = domain.bounding_box();
    double scale = 0.5 * (hi - lo).norm();
    if (min_chord < 0) min_chord = 4.0 * std::sqrt(resolution) * scale;
    Rng rng = Rng::split(seed, 0x5c);
    const AffineChart& chart = domain.chart();
    ProjPoint anchor = domain.anchor();
    Vec ya = chart.project(anchor);
    std::vector<ChordViolation> out;
    for (int i = 0; i < samples; ++i) {
        // Independent pair of boundary points (forward endpoints of two
        // random chords); a chord's own endpoints never share a flat face.
        // Boundary points past the truncation frontier of a piecewise domain
        // are excluded.
        ProjPoint pa = domain.ray_boundary(domain.sample_interior(rng),
                                           rng.direction(domain.dim())).second;
        ProjPoint pb = domain.ray_boundary(domain.sample_interior(rng),
                                           rng.direction(domain.dim())).second;
        Containment ca = domain.classify(pa), cb = domain.classify(pb);
        if (!ca.exact || !cb.exact || !ca.boundary() || !cb.boundary()) continue;
        Vec a = chart.project(pa), b = chart.project(pb);
        double len = (a - b).norm();
        if (len < min_chord) continue;
        Vec ym = 0.5 * (a + b);
        ProjPoint m = chart.embed(ym);
        double depth = 0.0;
        if (domain.classify(m).interior()) {
            if ((ym - ya).norm() < 1e-9) continue;
            auto [qm, qp] = domain.chord(anchor, m);
            depth = (chart.project(qp) - ym).norm();
        }
        if (depth < resolution) {
            ChordViolation v;
            v.endpoint_a = pa;
            v.endpoint_b = pb;
            v.midpoint = m;
            v.midpoint_depth = depth;
            out.push_back(v);
        }
    }
    return out;
}

QuadricDomain pencil_ellipsoid(const QuadricDomain& e, const ProjPoint& p, double s) {
    Containment c = e.classify(p);
    if (!c.boundary())
        throw Error(ErrorCode::NotOnBoundary, "pencil base point is not on the boundary");
    Vec tau = e.form() * p.rep;
    Mat qs = e.form() + s * (tau * tau.transpose());
    try {
        return QuadricDomain(qs);
    } catch (const Error& err) {
        if (err.code() == ErrorCode::InvalidSignature)
            throw Error(ErrorCode::SignatureLost, "pencil member left signature (n,1)");
        throw;
    }
}

} // namespace hb
