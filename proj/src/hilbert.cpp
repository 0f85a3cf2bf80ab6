#include "hb/hilbert.hpp"

#include "hb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hb {

namespace {

double unit_ball_constant(int n) {
    // Lebesgue volume of the Euclidean unit ball.
    return std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

} // namespace

MetricContext::MetricContext(const ConvexDomain& dom) : domain(&dom), chart(dom.chart()) {}

MetricContext::MetricContext(const ConvexDomain& dom, const AffineChart& chart_override)
    : domain(&dom), chart(chart_override) {
    // The chart must contain the closure: chord endpoints in sampled
    // directions have to stay clear of its hyperplane at infinity.
    ProjPoint a = dom.anchor();
    Vec inf = chart.at_infinity().covector;
    Rng rng(0x51ed2701u);
    for (int k = 0; k < 32; ++k) {
        auto [pm, pp] = dom.ray_boundary(a, rng.direction(dom.dim()));
        for (const ProjPoint* p : {&pm, &pp}) {
            if (std::abs(inf.dot(p->rep)) < 1e-8)
                throw Error(ErrorCode::UnboundedDomain,
                            "chart hyperplane at infinity meets the domain closure");
        }
    }
}

double distance(const MetricContext& ctx, const ProjPoint& x, const ProjPoint& y) {
    const ConvexDomain& dom = *ctx.domain;
    if (!dom.classify(x).interior() || !dom.classify(y).interior())
        throw Error(ErrorCode::NotInterior, "Hilbert distance needs interior points");
    Vec cx = ctx.chart.project(x), cy = ctx.chart.project(y);
    double sep = (cy - cx).norm();
    if (sep < 1e-15) return 0.0;
    auto [p, q] = dom.chord(x, y);
    Vec d = (cy - cx) / sep;
    // p behind x, q beyond y; cross-ratio of (p, x, y, q) along the chord.
    // An endpoint escaping to the chart's horizon contributes its limit
    // factor 1 (this happens only past the truncation of piecewise domains).
    double factor_p, factor_q;
    try {
        double tp = (ctx.chart.project(p) - cx).dot(d);
        factor_p = (sep - tp) / (-tp);
    } catch (const Error&) {
        factor_p = 1.0;
    }
    try {
        double tq = (ctx.chart.project(q) - cx).dot(d);
        factor_q = tq / (tq - sep);
    } catch (const Error&) {
        factor_q = 1.0;
    }
    return 0.5 * std::log(factor_p * factor_q);
}

double finsler_norm(const MetricContext& ctx, const ProjPoint& x, const Vec& v) {
    const ConvexDomain& dom = *ctx.domain;
    if (!dom.classify(x).interior())
        throw Error(ErrorCode::NotInterior, "Finsler norm needs an interior point");
    double n = v.norm();
    if (n < 1e-15) throw Error(ErrorCode::ZeroVector, "Finsler norm of the zero vector");
    Vec cx = ctx.chart.project(x);
    auto [pm, pp] = dom.chord(x, ctx.chart.embed(cx + v / n));
    double inv_m = 0.0, inv_p = 0.0;
    try {
        inv_m = 1.0 / (ctx.chart.project(pm) - cx).norm();
    } catch (const Error&) {
    }
    try {
        inv_p = 1.0 / (ctx.chart.project(pp) - cx).norm();
    } catch (const Error&) {
    }
    return 0.5 * (inv_m + inv_p) * n;
}

double unit_ball_volume(const MetricContext& ctx, const ProjPoint& x, std::uint64_t seed) {
    const ConvexDomain& dom = *ctx.domain;
    const int n = dom.dim();
    Vec cx = ctx.chart.project(x);
    // The Hilbert Finsler norm is reversible, so the radial extent of the
    // unit tangent ball is an even function of the direction.
    auto radial = [&](const Vec& dir) {
        auto [pm, pp] = dom.chord(x, ctx.chart.embed(cx + dir));
        double inv_m = 0.0, inv_p = 0.0;
        try {
            inv_m = 1.0 / (ctx.chart.project(pm) - cx).norm();
        } catch (const Error&) {
        }
        try {
            inv_p = 1.0 / (ctx.chart.project(pp) - cx).norm();
        } catch (const Error&) {
        }
        if (inv_m + inv_p <= 0.0)
            throw Error(ErrorCode::NumericalFailure, "degenerate tangent ball radius");
        return 2.0 / (inv_m + inv_p);
    };
    if (n == 2) {
        // 64-point angular rule; evenness halves the chord solves.
        const int half = 32;
        double acc = 0.0;
        for (int k = 0; k < half; ++k) {
            double theta = M_PI * k / half;
            Vec dir(2);
            dir << std::cos(theta), std::sin(theta);
            double r = radial(dir);
            acc += 2.0 * r * r;
        }
        double lebesgue = 0.5 * acc * (2.0 * M_PI / (2 * half));
        return lebesgue / unit_ball_constant(2);
    }
    Rng rng = Rng::split(seed, 0x6b);
    const int m = 256;
    double acc = 0.0;
    for (int k = 0; k < m; ++k) acc += std::pow(radial(rng.direction(n)), n);
    return acc / m; // kappa_n cancels against the normalized Lebesgue measure
}

double busemann_density(const MetricContext& ctx, const ProjPoint& x, std::uint64_t seed) {
    return 1.0 / unit_ball_volume(ctx, x, seed);
}

VolumeRegion VolumeRegion::metric_ball(const ProjPoint& center, double radius) {
    VolumeRegion r;
    r.kind = Kind::MetricBall;
    r.center = center;
    r.radius = radius;
    return r;
}

VolumeRegion VolumeRegion::of_domain(const ConvexDomain& dom) {
    VolumeRegion r;
    r.kind = Kind::Subdomain;
    r.subdomain = &dom;
    return r;
}

std::pair<Vec, Vec> context_bounding_box(const MetricContext& ctx) {
    const ConvexDomain& dom = *ctx.domain;
    const int n = dom.dim();
    ProjPoint a = dom.anchor();
    Vec ya = ctx.chart.project(a);
    Vec lo = ya, hi = ya;
    Rng rng(0x2545f491u);
    auto account = [&](const ProjPoint& p) {
        Vec y = ctx.chart.project(p);
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
    };
    for (int k = 0; k < 96; ++k) {
        Vec dir = k < 2 * n ? Vec(Vec::Zero(n)) : rng.direction(n);
        if (k < 2 * n) dir[k / 2] = (k % 2 == 0) ? 1.0 : -1.0;
        auto [pm, pp] = dom.chord(a, ctx.chart.embed(ya + dir.normalized()));
        account(pm);
        account(pp);
    }
    Vec pad = 0.02 * (hi - lo).cwiseMax(1e-6 * Vec::Ones(n));
    return {lo - pad, hi + pad};
}

VolumeEstimate busemann_volume(const MetricContext& ctx, const VolumeRegion& region,
                               long samples, std::uint64_t seed, const Vec* box_lo,
                               const Vec* box_hi) {
    VolumeEstimate est;
    if (region.kind == VolumeRegion::Kind::Empty || samples <= 0 ||
        (region.kind == VolumeRegion::Kind::MetricBall && region.radius <= 0.0))
        return est;

    const ConvexDomain& dom = *ctx.domain;
    Vec lo, hi;
    if (box_lo && box_hi) {
        lo = *box_lo;
        hi = *box_hi;
    } else {
        std::tie(lo, hi) = context_bounding_box(ctx);
    }
    // The density already carries the unit-ball normalization, so the
    // sampling box contributes plain Lebesgue volume.
    double box_vol = 1.0;
    for (int i = 0; i < lo.size(); ++i) box_vol *= hi[i] - lo[i];

    Rng rng = Rng::split(seed, 0x7a);
    double sum = 0.0, sum_sq = 0.0;
    for (long i = 0; i < samples; ++i) {
        ProjPoint p = ctx.chart.embed(rng.box_point(lo, hi));
        bool in_domain = dom.classify(p).interior();
        bool in_region = false;
        switch (region.kind) {
            case VolumeRegion::Kind::MetricBall:
                in_region = in_domain && distance(ctx, region.center, p) <= region.radius;
                break;
            case VolumeRegion::Kind::Subdomain:
                in_region = region.subdomain->classify(p).interior();
                if (in_region && !in_domain)
                    throw Error(ErrorCode::RegionNotContained,
                                "integration region leaves the domain");
                break;
            case VolumeRegion::Kind::Empty:
                break;
        }
        double v = in_region ? busemann_density(ctx, p, seed) : 0.0;
        sum += v;
        sum_sq += v * v;
    }
    double mean = sum / samples;
    double var = std::max(0.0, sum_sq / samples - mean * mean);
    est.value = box_vol * mean;
    est.stderr_value = box_vol * std::sqrt(var / samples);
    est.samples = samples;
    return est;
}

namespace {

double point_to_chord(const MetricContext& ctx, const ProjPoint& u, const Vec& a, const Vec& b,
                      const DeltaOptions& opts) {
    auto at = [&](double s) { return ctx.chart.embed(a + s * (b - a)); };
    int grid = std::max(4, opts.segment_grid);
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (int j = 0; j <= grid; ++j) {
        double d = distance(ctx, u, at(static_cast<double>(j) / grid));
        if (d < best) {
            best = d;
            best_j = j;
        }
    }
    double s_lo = std::max(0.0, (best_j - 1.0) / grid);
    double s_hi = std::min(1.0, (best_j + 1.0) / grid);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = s_hi - gr * (s_hi - s_lo), d = s_lo + gr * (s_hi - s_lo);
    double fc = distance(ctx, u, at(c)), fd = distance(ctx, u, at(d));
    for (int it = 0; it < opts.refine_iters; ++it) {
        if (fc < fd) {
            s_hi = d;
            d = c;
            fd = fc;
            c = s_hi - gr * (s_hi - s_lo);
            fc = distance(ctx, u, at(c));
        } else {
            s_lo = c;
            c = d;
            fc = fd;
            d = s_lo + gr * (s_hi - s_lo);
            fd = distance(ctx, u, at(d));
        }
    }
    return std::min({best, fc, fd});
}

} // namespace

double delta_estimate(const MetricContext& ctx, int triangles, std::uint64_t seed,
                      const DeltaOptions& opts) {
    const ConvexDomain& dom = *ctx.domain;
    auto [lo, hi] = context_bounding_box(ctx);
    double scale = (hi - lo).norm();
    Rng rng = Rng::split(seed, 0x3d);

    std::size_t dir_cursor = 0;
    auto sample_vertex = [&]() -> Vec {
        if (opts.vertex_push >= 0.0) {
            Vec dir;
            if (!opts.vertex_directions.empty()) {
                dir = opts.vertex_directions[dir_cursor++ % opts.vertex_directions.size()];
                dir = dir.normalized();
                if (dom.dim() == 2) {
                    double a = rng.uniform(-0.05, 0.05);
                    Vec j(2);
                    j << std::cos(a) * dir[0] - std::sin(a) * dir[1],
                        std::sin(a) * dir[0] + std::cos(a) * dir[1];
                    dir = j;
                }
            } else {
                dir = rng.direction(dom.dim());
            }
            ProjPoint a = dom.anchor();
            Vec ya = ctx.chart.project(a);
            auto [pm, pp] = dom.chord(a, ctx.chart.embed(ya + dir));
            Vec yb = ctx.chart.project(pp);
            return ya + opts.vertex_push * (yb - ya);
        }
        for (int t = 0; t < 20000; ++t) {
            Vec y = rng.box_point(lo, hi);
            if (dom.classify(ctx.chart.embed(y)).interior()) return y;
        }
        throw Error(ErrorCode::NumericalFailure, "triangle vertex sampling failed");
    };

    double delta = 0.0;
    for (int k = 0; k < triangles; ++k) {
        Vec x = sample_vertex(), y = sample_vertex(), z = sample_vertex();
        if ((x - y).norm() < 0.02 * scale || (y - z).norm() < 0.02 * scale ||
            (z - x).norm() < 0.02 * scale) {
            --k;
            continue;
        }
        for (int j = 0; j < opts.side_samples; ++j) {
            double s = (j + 0.5) / opts.side_samples;
            ProjPoint u = ctx.chart.embed(x + s * (y - x));
            if (!dom.classify(u).interior()) continue;
            double d = std::min(point_to_chord(ctx, u, x, z, opts),
                                point_to_chord(ctx, u, z, y, opts));
            delta = std::max(delta, d);
        }
    }
    return delta;
}

} // namespace hb
