#pragma once

#include "hb/convex.hpp"
#include "hb/core.hpp"
#include "hb/projective.hpp"

#include <cstdint>
#include <utility>

namespace hb {

/// Domain together with an affine chart containing its closure; all metric
/// quantities are computed through this chart (and are chart-independent).
struct MetricContext {
    const ConvexDomain* domain = nullptr;
    AffineChart chart;
    double tol = kTolGeometry;

    explicit MetricContext(const ConvexDomain& dom);
    MetricContext(const ConvexDomain& dom, const AffineChart& chart_override);
};

/// Hilbert distance: half the log of the cross-ratio of (p, x, y, q) where
/// p, q are the chord endpoints with x between p and y.
double distance(const MetricContext& ctx, const ProjPoint& x, const ProjPoint& y);

/// Finsler norm of a chart direction at an interior point:
/// (1/|x-p^-| + 1/|x-p^+|) |v| / 2.
double finsler_norm(const MetricContext& ctx, const ProjPoint& x, const Vec& v);

/// Normalized Lebesgue volume of the unit Finsler tangent ball at x; the
/// Busemann density is 1 / this value. Dimension 2 uses a 64-point angular
/// quadrature, higher dimensions a seeded direction sample.
double unit_ball_volume(const MetricContext& ctx, const ProjPoint& x,
                        std::uint64_t seed = 0x9e3779b9u);

double busemann_density(const MetricContext& ctx, const ProjPoint& x,
                        std::uint64_t seed = 0x9e3779b9u);

/// Region of integration for the Busemann volume.
struct VolumeRegion {
    enum class Kind { Empty, MetricBall, Subdomain };
    Kind kind = Kind::Empty;
    ProjPoint center;
    double radius = 0.0;
    const ConvexDomain* subdomain = nullptr;

    static VolumeRegion empty() { return {}; }
    static VolumeRegion metric_ball(const ProjPoint& center, double radius);
    static VolumeRegion of_domain(const ConvexDomain& dom);
};

struct VolumeEstimate {
    double value = 0.0;
    double stderr_value = 0.0;
    long samples = 0;
};

/// Monte-Carlo estimate of the Busemann volume of `region` inside the
/// context domain. A fixed sampling box may be supplied so that nested
/// domains can be compared with common random numbers.
VolumeEstimate busemann_volume(const MetricContext& ctx, const VolumeRegion& region,
                               long samples, std::uint64_t seed,
                               const Vec* box_lo = nullptr, const Vec* box_hi = nullptr);

struct DeltaOptions {
    int side_samples = 100;  // points tested on the long side
    int segment_grid = 24;   // coarse grid for point-to-segment distance
    int refine_iters = 20;
    double vertex_push = -1; // <0: uniform interior vertices; otherwise the
                             // fraction of the way from anchor to boundary
    // With vertex_push >= 0: chart directions the vertices are pushed along
    // (cycled per triangle, lightly jittered). Empty means random directions.
    std::vector<Vec> vertex_directions;
};

/// Empirical slim-triangle constant: max over sampled geodesic triangles of
/// the defect max_u d(u, other two sides), sides realized by chords.
double delta_estimate(const MetricContext& ctx, int triangles, std::uint64_t seed,
                      const DeltaOptions& opts = {});

/// Axis box around the domain in the context chart (for deterministic
/// sampling with shared random numbers).
std::pair<Vec, Vec> context_bounding_box(const MetricContext& ctx);

} // namespace hb
