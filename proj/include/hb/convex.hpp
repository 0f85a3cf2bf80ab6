#pragma once

#include "hb/core.hpp"
#include "hb/projective.hpp"
#include "hb/rng.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

namespace hb {

/// Oracle interface of a properly convex open domain: containment and
/// chord-boundary queries are the two primitives every metric computation
/// needs. Implementations are immutable after construction and safe to query
/// concurrently.
class ConvexDomain {
  public:
    ConvexDomain() = default;
    ConvexDomain(const ConvexDomain&) {} // the lazy bounding-box cache stays local
    ConvexDomain& operator=(const ConvexDomain&) { return *this; }
    virtual ~ConvexDomain() = default;

    virtual int dim() const = 0;

    /// Three-valued containment with a tolerance band around the boundary.
    virtual Containment classify(const ProjPoint& x) const = 0;

    /// Both boundary points of the chord through interior point `x` and a
    /// second point `through` of the chart; the second component lies on the
    /// `through` side. Throws NotInterior.
    virtual std::pair<ProjPoint, ProjPoint> chord(const ProjPoint& x,
                                                  const ProjPoint& through) const = 0;

    /// A chart whose complement misses the closure of the domain.
    virtual const AffineChart& chart() const = 0;

    /// Some interior point, used as anchor for sampling and rendering.
    virtual ProjPoint anchor() const = 0;

    /// Chord endpoints for a direction given in chart coordinates at `x`,
    /// ordered (backward, forward).
    std::pair<ProjPoint, ProjPoint> ray_boundary(const ProjPoint& x, const Vec& dir) const;

    /// Axis-aligned bounding box of the domain in its chart, padded slightly.
    /// Computed once and cached (domains are immutable).
    std::pair<Vec, Vec> bounding_box() const;

    /// Rejection-sample an interior point (margin in the classify band).
    /// Truncated piecewise domains only return exactly classified points.
    ProjPoint sample_interior(Rng& rng, int max_tries = 10000) const;

  protected:
    virtual std::pair<Vec, Vec> compute_bounding_box() const;

  private:
    mutable std::mutex bbox_mutex_;
    mutable std::optional<std::pair<Vec, Vec>> bbox_cache_;
};

/// Ellipsoid domain of a signature-(n,1) symmetric form: the projectivized
/// negative cone {x : x^T Q x < 0}.
class QuadricDomain : public ConvexDomain {
  public:
    QuadricDomain(const Mat& q, double boundary_band = kTolGeometry);
    QuadricDomain(const Mat& q, const AffineChart& chart, double boundary_band = kTolGeometry);

    int dim() const override { return static_cast<int>(q_.rows()) - 1; }
    Containment classify(const ProjPoint& x) const override;
    std::pair<ProjPoint, ProjPoint> chord(const ProjPoint& x,
                                          const ProjPoint& through) const override;
    const AffineChart& chart() const override { return chart_; }
    ProjPoint anchor() const override { return center_; }

    const Mat& form() const { return q_; }
    /// Quadratic form value on the canonical representative.
    double form_value(const ProjPoint& x) const { return x.rep.dot(q_ * x.rep); }
    /// Image domain under a projective map (congruence transport of the form).
    QuadricDomain transformed(const ProjMap& g) const;

  private:
    void init(const Mat& q);

    Mat q_;
    ProjPoint center_;
    AffineChart chart_;
    double band_;
};

/// Bounded intersection of affine half-spaces in a fixed chart. Used as the
/// flat control domain and for Dirichlet regions.
class Polytope : public ConvexDomain {
  public:
    /// Half-spaces a.y <= b given directly in chart coordinates.
    Polytope(std::vector<std::pair<Vec, double>> halfspaces, const AffineChart& chart,
             double boundary_band = kTolGeometry);
    /// Half-spaces from hyperplanes with a side sign: keeps the side where
    /// side_sign * <covector, lift(x)> <= 0.
    Polytope(const std::vector<std::pair<ProjHyperplane, int>>& walls, const AffineChart& chart,
             double boundary_band = kTolGeometry);

    static Polytope box(const Vec& lo, const Vec& hi);

    int dim() const override { return chart_.dim(); }
    Containment classify(const ProjPoint& x) const override;
    std::pair<ProjPoint, ProjPoint> chord(const ProjPoint& x,
                                          const ProjPoint& through) const override;
    const AffineChart& chart() const override { return chart_; }
    ProjPoint anchor() const override { return anchor_; }

    const std::vector<std::pair<Vec, double>>& halfspaces() const { return halfspaces_; }

  private:
    void init();

    std::vector<std::pair<Vec, double>> halfspaces_;
    AffineChart chart_;
    ProjPoint anchor_;
    double band_;
};

/// One wall of a bent domain: a hyperplane of the base domain together with
/// its pole, its transported co-orientation and the word carrying the base
/// wall onto it.
struct Wall {
    ProjHyperplane plane;
    ProjPoint pole;
    Vec halfspace_normal; // affine form a.y - b in the base chart
    double halfspace_offset = 0.0;
    std::vector<std::pair<std::string, int>> carrier; // word with rho0(carrier) W0 = wall
    double orientation = 1.0; // sign of the transported positive side
    Vec chord_a, chord_b;     // endpoints of wall ∩ base domain in chart coords
};

/// Chamber of a bent domain: a region of the base ellipsoid together with the
/// accumulated bending cocycle mapping it into the deformed domain.
struct Chamber {
    int id = -1;
    int parent = -1;
    int parent_wall = -1;
    int depth = 0;
    ProjMap map;     // cumulative cocycle value
    ProjMap map_inv;
    Vec rep_point;   // interior point of the base region, chart coords
    std::vector<int> facet_walls;
    std::vector<int> facet_children; // -1 when truncated
    std::vector<double> facet_sides; // side value sign of rep_point per facet
};

/// Finite truncation of a bent domain: a tree of chambers, each a projective
/// image of a piece of the base ellipsoid. Membership walks the tree; beyond
/// the truncation the last cocycle value is frozen, which makes the domain the
/// result of finitely many fold operations (hence exactly convex), and the
/// verdict is flagged `exact = false`.
class BentDomain : public ConvexDomain {
  public:
    enum class Membership { Truncated, Equivariant };

    int dim() const override { return base_->dim(); }
    Containment classify(const ProjPoint& x) const override;
    Containment classify(const ProjPoint& x, Membership mode) const;
    std::pair<ProjPoint, ProjPoint> chord(const ProjPoint& x,
                                          const ProjPoint& through) const override;
    std::pair<ProjPoint, ProjPoint> chord(const ProjPoint& x, const ProjPoint& through,
                                          Membership mode) const;
    const AffineChart& chart() const override { return base_->chart(); }
    ProjPoint anchor() const override;

    const QuadricDomain& base() const { return *base_; }
    const std::vector<Chamber>& chambers() const { return chambers_; }
    const std::vector<Wall>& walls() const { return walls_; }
    int truncation_depth() const { return depth_; }

    /// Chamber index containing a base-coordinate point (walk on the base
    /// tessellation, ignoring the cocycle).
    int locate_base_chamber(const ProjPoint& base_point) const;

    /// Pull a point of the deformed domain back to base coordinates through
    /// the chamber cocycle. Returns the chamber index used.
    std::pair<ProjPoint, int> pull_back(const ProjPoint& x) const;

  protected:
    /// Extent of the exactly-known region (chamber images of the wall
    /// chords); the frozen continuation past the truncation can stretch
    /// arbitrarily far in the chart and is not part of the box.
    std::pair<Vec, Vec> compute_bounding_box() const override;

  private:
    friend class BentDomainBuilder;

    std::shared_ptr<const QuadricDomain> base_;
    std::vector<Wall> walls_;
    std::vector<Chamber> chambers_;
    int depth_ = 0;
    // Equivariant mode data: generator images used to reduce deep queries.
    std::vector<ProjMap> reduce_maps_;     // rho_t(carrier)^{-1} per wall
    int max_teleports_ = 256;
    bool identity_maps_ = true; // t == 0: the truncation is the exact domain
    // Walls beyond the generated word budget only disturb a collar of the
    // base boundary (their chords shrink exponentially); strict verdicts
    // with pullback margins inside the collar are not truncation-stable.
    double margin_collar_ = 2e-3;

    struct WalkResult {
        int chamber = -1;
        ProjPoint pulled;
        bool frontier = false; // search touched the truncation frontier
        bool leaf = false;     // witnessing chamber is a deepest-level leaf
        int frontier_wall = -1;
    };
    // Depth-first search over the chamber tree: returns the first chamber
    // whose pulled-back point lies in its cell (interior or boundary of the
    // base), otherwise the least-exterior candidate over all reachable
    // chambers. Pullbacks of far points can flag several facets at once, so
    // single-path descent is not sound for exterior verdicts.
    WalkResult walk(const ProjPoint& x) const;
    double wall_side(int wall, const ProjPoint& base_point) const;
};

/// Generic bisection chord solver for domains with only a membership oracle.
std::pair<ProjPoint, ProjPoint> bisect_chord(const ConvexDomain& domain, const ProjPoint& x,
                                             const ProjPoint& through, int max_iter = 200);

/// A single fold of a convex domain: keeps one side of a wall and maps the
/// other by the wall's bending transformation.
class PliDomain : public ConvexDomain {
  public:
    PliDomain(std::shared_ptr<const ConvexDomain> inner, const ProjHyperplane& wall,
              const ProjMap& bend, const ProjPoint& kept_side_point);

    int dim() const override { return inner_->dim(); }
    Containment classify(const ProjPoint& x) const override;
    std::pair<ProjPoint, ProjPoint> chord(const ProjPoint& x,
                                          const ProjPoint& through) const override;
    const AffineChart& chart() const override { return inner_->chart(); }
    ProjPoint anchor() const override { return anchor_; }

  private:
    std::shared_ptr<const ConvexDomain> inner_;
    ProjHyperplane wall_;
    ProjMap bend_, bend_inv_;
    double kept_sign_;
    ProjPoint anchor_;
};

struct ChordViolation {
    ProjPoint endpoint_a, endpoint_b, midpoint;
    double midpoint_depth = 0.0;
};

/// Samples random chords and reports pairs of boundary points whose midpoint
/// lies on the boundary within `resolution` — a certificate of a boundary
/// segment. Chords shorter than `min_chord` are skipped (a short chord of any
/// smooth boundary has a shallow midpoint).
std::vector<ChordViolation> strict_convexity_probe(const ConvexDomain& domain, int samples,
                                                   std::uint64_t seed,
                                                   double resolution = 1e-3,
                                                   double min_chord = -1.0);

/// Member of the pencil of quadrics spanned by E and the square of its
/// tangent hyperplane at boundary point p: Q_s = Q + s * tau tau^T with
/// tau = Q p. Every member is internally tangent to E at p; s > 0 gives inner
/// (horoball-like) members, s < 0 outer ones, s = 0 returns E itself.
QuadricDomain pencil_ellipsoid(const QuadricDomain& e, const ProjPoint& p, double s);

} // namespace hb
