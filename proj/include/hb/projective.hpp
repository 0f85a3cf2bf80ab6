#pragma once

#include "hb/core.hpp"

#include <optional>
#include <utility>

namespace hb {

/// Canonical representative of a ray/line of R^{n+1}: unit Euclidean norm,
/// first coordinate above 1e-12 in magnitude made positive. The sign rule
/// collapses antipodal representatives, so equality of canonical vectors is
/// equality in P^n.
Vec canonical_rep(const Vec& v);

/// Point of the projective sphere / P^n, stored canonically.
struct ProjPoint {
    Vec rep;

    ProjPoint() = default;
    explicit ProjPoint(const Vec& v) : rep(canonical_rep(v)) {}

    int ambient_dim() const { return static_cast<int>(rep.size()); }
};

/// Hyperplane of P^n as a canonical covector.
struct ProjHyperplane {
    Vec covector;

    ProjHyperplane() = default;
    explicit ProjHyperplane(const Vec& v) : covector(canonical_rep(v)) {}
};

bool points_equal(const ProjPoint& a, const ProjPoint& b, double tol = kTolGeometry);
bool hyperplanes_equal(const ProjHyperplane& a, const ProjHyperplane& b,
                       double tol = kTolGeometry);
bool incident(const ProjPoint& x, const ProjHyperplane& h, double tol = kTolGeometry);

/// Determinant-one linear map acting projectively. Construction rescales the
/// matrix to det = 1 (throws NonUnitDeterminant when impossible over R).
struct ProjMap {
    Mat mat;

    ProjMap() = default;
    static ProjMap from_matrix(const Mat& m);
    /// Wraps a matrix already known to be unimodular (products and inverses
    /// of det-1 matrices). Skips the det rescaling, whose floating-point
    /// evaluation is unreliable for ill-conditioned matrices.
    static ProjMap from_unimodular(const Mat& m);
    static ProjMap identity(int ambient_dim);

    ProjPoint apply(const ProjPoint& x) const { return ProjPoint(mat * x.rep); }
    ProjHyperplane apply(const ProjHyperplane& h) const;

    ProjMap inverse() const;
    ProjMap compose(const ProjMap& other) const { return from_unimodular(mat * other.mat); }

    int ambient_dim() const { return static_cast<int>(mat.rows()); }
};

inline ProjMap operator*(const ProjMap& a, const ProjMap& b) { return a.compose(b); }
inline ProjPoint operator*(const ProjMap& g, const ProjPoint& x) { return g.apply(x); }

/// Affine chart of P^n: the complement of a hyperplane. Stored as an
/// invertible frame whose first n rows give the affine coordinates and whose
/// last row is the covector of the hyperplane at infinity.
class AffineChart {
  public:
    AffineChart() = default;
    explicit AffineChart(const Mat& frame);

    static AffineChart standard(int dim);
    /// Chart with prescribed hyperplane at infinity; the finite coordinate
    /// rows are completed orthonormally.
    static AffineChart with_infinity(const ProjHyperplane& at_infinity);

    int dim() const { return static_cast<int>(frame_.rows()) - 1; }

    /// Affine coordinates of x. Throws AtInfinity when x lies on the chart's
    /// hyperplane at infinity.
    Vec project(const ProjPoint& x) const;
    ProjPoint embed(const Vec& affine) const;

    /// Homogeneous lift with last frame coordinate 1 (finite points only).
    Vec lift(const ProjPoint& x) const;
    /// Lift of a chart direction (last frame coordinate 0).
    Vec direction_lift(const Vec& dir) const;

    /// Signed evaluation of a covector on the normalized lift of x.
    double side_value(const Vec& covector, const ProjPoint& x) const;

    ProjHyperplane at_infinity() const;
    const Mat& frame() const { return frame_; }
    const Mat& frame_inverse() const { return frame_inv_; }

  private:
    Mat frame_;
    Mat frame_inv_;
};

/// Cross-ratio of four collinear points, equal to
/// (|p-y| |q-x|) / (|p-x| |q-y|) in any affine chart containing all four.
double cross_ratio(const ProjPoint& p, const ProjPoint& x, const ProjPoint& y,
                   const ProjPoint& q, double tol = kTolGeometry);

/// Residual of the collinearity test: third singular value of the stacked
/// representative matrix (rank must drop to 2).
double collinearity_residual(const ProjPoint& p, const ProjPoint& x, const ProjPoint& y,
                             const ProjPoint& q);

/// Pole (dual point) of a hyperplane with respect to an invertible symmetric
/// form Q: the canonical point of Q^{-1} nu. Throws SingularForm / TangentWall.
ProjPoint pole(const ProjHyperplane& h, const Mat& q, double tol = kTolGeometry);

/// Polar hyperplane of a point w.r.t. Q (inverse of `pole`).
ProjHyperplane polar(const ProjPoint& p, const Mat& q);

} // namespace hb
