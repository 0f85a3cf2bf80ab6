#include "hb/projective.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace hb {

Vec canonical_rep(const Vec& v) {
    double n = v.norm();
    if (!(n > 1e-300)) throw Error(ErrorCode::ZeroVector, "cannot canonicalize zero vector");
    Vec u = (n == 1.0) ? v : Vec(v / n);
    for (int i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) > 1e-12) {
            if (u[i] < 0) u = -u;
            break;
        }
    }
    return u;
}

bool points_equal(const ProjPoint& a, const ProjPoint& b, double tol) {
    return std::min((a.rep - b.rep).norm(), (a.rep + b.rep).norm()) < tol;
}

bool hyperplanes_equal(const ProjHyperplane& a, const ProjHyperplane& b, double tol) {
    return std::min((a.covector - b.covector).norm(), (a.covector + b.covector).norm()) < tol;
}

bool incident(const ProjPoint& x, const ProjHyperplane& h, double tol) {
    return std::abs(h.covector.dot(x.rep)) < tol;
}

ProjMap ProjMap::from_matrix(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    double d = m.determinant();
    if (std::abs(d) < 1e-200)
        throw Error(ErrorCode::NonUnitDeterminant, "matrix is numerically singular");
    double scale;
    if (n % 2 == 1) {
        scale = (d > 0 ? 1.0 : -1.0) * std::pow(std::abs(d), -1.0 / n);
    } else {
        if (d < 0)
            throw Error(ErrorCode::NonUnitDeterminant,
                        "negative determinant has no real det-1 rescaling in even dimension");
        scale = std::pow(d, -1.0 / n);
    }
    ProjMap g;
    g.mat = scale * m;
    return g;
}

ProjMap ProjMap::from_unimodular(const Mat& m) {
    ProjMap g;
    g.mat = m;
    return g;
}

ProjMap ProjMap::identity(int ambient_dim) {
    ProjMap g;
    g.mat = Mat::Identity(ambient_dim, ambient_dim);
    return g;
}

ProjHyperplane ProjMap::apply(const ProjHyperplane& h) const {
    return ProjHyperplane(mat.transpose().fullPivLu().solve(h.covector));
}

ProjMap ProjMap::inverse() const {
    ProjMap g;
    g.mat = mat.fullPivLu().inverse();
    return g;
}

AffineChart::AffineChart(const Mat& frame) : frame_(frame) {
    Eigen::FullPivLU<Mat> lu(frame_);
    if (!lu.isInvertible())
        throw Error(ErrorCode::SingularForm, "chart frame is not invertible");
    frame_inv_ = lu.inverse();
}

AffineChart AffineChart::standard(int dim) {
    return AffineChart(Mat::Identity(dim + 1, dim + 1));
}

AffineChart AffineChart::with_infinity(const ProjHyperplane& at_infinity) {
    const int n1 = static_cast<int>(at_infinity.covector.size());
    // Orthonormal completion: householder QR of the covector gives a basis
    // whose remaining columns span its complement.
    Vec nu = at_infinity.covector;
    Mat q = Eigen::HouseholderQR<Mat>(nu).householderQ();
    Mat frame(n1, n1);
    for (int i = 0; i + 1 < n1; ++i) frame.row(i) = q.col(i + 1).transpose();
    frame.row(n1 - 1) = nu.transpose();
    return AffineChart(frame);
}

Vec AffineChart::project(const ProjPoint& x) const {
    Vec u = frame_ * x.rep;
    const int n = dim();
    if (std::abs(u[n]) < kTolGeometry * u.norm())
        throw Error(ErrorCode::AtInfinity, "point lies on the chart's hyperplane at infinity");
    return u.head(n) / u[n];
}

ProjPoint AffineChart::embed(const Vec& affine) const {
    Vec h(affine.size() + 1);
    h.head(affine.size()) = affine;
    h[affine.size()] = 1.0;
    return ProjPoint(frame_inv_ * h);
}

Vec AffineChart::lift(const ProjPoint& x) const {
    Vec u = frame_ * x.rep;
    const int n = dim();
    if (std::abs(u[n]) < kTolGeometry * u.norm())
        throw Error(ErrorCode::AtInfinity, "point lies on the chart's hyperplane at infinity");
    return x.rep / u[n];
}

Vec AffineChart::direction_lift(const Vec& dir) const {
    Vec h(dir.size() + 1);
    h.head(dir.size()) = dir;
    h[dir.size()] = 0.0;
    return frame_inv_ * h;
}

double AffineChart::side_value(const Vec& covector, const ProjPoint& x) const {
    return covector.dot(lift(x));
}

ProjHyperplane AffineChart::at_infinity() const {
    return ProjHyperplane(frame_.row(dim()).transpose());
}

double collinearity_residual(const ProjPoint& p, const ProjPoint& x, const ProjPoint& y,
                             const ProjPoint& q) {
    Mat stacked(4, p.rep.size());
    stacked.row(0) = p.rep.transpose();
    stacked.row(1) = x.rep.transpose();
    stacked.row(2) = y.rep.transpose();
    stacked.row(3) = q.rep.transpose();
    Eigen::JacobiSVD<Mat> svd(stacked);
    return svd.singularValues()[2];
}

double cross_ratio(const ProjPoint& p, const ProjPoint& x, const ProjPoint& y,
                   const ProjPoint& q, double tol) {
    Mat stacked(4, p.rep.size());
    stacked.row(0) = p.rep.transpose();
    stacked.row(1) = x.rep.transpose();
    stacked.row(2) = y.rep.transpose();
    stacked.row(3) = q.rep.transpose();
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    if (svd.singularValues()[2] > tol)
        throw Error(ErrorCode::NonCollinear, "cross-ratio arguments are not collinear");

    // Coordinates in the spanning plane of the pencil; the 2x2 determinants
    // reproduce the affine formula in every chart containing the four points.
    Vec u = svd.matrixV().col(0), w = svd.matrixV().col(1);
    auto coords = [&](const ProjPoint& z) {
        return Eigen::Vector2d(z.rep.dot(u), z.rep.dot(w));
    };
    Eigen::Vector2d cp = coords(p), cx = coords(x), cy = coords(y), cq = coords(q);
    auto det2 = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a[0] * b[1] - a[1] * b[0];
    };
    double den = det2(cp, cx) * det2(cq, cy);
    if (std::abs(den) < tol * tol)
        throw Error(ErrorCode::DegenerateConfiguration, "cross-ratio has coincident endpoints");
    return std::abs(det2(cp, cy) * det2(cq, cx) / den);
}

ProjPoint pole(const ProjHyperplane& h, const Mat& q, double tol) {
    Eigen::JacobiSVD<Mat> svd(q);
    const auto& sing = svd.singularValues();
    if (sing[sing.size() - 1] < 1e-12 * sing[0])
        throw Error(ErrorCode::SingularForm, "quadratic form is numerically singular");
    Vec lift = q.fullPivLu().solve(h.covector);
    ProjPoint p(lift);
    if (std::abs(h.covector.dot(p.rep)) < tol * h.covector.norm())
        throw Error(ErrorCode::TangentWall, "hyperplane is tangent to the quadric");
    return p;
}

ProjHyperplane polar(const ProjPoint& p, const Mat& q) {
    return ProjHyperplane(q * p.rep);
}

} // namespace hb
