#include <arrowscore/rectify.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace arrowscore::rectify {
namespace {

constexpr std::size_t kMinForeground = 50;
constexpr double kInlierDistancePx = 2.0;

double cross(const PointPx& o, const PointPx& a, const PointPx& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

PointPx Ellipse::point_at(double t) const {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double u = a * std::cos(t);
    const double v = b * std::sin(t);
    return {cx + u * c - v * s, cy + u * s + v * c};
}

Eigen::Matrix3d Ellipse::conic() const {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    const Eigen::Matrix2d quad =
        rot * Eigen::Vector2d(1.0 / (a * a), 1.0 / (b * b)).asDiagonal() * rot.transpose();
    const Eigen::Vector2d center(cx, cy);
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m.topLeftCorner<2, 2>() = quad;
    m.topRightCorner<2, 1>() = -quad * center;
    m.bottomLeftCorner<1, 2>() = (-quad * center).transpose();
    m(2, 2) = center.dot(quad * center) - 1.0;
    return m;
}

bool Ellipse::contains(PointPx p) const {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    const double u = (dx * c + dy * s) / a;
    const double v = (-dx * s + dy * c) / b;
    return u * u + v * v <= 1.0;
}

double Conic::sampson_distance(double x, double y) const {
    const double gx = 2.0 * a * x + b * y + d;
    const double gy = b * x + 2.0 * c * y + e;
    const double g = std::hypot(gx, gy);
    const double q = std::abs(evaluate(x, y));
    return g > 0.0 ? q / g : std::numeric_limits<double>::infinity();
}

Eigen::Matrix3d Conic::matrix() const {
    Eigen::Matrix3d m;
    m << a, b / 2.0, d / 2.0, b / 2.0, c, e / 2.0, d / 2.0, e / 2.0, f;
    return m;
}

Conic fit_conic_direct(std::span<const PointPx> points) {
    if (points.size() < 5) {
        fail(ErrorKind::FitFailure,
             "ellipse fit needs >= 5 points, got " + std::to_string(points.size()));
    }
    // Center and scale the points for conditioning.
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    double spread = 0.0;
    for (const auto& p : points) spread += std::hypot(p.x - mx, p.y - my);
    spread /= static_cast<double>(points.size());
    if (!(spread > 0.0)) fail(ErrorKind::FitFailure, "ellipse fit: coincident points");
    const double s = 1.0 / spread;

    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixX3d quadratic(n, 3), linear(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = (points[static_cast<std::size_t>(i)].x - mx) * s;
        const double y = (points[static_cast<std::size_t>(i)].y - my) * s;
        quadratic.row(i) << x * x, x * y, y * y;
        linear.row(i) << x, y, 1.0;
    }
    const Eigen::Matrix3d s1 = quadratic.transpose() * quadratic;
    const Eigen::Matrix3d s2 = quadratic.transpose() * linear;
    const Eigen::Matrix3d s3 = linear.transpose() * linear;
    const Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
    if (!s3_lu.isInvertible()) fail(ErrorKind::FitFailure, "ellipse fit: collinear points");
    const Eigen::Matrix3d t = -s3_lu.inverse() * s2.transpose();
    const Eigen::Matrix3d reduced = s1 + s2 * t;
    // Premultiply by the inverse of the constraint matrix [[0,0,2],[0,-1,0],[2,0,0]].
    Eigen::Matrix3d m;
    m.row(0) = reduced.row(2) / 2.0;
    m.row(1) = -reduced.row(1);
    m.row(2) = reduced.row(0) / 2.0;

    const Eigen::EigenSolver<Eigen::Matrix3d> solver(m);
    if (solver.info() != Eigen::Success) fail(ErrorKind::FitFailure, "ellipse fit: eigensolver failed");
    const Eigen::Matrix3cd vectors = solver.eigenvectors();
    int chosen = -1;
    double best = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3d v = vectors.col(k).real();
        const double constraint = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (constraint > best && std::abs(solver.eigenvalues()(k).imag()) < 1e-12 * (1.0 + std::abs(solver.eigenvalues()(k).real()))) {
            best = constraint;
            chosen = k;
        }
    }
    if (chosen < 0) fail(ErrorKind::FitFailure, "ellipse fit: no elliptical solution");
    const Eigen::Vector3d quad_part = vectors.col(chosen).real();
    const Eigen::Vector3d lin_part = t * quad_part;

    Eigen::Matrix3d normalized;
    normalized << quad_part(0), quad_part(1) / 2.0, lin_part(0) / 2.0,
                  quad_part(1) / 2.0, quad_part(2), lin_part(1) / 2.0,
                  lin_part(0) / 2.0, lin_part(1) / 2.0, lin_part(2);
    Eigen::Matrix3d to_normalized;
    to_normalized << s, 0.0, -s * mx, 0.0, s, -s * my, 0.0, 0.0, 1.0;
    Eigen::Matrix3d q = to_normalized.transpose() * normalized * to_normalized;

    const double det2 = 4.0 * q(0, 0) * q(1, 1) - 4.0 * q(0, 1) * q(0, 1);
    if (!(det2 > 0.0) || !q.allFinite()) fail(ErrorKind::FitFailure, "ellipse fit: degenerate conic");
    q /= std::sqrt(det2);
    return {q(0, 0), 2.0 * q(0, 1), q(1, 1), 2.0 * q(0, 2), 2.0 * q(1, 2), q(2, 2)};
}

Ellipse conic_to_ellipse(const Conic& conic) {
    Eigen::Matrix2d quad;
    quad << conic.a, conic.b / 2.0, conic.b / 2.0, conic.c;
    const Eigen::Vector2d lin(conic.d / 2.0, conic.e / 2.0);
    const Eigen::FullPivLU<Eigen::Matrix2d> lu(quad);
    if (!lu.isInvertible()) fail(ErrorKind::FitFailure, "conic has no center");
    const Eigen::Vector2d center = -lu.solve(lin);
    double value_at_center = conic.f + lin.dot(center);
    if (value_at_center > 0.0) {
        quad = -quad;
        value_at_center = -value_at_center;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(quad);
    const Eigen::Vector2d lambda = eig.eigenvalues();  // ascending
    if (!(lambda(0) > 0.0) || !(value_at_center < 0.0)) {
        fail(ErrorKind::FitFailure, "conic is not a real ellipse");
    }
    Ellipse e;
    e.cx = center(0);
    e.cy = center(1);
    e.a = std::sqrt(-value_at_center / lambda(0));
    e.b = std::sqrt(-value_at_center / lambda(1));
    const Eigen::Vector2d major = eig.eigenvectors().col(0);
    double phi = std::atan2(major(1), major(0));
    if (phi < 0.0) phi += kPi;
    if (phi >= kPi) phi -= kPi;
    e.phi = phi;
    if (!std::isfinite(e.a) || !std::isfinite(e.b) || !std::isfinite(e.cx) || !std::isfinite(e.cy)) {
        fail(ErrorKind::FitFailure, "ellipse parameters not finite");
    }
    return e;
}

std::vector<PointPx> convex_hull(std::vector<PointPx> points) {
    std::sort(points.begin(), points.end(), [](const PointPx& l, const PointPx& r) {
        return l.x < r.x || (l.x == r.x && l.y < r.y);
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const PointPx& l, const PointPx& r) { return l.x == r.x && l.y == r.y; }),
                 points.end());
    if (points.size() < 3) return points;
    std::vector<PointPx> hull(2 * points.size());
    std::size_t k = 0;
    for (const auto& p : points) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

std::vector<PointPx> foreground_hull(const Mask& mask) {
    // Only the extreme pixels of each row can be hull vertices.
    std::vector<PointPx> extremes;
    for (int y = 0; y < mask.height(); ++y) {
        int first = -1, last = -1;
        for (int x = 0; x < mask.width(); ++x) {
            if (mask(x, y)) {
                if (first < 0) first = x;
                last = x;
            }
        }
        if (first < 0) continue;
        extremes.push_back({first + 0.5, y + 0.5});
        if (last != first) extremes.push_back({last + 0.5, y + 0.5});
    }
    return convex_hull(std::move(extremes));
}

EllipseFit fit_boundary_ellipse(const BandMask& band) {
    const std::size_t area = count_foreground(band.mask);
    if (area < kMinForeground) {
        fail(ErrorKind::InsufficientData, std::string(boundary_name(band.boundary)) + ": only " +
                                              std::to_string(area) + " foreground pixels");
    }
    EllipseFit fit;
    fit.hull = foreground_hull(band.mask);
    const Conic conic = fit_conic_direct(fit.hull);
    fit.ellipse = conic_to_ellipse(conic);

    std::size_t inliers = 0;
    for (const auto& p : fit.hull) {
        if (conic.sampson_distance(p.x, p.y) <= kInlierDistancePx) ++inliers;
    }
    const double inlier_fraction = static_cast<double>(inliers) / static_cast<double>(fit.hull.size());
    const double coverage = std::min(1.0, static_cast<double>(area) / fit.ellipse.area());
    fit.confidence = inlier_fraction * coverage;
    return fit;
}

}  // namespace arrowscore::rectify
