#include <arrowscore/rectify.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace arrowscore::rectify {
namespace {

Eigen::Matrix3d transform_conic(const Eigen::Matrix3d& conic, const Eigen::Matrix3d& inverse) {
    return inverse.transpose() * conic * inverse;
}

/// Distance from the origin to the conic along unit direction (dx, dy),
/// or a negative value when the ray does not leave the conic's interior.
double ray_exit(const Eigen::Matrix3d& c, double dx, double dy) {
    const double qa = c(0, 0) * dx * dx + 2.0 * c(0, 1) * dx * dy + c(1, 1) * dy * dy;
    const double qb = c(0, 2) * dx + c(1, 2) * dy;
    const double qc = c(2, 2);
    if (!(qa > 0.0) || !(qc < 0.0)) return -1.0;
    const double disc = qb * qb - qa * qc;
    return (-qb + std::sqrt(disc)) / qa;
}

/// Projective map sending the target center to the origin, the vanishing
/// line of the target plane to infinity, and the outer conic to a circle.
Eigen::Matrix3d normalization_from_conics(const Eigen::Matrix3d& inner, const Eigen::Matrix3d& outer) {
    const Eigen::FullPivLU<Eigen::Matrix3d> inner_lu(inner);
    if (!inner_lu.isInvertible()) fail(ErrorKind::RectificationFailure, "degenerate inner conic");
    // For images of concentric circles, inner^-1 * outer has a double
    // eigenvalue (the vanishing line) and a simple one whose eigenvector is
    // the image of the common center.
    const Eigen::EigenSolver<Eigen::Matrix3d> solver(inner_lu.inverse() * outer);
    if (solver.info() != Eigen::Success) fail(ErrorKind::RectificationFailure, "conic pencil eigensolver failed");
    const Eigen::Vector3cd lambda = solver.eigenvalues();
    int distinct = 0;
    double best_gap = -1.0;
    for (int i = 0; i < 3; ++i) {
        double gap = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 3; ++j) {
            if (j != i) gap = std::min(gap, std::abs(lambda(i) - lambda(j)));
        }
        if (gap > best_gap) {
            best_gap = gap;
            distinct = i;
        }
    }
    Eigen::Vector3d center = solver.eigenvectors().col(distinct).real();
    if (!(std::abs(center(2)) > 1e-12 * center.norm())) {
        fail(ErrorKind::RectificationFailure, "conic pencil center at infinity");
    }
    center /= center(2);

    Eigen::Matrix3d translate = Eigen::Matrix3d::Identity();
    translate(0, 2) = -center(0);
    translate(1, 2) = -center(1);
    // Polar of the center with respect to the outer conic, in translated coordinates.
    Eigen::Matrix3d translate_inv = Eigen::Matrix3d::Identity();
    translate_inv(0, 2) = center(0);
    translate_inv(1, 2) = center(1);
    Eigen::Vector3d line = translate_inv.transpose() * (outer * center);
    if (!(std::abs(line(2)) > 0.0)) fail(ErrorKind::RectificationFailure, "vanishing line through center");
    line /= line(2);
    Eigen::Matrix3d projective = Eigen::Matrix3d::Identity();
    projective(2, 0) = line(0);
    projective(2, 1) = line(1);

    const Eigen::Matrix3d affine_frame = projective * translate;
    Eigen::Matrix3d c = transform_conic(outer, affine_frame.inverse());
    Eigen::Matrix2d quad = c.topLeftCorner<2, 2>();
    const Eigen::Vector2d lin = c.topRightCorner<2, 1>();
    const double value = c(2, 2) - lin.dot(quad.ldlt().solve(lin));
    if (!(value != 0.0)) fail(ErrorKind::RectificationFailure, "degenerate outer conic");
    quad /= -value;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(quad);
    if (!(eig.eigenvalues()(0) > 0.0)) {
        fail(ErrorKind::RectificationFailure, "outer boundary is not an ellipse after normalization");
    }
    // Symmetric stretch onto a circle of radius sqrt(a * b).
    const Eigen::Vector2d lambda_q = eig.eigenvalues();
    const double radius = std::pow(lambda_q(0) * lambda_q(1), -0.25);
    const Eigen::Matrix2d stretch = eig.eigenvectors() *
                                    lambda_q.cwiseSqrt().asDiagonal() *
                                    eig.eigenvectors().transpose() * radius;
    Eigen::Matrix3d stretch3 = Eigen::Matrix3d::Identity();
    stretch3.topLeftCorner<2, 2>() = stretch;
    return stretch3 * affine_frame;
}

Eigen::Vector3d apply(const Eigen::Matrix3d& h, PointPx p) {
    return h * Eigen::Vector3d(p.x, p.y, 1.0);
}

}  // namespace

WarpMap::WarpMap(Eigen::Matrix3d normalization, std::vector<double> knots_mm,
                 std::vector<double> radii, int n_angles, CanonicalFrame canonical)
    : normalization_(std::move(normalization)),
      knots_mm_(std::move(knots_mm)),
      radii_(std::move(radii)),
      n_angles_(n_angles),
      canonical_(canonical) {
    require(n_angles_ >= 180, "n_angles must be >= 180");
    require(knots_mm_.size() >= 2 && knots_mm_.size() <= kMaxBoundaries,
            "warp needs 2..4 boundaries");
    require(radii_.size() == static_cast<std::size_t>(n_angles_) * knots_mm_.size(),
            "radii table has wrong size");
    for (std::size_t b = 1; b < knots_mm_.size(); ++b) {
        require(knots_mm_[b] > knots_mm_[b - 1], "knot radii must increase");
    }
    for (int k = 0; k < n_angles_; ++k) {
        for (int b = 0; b < n_boundaries(); ++b) {
            const double r = radius(k, b);
            const double prev = b == 0 ? 0.0 : radius(k, b - 1);
            require(std::isfinite(r) && r > prev, "warp radii must increase strictly along every ray");
        }
    }
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(normalization_);
    require(lu.isInvertible(), "normalization must be invertible");
    inverse_ = lu.inverse();
    const Eigen::Vector3d c = inverse_.col(2);
    center_src_ = {c(0) / c(2), c(1) / c(2)};
}

WarpMap::KnotRow WarpMap::knots_at(double angle) const {
    double u = angle / (2.0 * kPi) * n_angles_;
    u -= std::floor(u / n_angles_) * n_angles_;
    int i = static_cast<int>(u);
    if (i >= n_angles_) i = n_angles_ - 1;
    const double f = u - i;
    const int j = (i + 1) % n_angles_;
    KnotRow row{};
    for (int b = 0; b < n_boundaries(); ++b) row[b] = (1.0 - f) * radius(i, b) + f * radius(j, b);
    return row;
}

double WarpMap::normalized_radius(double angle, double r_mm) const {
    const KnotRow rho = knots_at(angle);
    const int n = n_boundaries();
    if (r_mm <= knots_mm_[0]) return r_mm * rho[0] / knots_mm_[0];
    for (int b = 1; b < n; ++b) {
        if (r_mm <= knots_mm_[b]) {
            const double t = (r_mm - knots_mm_[b - 1]) / (knots_mm_[b] - knots_mm_[b - 1]);
            return rho[b - 1] + t * (rho[b] - rho[b - 1]);
        }
    }
    const double slope = (rho[n - 1] - rho[n - 2]) / (knots_mm_[n - 1] - knots_mm_[n - 2]);
    return rho[n - 1] + (r_mm - knots_mm_[n - 1]) * slope;
}

double WarpMap::canonical_radius_mm(double angle, double radius) const {
    const KnotRow rho = knots_at(angle);
    const int n = n_boundaries();
    if (radius <= rho[0]) return radius * knots_mm_[0] / rho[0];
    for (int b = 1; b < n; ++b) {
        if (radius <= rho[b]) {
            const double t = (radius - rho[b - 1]) / (rho[b] - rho[b - 1]);
            return knots_mm_[b - 1] + t * (knots_mm_[b] - knots_mm_[b - 1]);
        }
    }
    const double slope = (knots_mm_[n - 1] - knots_mm_[n - 2]) / (rho[n - 1] - rho[n - 2]);
    return knots_mm_[n - 1] + (radius - rho[n - 1]) * slope;
}

PointPx WarpMap::to_normalized(PointPx source) const {
    const Eigen::Vector3d v = apply(normalization_, source);
    return {v(0) / v(2), v(1) / v(2)};
}

PointPx WarpMap::from_normalized(PointPx normalized) const {
    const Eigen::Vector3d v = apply(inverse_, normalized);
    return {v(0) / v(2), v(1) / v(2)};
}

PointPx WarpMap::canonical_to_source(PointPx canonical) const {
    const double dx = canonical.x - canonical_.center();
    const double dy = canonical.y - canonical_.center();
    const double r_px = std::hypot(dx, dy);
    if (r_px == 0.0) return center_src_;
    const double angle = std::atan2(dy, dx);
    const double rho = normalized_radius(angle, r_px * canonical_.mm_per_px());
    return from_normalized({dx / r_px * rho, dy / r_px * rho});
}

PointPx WarpMap::source_to_canonical(PointPx source) const {
    const PointPx q = to_normalized(source);
    const double rho = std::hypot(q.x, q.y);
    const double c = canonical_.center();
    if (rho == 0.0) return {c, c};
    const double angle = std::atan2(q.y, q.x);
    const double r_px = canonical_radius_mm(angle, rho) / canonical_.mm_per_px();
    return {c + q.x / rho * r_px, c + q.y / rho * r_px};
}

WarpMap build_radial_warp(const EllipseSet& set, const CanonicalFrame& canonical,
                          const TargetFaceSpec& spec, int n_angles) {
    require(n_angles >= 180, "n_angles must be >= 180");
    if (set.selected.size() < 2) {
        fail(ErrorKind::RectificationFailure, "warp needs at least two selected boundaries");
    }
    std::vector<Eigen::Matrix3d> conics;
    std::vector<double> knots_mm;
    for (BoundaryId id : set.selected) {
        conics.push_back(set.at(id).ellipse.conic());
        knots_mm.push_back(spec.color_boundary_radius_mm(id));
    }
    const Eigen::Matrix3d normalization = normalization_from_conics(conics.front(), conics.back());
    const Eigen::Matrix3d inverse = normalization.inverse();
    const Eigen::Vector3d center_h = inverse.col(2);
    const PointPx center{center_h(0) / center_h(2), center_h(1) / center_h(2)};
    for (BoundaryId id : set.selected) {
        if (!set.at(id).ellipse.contains(center)) {
            fail(ErrorKind::RectificationFailure,
                 std::string("estimated center lies outside the ") + boundary_name(id) + " ellipse");
        }
    }

    std::vector<Eigen::Matrix3d> normalized;
    for (const auto& c : conics) {
        Eigen::Matrix3d m = transform_conic(c, inverse);
        if (m(2, 2) > 0.0) m = -m;
        normalized.push_back(m);
    }
    const std::size_t nb = normalized.size();
    std::vector<double> radii(static_cast<std::size_t>(n_angles) * nb);
    for (int k = 0; k < n_angles; ++k) {
        const double angle = 2.0 * kPi * k / n_angles;
        const double dx = std::cos(angle);
        const double dy = std::sin(angle);
        double previous = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const double r = ray_exit(normalized[b], dx, dy);
            if (!(r > previous) || !std::isfinite(r)) {
                fail(ErrorKind::RectificationFailure,
                     "boundary radii not increasing at angle index " + std::to_string(k));
            }
            radii[static_cast<std::size_t>(k) * nb + b] = r;
            previous = r;
        }
    }
    return WarpMap(normalization, std::move(knots_mm), std::move(radii), n_angles, canonical);
}

RgbImage rectify_image(const RgbImage& image, const WarpMap& warp) {
    const int n = warp.canonical().size_px();
    RgbImage out(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const PointPx src = warp.canonical_to_source({x + 0.5, y + 0.5});
            out(x, y) = sample_bilinear(image, src.x, src.y);
        }
    }
    return out;
}

PointPx map_point(const WarpMap& warp, PointPx source) {
    require(std::isfinite(source.x) && std::isfinite(source.y), "map_point: non-finite point");
    return warp.source_to_canonical(source);
}

}  // namespace arrowscore::rectify
