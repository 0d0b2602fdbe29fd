#include <arrowscore/synth.hpp>
#include <arrowscore/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace arrowscore::synth {
namespace {

constexpr double kSubOffsets[2] = {-0.25, 0.25};

Rgb zone_fill(int zone) {
    switch (zone) {
        case 0: return palette::kYellow;
        case 1: return palette::kRed;
        case 2: return palette::kBlue;
        case 3: return palette::kBlack;
        default: return palette::kWhite;
    }
}

Rgb zone_line(int zone) {
    switch (zone) {
        case 0: return palette::kYellowLine;
        case 1: return palette::kRedLine;
        case 2: return palette::kBlueLine;
        case 3: return palette::kBlackLine;
        default: return palette::kWhiteLine;
    }
}

Rgb average4(const std::array<Rgb, 4>& s) {
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        const int sum = s[0][c] + s[1][c] + s[2][c] + s[3][c];
        out[c] = static_cast<std::uint8_t>((sum + 2) / 4);
    }
    return out;
}

Rgb channel_min(Rgb a, Rgb b) {
    return {std::min(a[0], b[0]), std::min(a[1], b[1]), std::min(a[2], b[2])};
}

struct Hole {
    double cx = 0.0;  // px
    double cy = 0.0;
    double a = 0.0;
    double b = 0.0;
    double cos_t = 1.0;
    double sin_t = 0.0;

    /// Normalized elliptical radius with the semi-axes grown by `grow` px.
    double level(double x, double y, double grow) const {
        const double dx = x - cx;
        const double dy = y - cy;
        const double u = (dx * cos_t + dy * sin_t) / (a + grow);
        const double v = (-dx * sin_t + dy * cos_t) / (b + grow);
        return u * u + v * v;
    }
};

Eigen::Matrix3d rot_z(double a) {
    Eigen::Matrix3d r;
    r << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    return r;
}

Eigen::Matrix3d rot_x(double a) {
    Eigen::Matrix3d r;
    r << 1.0, 0.0, 0.0, 0.0, std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a);
    return r;
}

}  // namespace

Rgb face_color(double r_mm, const TargetFaceSpec& spec) {
    if (r_mm > spec.face_radius_mm) return palette::kSurround;
    const int ring = std::max(0, static_cast<int>(std::ceil(r_mm / spec.ring_width_mm)) - 1);
    const int zone = std::min(ring / 2, 4);
    if (r_mm >= spec.boundary_radius_mm(ring) - kRingLineWidthMm) return zone_line(zone);
    return zone_fill(zone);
}

RgbImage render_canonical_target(const TargetFaceSpec& spec, const CanonicalFrame& frame) {
    spec.validate();
    const int n = frame.size_px();
    const double c = frame.center();
    const double mmpp = frame.mm_per_px();
    RgbImage image(n, n);
    std::array<Rgb, 4> samples{};
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            int k = 0;
            for (double oy : kSubOffsets) {
                for (double ox : kSubOffsets) {
                    const double dx = (x + 0.5 + ox - c) * mmpp;
                    const double dy = (y + 0.5 + oy - c) * mmpp;
                    samples[k++] = face_color(std::hypot(dx, dy), spec);
                }
            }
            image(x, y) = average4(samples);
        }
    }
    return image;
}

RgbImage punch_holes(const RgbImage& image, std::span<const PointMm> points,
                     const TargetFaceSpec& spec, const CanonicalFrame& frame, std::uint64_t seed) {
    if (points.empty()) return image;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    std::uniform_real_distribution<double> angle(0.0, kPi);
    const double r_px = spec.shaft_radius_mm() / frame.mm_per_px();

    std::vector<Hole> holes;
    holes.reserve(points.size());
    for (const PointMm& p : points) {
        require(std::isfinite(p.x) && std::isfinite(p.y), "hole position must be finite");
        const PointPx c = mm_to_px(p, frame.size_px());
        Hole h;
        h.cx = c.x;
        h.cy = c.y;
        h.a = r_px * (1.0 + jitter(rng));
        h.b = r_px * (1.0 + jitter(rng));
        const double t = angle(rng);
        h.cos_t = std::cos(t);
        h.sin_t = std::sin(t);
        holes.push_back(h);
    }

    RgbImage out = image;
    for (const Hole& h : holes) {
        const double reach = std::max(h.a, h.b) + 2.0;
        const int x0 = std::max(0, static_cast<int>(std::floor(h.cx - reach)));
        const int x1 = std::min(image.width() - 1, static_cast<int>(std::ceil(h.cx + reach)));
        const int y0 = std::max(0, static_cast<int>(std::floor(h.cy - reach)));
        const int y1 = std::min(image.height() - 1, static_cast<int>(std::ceil(h.cy + reach)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                std::array<Rgb, 4> samples{};
                bool touched = false;
                int k = 0;
                for (double oy : kSubOffsets) {
                    for (double ox : kSubOffsets) {
                        const double sx = x + 0.5 + ox;
                        const double sy = y + 0.5 + oy;
                        Rgb v = out(x, y);
                        if (h.level(sx, sy, 0.0) <= 1.0) {
                            v = channel_min(v, palette::kHole);
                            touched = true;
                        } else if (h.level(sx, sy, 1.0) <= 1.0) {
                            v = channel_min(v, palette::kRim);
                            touched = true;
                        }
                        samples[k++] = v;
                    }
                }
                if (touched) out(x, y) = average4(samples);
            }
        }
    }
    return out;
}

PointPx apply_homography(const Eigen::Matrix3d& h, PointPx p) {
    const Eigen::Vector3d v = h * Eigen::Vector3d(p.x, p.y, 1.0);
    return {v.x() / v.z(), v.y() / v.z()};
}

RgbImage apply_homography(const RgbImage& image, const Eigen::Matrix3d& h, int out_width,
                          int out_height) {
    require(out_width > 0 && out_height > 0, "output size must be positive");
    require(h.allFinite() && std::abs(h.determinant()) > 1e-9, "homography is singular");
    const Eigen::Matrix3d inv = h.inverse();
    RgbImage out(out_width, out_height);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const Eigen::Vector3d s = inv * Eigen::Vector3d(x + 0.5, y + 0.5, 1.0);
            if (!(s.z() > 0.0)) continue;
            out(x, y) = sample_bilinear(image, s.x() / s.z(), s.y() / s.z());
        }
    }
    return out;
}

std::vector<PointMm> SynthCase::rectified_gt() const {
    const double c = std::cos(roll_rad);
    const double s = std::sin(roll_rad);
    std::vector<PointMm> out;
    out.reserve(gt_points_canonical.size());
    for (const PointMm& p : gt_points_canonical) out.push_back({c * p.x - s * p.y, s * p.x + c * p.y});
    return out;
}

SynthCase generate_case(std::uint64_t seed, int n_arrows, double max_tilt_deg,
                        const TargetFaceSpec& spec, const CanonicalFrame& frame,
                        const SynthOptions& options) {
    spec.validate();
    require(n_arrows >= 0, "n_arrows must be >= 0");
    require(max_tilt_deg >= 0.0 && max_tilt_deg <= 45.0, "max_tilt_deg must lie in [0, 45]");
    require(options.gaussian_fraction >= 0.0 && options.gaussian_fraction <= 1.0,
            "gaussian_fraction must lie in [0, 1]");
    require(options.gaussian_sigma_mm > 0.0, "gaussian_sigma_mm must be > 0");
    require(options.brightness_jitter >= 0.0 && options.brightness_jitter < 1.0,
            "brightness_jitter must lie in [0, 1)");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, options.gaussian_sigma_mm);

    SynthCase sc;
    sc.seed = seed;
    const double face_r = spec.face_radius_mm;
    for (int i = 0; i < n_arrows; ++i) {
        PointMm p;
        if (unit(rng) < options.gaussian_fraction) {
            do {
                p = {normal(rng), normal(rng)};
            } while (p.norm() > face_r);
        } else {
            const double r = face_r * std::sqrt(unit(rng));
            const double t = 2.0 * kPi * unit(rng);
            p = {r * std::cos(t), r * std::sin(t)};
        }
        sc.gt_points_canonical.push_back(p);
    }

    const int n = frame.size_px();
    const double tilt = max_tilt_deg * unit(rng) * kPi / 180.0;
    const double axis = 2.0 * kPi * unit(rng);
    const double roll = 2.0 * kPi * unit(rng);
    const double distance = 1000.0 + 1000.0 * unit(rng);
    const double ppx = n / 2.0 + (unit(rng) - 0.5) * 0.08 * n;
    const double ppy = n / 2.0 + (unit(rng) - 0.5) * 0.08 * n;
    sc.brightness = 1.0 + options.brightness_jitter * (2.0 * unit(rng) - 1.0);
    sc.tilt_deg = tilt * 180.0 / kPi;
    sc.roll_rad = roll;

    // The face radius spans 40% of the frame when seen head-on.
    const double focal = 0.4 * n / face_r * distance;
    const Eigen::Matrix3d r = rot_z(axis) * rot_x(tilt) * rot_z(-axis) * rot_z(roll);
    Eigen::Matrix3d k;
    k << focal, 0.0, ppx, 0.0, focal, ppy, 0.0, 0.0, 1.0;
    Eigen::Matrix3d rt;
    rt.col(0) = r.col(0);
    rt.col(1) = r.col(1);
    rt.col(2) = Eigen::Vector3d(0.0, 0.0, distance);
    const double mmpp = frame.mm_per_px();
    Eigen::Matrix3d to_mm;
    to_mm << mmpp, 0.0, -frame.center() * mmpp, 0.0, mmpp, -frame.center() * mmpp, 0.0, 0.0, 1.0;
    sc.homography = k * rt * to_mm;
    sc.homography /= sc.homography(2, 2);

    const RgbImage face = render_canonical_target(spec, frame);
    const RgbImage punched = punch_holes(face, sc.gt_points_canonical, spec, frame, seed ^ 0x9e3779b97f4a7c15ULL);
    RgbImage photo = apply_homography(punched, sc.homography, n, n);
    for (Rgb& px : photo.grid().values()) {
        for (auto& ch : px) {
            ch = static_cast<std::uint8_t>(std::clamp(std::lround(ch * sc.brightness), 0L, 255L));
        }
    }
    sc.image = std::move(photo);
    return sc;
}

}  // namespace arrowscore::synth
