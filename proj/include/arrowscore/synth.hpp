#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include <arrowscore/core.hpp>
#include <arrowscore/image.hpp>

namespace arrowscore::synth {

/// Face colors. Ring lines use a darker shade of the zone they sit in, so
/// color classification never moves a band edge.
namespace palette {
inline constexpr Rgb kYellow = {255, 222, 0};
inline constexpr Rgb kRed = {230, 40, 45};
inline constexpr Rgb kBlue = {0, 150, 220};
inline constexpr Rgb kBlack = {40, 40, 42};
inline constexpr Rgb kWhite = {245, 245, 242};
inline constexpr Rgb kSurround = {228, 226, 218};
inline constexpr Rgb kYellowLine = {178, 155, 0};
inline constexpr Rgb kRedLine = {161, 28, 31};
inline constexpr Rgb kBlueLine = {0, 105, 154};
inline constexpr Rgb kBlackLine = {12, 12, 12};
inline constexpr Rgb kWhiteLine = {130, 130, 130};
inline constexpr Rgb kHole = {45, 38, 35};
inline constexpr Rgb kRim = {215, 205, 190};
}  // namespace palette

inline constexpr double kRingLineWidthMm = 0.5;

/// Face color at distance r_mm from the center, ring lines included.
Rgb face_color(double r_mm, const TargetFaceSpec& spec = {});

/// Concentric bands rendered with 2x2 supersampling about the frame center.
RgbImage render_canonical_target(const TargetFaceSpec& spec = {},
                                 const CanonicalFrame& frame = CanonicalFrame{});

/// Dark elliptical hole per point with a 1 px light rim, composited by
/// per-channel minimum. Semi-axes are the shaft radius with seeded +-20%
/// jitter.
RgbImage punch_holes(const RgbImage& image, std::span<const PointMm> points,
                     const TargetFaceSpec& spec, const CanonicalFrame& frame, std::uint64_t seed);

/// Forward map through H (homogeneous division included).
PointPx apply_homography(const Eigen::Matrix3d& h, PointPx p);

/// Inverse warp with bilinear sampling and white fill; H maps input pixel
/// coordinates to output pixel coordinates. Throws InvalidInput when H is
/// singular.
RgbImage apply_homography(const RgbImage& image, const Eigen::Matrix3d& h, int out_width,
                          int out_height);

struct SynthCase {
    std::uint64_t seed = 0;
    RgbImage image;
    std::vector<PointMm> gt_points_canonical;
    Eigen::Matrix3d homography = Eigen::Matrix3d::Identity();  ///< canonical px -> photo px
    double tilt_deg = 0.0;
    double roll_rad = 0.0;
    double brightness = 1.0;

    /// Ground truth as rectification recovers it: the face is rotationally
    /// symmetric, so the camera roll survives into the canonical frame.
    std::vector<PointMm> rectified_gt() const;
};

struct SynthOptions {
    double gaussian_fraction = 0.7;
    double gaussian_sigma_mm = 40.0;
    double brightness_jitter = 0.15;

    bool operator==(const SynthOptions&) const = default;
};

/// Seeded case: arrow positions, holes, camera homography (tilt up to
/// max_tilt_deg about a random axis, random roll, distance and principal
/// point jitter) and global brightness. The photo has the frame's size.
SynthCase generate_case(std::uint64_t seed, int n_arrows, double max_tilt_deg,
                        const TargetFaceSpec& spec = {}, const CanonicalFrame& frame = CanonicalFrame{},
                        const SynthOptions& options = {});

}  // namespace arrowscore::synth
