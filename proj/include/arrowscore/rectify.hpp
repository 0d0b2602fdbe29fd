#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <arrowscore/core.hpp>
#include <arrowscore/image.hpp>

namespace arrowscore::rectify {

// ---------------------------------------------------------------------------
// Color classification
// ---------------------------------------------------------------------------

struct Lab {
    float l = 0.0f;
    float a = 0.0f;
    float b = 0.0f;
};

using LabImage = Grid<Lab>;

/// sRGB (D65) -> linear RGB -> XYZ -> CIELAB. Throws InvalidInput on an empty image.
LabImage rgb_to_lab(const RgbImage& image);
Lab srgb_to_lab(Rgb pixel);

/// Hue window in degrees, measured as atan2(b, a) in (-180, 180].
struct HueBand {
    double hue_min_deg = 0.0;
    double hue_max_deg = 0.0;
    double chroma_min = 0.0;
    std::optional<double> l_min;  ///< before the adaptive shift

    bool operator==(const HueBand&) const = default;
};

/// Per-pixel color thresholds. The L thresholds are shifted by
/// (median L of the image - adaptive_reference_l) * adaptive_gain.
struct ColorThresholdConfig {
    HueBand yellow{70.0, 110.0, 30.0, 50.0};
    HueBand red{15.0, 55.0, 30.0, std::nullopt};
    HueBand blue{-130.0, -70.0, 20.0, std::nullopt};
    double black_l_max = 35.0;
    double black_chroma_max = 25.0;
    double white_l_min = 70.0;
    double white_chroma_max = 15.0;
    double adaptive_reference_l = 60.0;
    double adaptive_gain = 0.5;

    bool operator==(const ColorThresholdConfig&) const = default;
};

enum class ColorClass : std::uint8_t { Other = 0, Yellow, Red, Blue, Black, White };

/// Classifies every pixel; `l_shift` is added to every L threshold.
Grid<ColorClass> classify_colors(const LabImage& lab, const ColorThresholdConfig& config,
                                 double l_shift);

/// The adaptive L shift derived from the image's median luminance.
double adaptive_l_shift(const LabImage& lab, const ColorThresholdConfig& config);

using Mask = Grid<std::uint8_t>;

/// Cumulative union of the color regions strictly inside one boundary,
/// e.g. red_blue = yellow | red.
struct BandMask {
    BoundaryId boundary = BoundaryId::YellowRed;
    Mask mask;
};

/// Four masks, innermost boundary first. Each is cleaned by a 3x3
/// opening then closing and reduced to its largest 8-connected component.
std::vector<BandMask> extract_band_masks(const LabImage& lab, const ColorThresholdConfig& config);

Mask morph_open(const Mask& mask);
Mask morph_close(const Mask& mask);
Mask largest_component(const Mask& mask);
std::size_t count_foreground(const Mask& mask);

// ---------------------------------------------------------------------------
// Ellipses
// ---------------------------------------------------------------------------

/// Center (cx, cy), semi-axes a >= b > 0, rotation phi in [0, pi) of the major axis.
struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.0;
    double b = 0.0;
    double phi = 0.0;

    double mean_radius() const { return 0.5 * (a + b); }
    double area() const { return kPi * a * b; }
    PointPx point_at(double t) const;
    /// Implicit conic matrix, scaled so the center evaluates to -1.
    Eigen::Matrix3d conic() const;
    bool contains(PointPx p) const;
};

/// Conic coefficients of a x^2 + b xy + c y^2 + d x + e y + f = 0.
struct Conic {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0, f = 0.0;

    double evaluate(double x, double y) const {
        return a * x * x + b * x * y + c * y * y + d * x + e * y + f;
    }
    /// First-order geometric distance |Q| / |grad Q|.
    double sampson_distance(double x, double y) const;
    Eigen::Matrix3d matrix() const;
};

/// Fitzgibbon's direct least-squares ellipse fit with 4ac - b^2 = 1,
/// solved through the reduced 3x3 eigenproblem. Needs >= 5 points.
Conic fit_conic_direct(std::span<const PointPx> points);
Ellipse conic_to_ellipse(const Conic& conic);

/// Convex hull (counter-clockwise in image coordinates, no collinear
/// points) of the pixel centers of the mask's foreground.
std::vector<PointPx> foreground_hull(const Mask& mask);
std::vector<PointPx> convex_hull(std::vector<PointPx> points);

struct EllipseFit {
    Ellipse ellipse;
    double confidence = 0.0;
    std::vector<PointPx> hull;
};

/// Hull + direct fit. Confidence is the fraction of hull vertices within
/// 2 px of the ellipse times min(1, foreground area / ellipse area).
/// Throws InsufficientData (< 50 px) or FitFailure.
EllipseFit fit_boundary_ellipse(const BandMask& mask);

struct EllipseCandidate {
    BoundaryId boundary = BoundaryId::YellowRed;
    Ellipse ellipse;
    double confidence = 0.0;
};

struct EllipseSet {
    std::map<BoundaryId, EllipseCandidate> entries;
    std::vector<BoundaryId> selected;  ///< innermost first

    const EllipseCandidate& at(BoundaryId id) const { return entries.at(id); }
};

/// True when every one of `samples` points on `inner` lies inside `outer`.
bool ellipse_nested(const Ellipse& inner, const Ellipse& outer, int samples = 360);

/// Maximum-confidence subset that nests and whose consecutive mean-radius
/// ratios match the nominal ones within +-15%. Throws
/// RectificationFailure when fewer than two boundaries survive.
EllipseSet select_nested_ellipses(std::span<const EllipseCandidate> candidates,
                                  const TargetFaceSpec& spec = {});

// ---------------------------------------------------------------------------
// Radial warp
// ---------------------------------------------------------------------------

/// Source -> canonical mapping. The source is first brought into a
/// normalized frame by a projective transform recovered from the
/// detected conics (the target center goes to the origin and the boundary
/// ellipses become near-concentric circles). Within that frame, each of
/// `n_angles` rays carries a piecewise-linear map from canonical radius
/// (mm) to normalized radius through the detected boundary knots.
class WarpMap {
public:
    WarpMap(Eigen::Matrix3d normalization, std::vector<double> knots_mm,
            std::vector<double> radii, int n_angles, CanonicalFrame canonical);

    int n_angles() const { return n_angles_; }
    int n_boundaries() const { return static_cast<int>(knots_mm_.size()); }
    const CanonicalFrame& canonical() const { return canonical_; }
    const std::vector<double>& knots_mm() const { return knots_mm_; }
    /// radii()[angle * n_boundaries + boundary]
    const std::vector<double>& radii() const { return radii_; }
    double radius(int angle_index, int boundary_index) const {
        return radii_[static_cast<std::size_t>(angle_index) * knots_mm_.size() +
                      static_cast<std::size_t>(boundary_index)];
    }
    const Eigen::Matrix3d& normalization() const { return normalization_; }
    /// Image of the target center in the source frame.
    PointPx center_src() const { return center_src_; }

    /// Normalized-frame radius for canonical radius r_mm along `angle`.
    double normalized_radius(double angle, double r_mm) const;
    /// Inverse of normalized_radius along `angle`.
    double canonical_radius_mm(double angle, double normalized_radius) const;

    PointPx canonical_to_source(PointPx canonical) const;
    PointPx source_to_canonical(PointPx source) const;

    PointPx to_normalized(PointPx source) const;
    PointPx from_normalized(PointPx normalized) const;

private:
    static constexpr int kMaxBoundaries = 4;
    using KnotRow = std::array<double, kMaxBoundaries>;
    /// Knots along `angle`, blended linearly between the two nearest samples.
    KnotRow knots_at(double angle) const;

    Eigen::Matrix3d normalization_;
    Eigen::Matrix3d inverse_;
    std::vector<double> knots_mm_;
    std::vector<double> radii_;
    int n_angles_;
    CanonicalFrame canonical_;
    PointPx center_src_;
};

/// Throws RectificationFailure if the conics do not enclose a common
/// center or the radii are not strictly increasing along some ray.
WarpMap build_radial_warp(const EllipseSet& set, const CanonicalFrame& canonical,
                          const TargetFaceSpec& spec = {}, int n_angles = 720);

/// Canonical image sampled bilinearly from the source; white outside.
RgbImage rectify_image(const RgbImage& image, const WarpMap& warp);

PointPx map_point(const WarpMap& warp, PointPx source);

// ---------------------------------------------------------------------------
// Whole pipeline
// ---------------------------------------------------------------------------

struct RectifyOptions {
    ColorThresholdConfig thresholds;
    int canonical_size_px = 2048;
    int n_angles = 720;

    bool operator==(const RectifyOptions&) const = default;
};

struct BoundaryAttempt {
    BoundaryId boundary = BoundaryId::YellowRed;
    std::size_t foreground = 0;
    std::optional<EllipseFit> fit;
    std::string error;  ///< why the fit was skipped, empty on success
};

struct RectifyResult {
    std::vector<BandMask> masks;
    std::vector<BoundaryAttempt> attempts;
    EllipseSet ellipses;
    WarpMap warp;
    RgbImage canonical;
};

/// Masks -> ellipse fits -> nested selection -> warp -> resampling.
/// Throws RectificationFailure when no usable nested pair exists.
RectifyResult rectify_photo(const RgbImage& image, const RectifyOptions& options = {},
                            const TargetFaceSpec& spec = {});

}  // namespace arrowscore::rectify
