#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string_view>

namespace arrowscore {

inline constexpr double kPi = 3.14159265358979323846;

/// Physical width of the face covered by any canonical frame.
inline constexpr double kFaceSpanMm = 400.0;

/// The four color transitions used for rectification, innermost first.
enum class BoundaryId { YellowRed = 0, RedBlue = 1, BlueBlack = 2, BlackWhite = 3 };

inline constexpr std::array<BoundaryId, 4> kAllBoundaries = {
    BoundaryId::YellowRed, BoundaryId::RedBlue, BoundaryId::BlueBlack, BoundaryId::BlackWhite};

const char* boundary_name(BoundaryId id) noexcept;
std::optional<BoundaryId> boundary_from_name(std::string_view name) noexcept;

/// Geometry of the 40 cm indoor face. Ring i (0-based, innermost first)
/// has outer radius (i + 1) * ring_width_mm.
struct TargetFaceSpec {
    int ring_count = 10;
    double ring_width_mm = 20.0;
    double face_radius_mm = 200.0;
    double shaft_diameter_mm = 4.5;

    double shaft_radius_mm() const { return shaft_diameter_mm / 2.0; }
    double boundary_radius_mm(int ring_index) const { return (ring_index + 1) * ring_width_mm; }
    /// Radius of a color transition: yellow/red sits on the 2nd ring line, etc.
    double color_boundary_radius_mm(BoundaryId id) const {
        return boundary_radius_mm(2 * static_cast<int>(id) + 1);
    }

    /// Throws InvalidInput when the invariants do not hold.
    void validate() const;
};

/// Square metric frame; the target center is the continuous point
/// (size_px / 2, size_px / 2) and pixel p spans [p, p + 1).
class CanonicalFrame {
public:
    explicit CanonicalFrame(int size_px = 2048);

    int size_px() const { return size_px_; }
    double mm_per_px() const { return kFaceSpanMm / size_px_; }
    double center() const { return size_px_ / 2.0; }

private:
    int size_px_;
};

struct PointPx {
    double x = 0.0;
    double y = 0.0;
};

/// Millimeters relative to the target center, +x right, +y down.
struct PointMm {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
};

struct Detection {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
    bool refined = false;
};

PointMm px_to_mm(PointPx p, int frame_size_px);
PointPx mm_to_px(PointMm p, int frame_size_px);

/// Outer radius of the ring awarding `score` points (1..10).
double ring_outer_radius_mm(int score, const TargetFaceSpec& spec = {});

}  // namespace arrowscore
