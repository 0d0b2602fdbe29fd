#include <arrowscore/core.hpp>
#include <arrowscore/error.hpp>

#include <string>

namespace arrowscore {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::FitFailure: return "fit-failure";
        case ErrorKind::RectificationFailure: return "rectification-failure";
        case ErrorKind::NumericFailure: return "numeric-failure";
    }
    return "unknown";
}

const char* boundary_name(BoundaryId id) noexcept {
    switch (id) {
        case BoundaryId::YellowRed: return "yellow_red";
        case BoundaryId::RedBlue: return "red_blue";
        case BoundaryId::BlueBlack: return "blue_black";
        case BoundaryId::BlackWhite: return "black_white";
    }
    return "unknown";
}

std::optional<BoundaryId> boundary_from_name(std::string_view name) noexcept {
    for (BoundaryId id : kAllBoundaries) {
        if (name == boundary_name(id)) return id;
    }
    return std::nullopt;
}

void TargetFaceSpec::validate() const {
    require(ring_count >= 1, "ring_count must be >= 1");
    require(std::isfinite(ring_width_mm) && ring_width_mm > 0.0, "ring_width_mm must be > 0");
    require(std::isfinite(shaft_diameter_mm) && shaft_diameter_mm >= 0.0,
            "shaft_diameter_mm must be >= 0");
    require(face_radius_mm == ring_count * ring_width_mm,
            "face_radius_mm must equal ring_count * ring_width_mm");
    // Color transitions sit on every second ring line up to 160 mm.
    require(ring_count >= 8, "ring_count must be >= 8 to hold the color transitions");
}

CanonicalFrame::CanonicalFrame(int size_px) : size_px_(size_px) {
    require(size_px >= 64 && size_px % 2 == 0,
            "canonical frame size must be even and >= 64, got " + std::to_string(size_px));
}

PointMm px_to_mm(PointPx p, int frame_size_px) {
    require(frame_size_px > 0, "frame size must be positive");
    require(std::isfinite(p.x) && std::isfinite(p.y), "point coordinates must be finite");
    const double half = frame_size_px / 2.0;
    const double scale = kFaceSpanMm / frame_size_px;
    return {(p.x - half) * scale, (p.y - half) * scale};
}

PointPx mm_to_px(PointMm p, int frame_size_px) {
    require(frame_size_px > 0, "frame size must be positive");
    require(std::isfinite(p.x) && std::isfinite(p.y), "point coordinates must be finite");
    const double half = frame_size_px / 2.0;
    const double scale = frame_size_px / kFaceSpanMm;
    return {p.x * scale + half, p.y * scale + half};
}

double ring_outer_radius_mm(int score, const TargetFaceSpec& spec) {
    require(score >= 1 && score <= spec.ring_count,
            "score must be in [1, " + std::to_string(spec.ring_count) + "], got " +
                std::to_string(score));
    return (spec.ring_count + 1 - score) * spec.ring_width_mm;
}

}  // namespace arrowscore
