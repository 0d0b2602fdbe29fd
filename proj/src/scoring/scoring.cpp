#include <arrowscore/scoring.hpp>
#include <arrowscore/error.hpp>

#include <cmath>

namespace arrowscore::scoring {

std::optional<double> TargetScorecard::average() const {
    if (arrows.empty()) return std::nullopt;
    return static_cast<double>(total) / static_cast<double>(arrows.size());
}

int score_arrow(double distance_mm, const TargetFaceSpec& spec) {
    require(std::isfinite(distance_mm) && distance_mm >= 0.0,
            "score_arrow: distance must be finite and >= 0");
    const double effective = distance_mm - spec.shaft_radius_mm();
    if (effective <= 0.0) return spec.ring_count;
    if (effective > spec.face_radius_mm) return 0;
    const int ring = static_cast<int>(std::ceil(effective / spec.ring_width_mm));
    return spec.ring_count + 1 - ring;
}

TargetScorecard score_detections(std::span<const Detection> detections, int frame_size_px,
                                 const TargetFaceSpec& spec) {
    TargetScorecard card;
    for (const Detection& d : detections) {
        ArrowScore a;
        a.detection = d;
        a.distance_mm = px_to_mm({d.x, d.y}, frame_size_px).norm();
        a.effective_mm = a.distance_mm - spec.shaft_radius_mm();
        a.score = score_arrow(a.distance_mm, spec);
        card.total += a.score;
        card.arrows.push_back(a);
    }
    return card;
}

}  // namespace arrowscore::scoring
