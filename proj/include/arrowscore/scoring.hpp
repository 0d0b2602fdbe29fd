#pragma once

#include <optional>
#include <span>
#include <vector>

#include <arrowscore/core.hpp>

namespace arrowscore::scoring {

struct ArrowScore {
    Detection detection;
    double distance_mm = 0.0;
    double effective_mm = 0.0;  ///< distance minus shaft radius
    int score = 0;              ///< 0 is a miss
};

struct TargetScorecard {
    std::vector<ArrowScore> arrows;
    int total = 0;

    /// Absent for an empty card.
    std::optional<double> average() const;
};

/// Line-cutting score: the shaft radius is subtracted from the center
/// distance and a shot exactly on a ring line takes the inner ring.
int score_arrow(double distance_mm, const TargetFaceSpec& spec = {});

TargetScorecard score_detections(std::span<const Detection> detections, int frame_size_px,
                                 const TargetFaceSpec& spec = {});

}  // namespace arrowscore::scoring
