#include <arrowscore/rectify.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace arrowscore::rectify {
namespace {

constexpr double kRatioTolerance = 0.15;

struct SubsetScore {
    double confidence = -1.0;
    int members = 0;
    double spread = 0.0;  ///< center scatter relative to the outer radius, lower is better
};

bool better(const SubsetScore& lhs, const SubsetScore& rhs) {
    constexpr double eps = 1e-9;
    if (lhs.confidence > rhs.confidence + eps) return true;
    if (lhs.confidence < rhs.confidence - eps) return false;
    if (lhs.members != rhs.members) return lhs.members > rhs.members;
    return lhs.spread < rhs.spread - eps;
}

}  // namespace

bool ellipse_nested(const Ellipse& inner, const Ellipse& outer, int samples) {
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * kPi * i / samples;
        if (!outer.contains(inner.point_at(t))) return false;
    }
    return true;
}

EllipseSet select_nested_ellipses(std::span<const EllipseCandidate> candidates,
                                  const TargetFaceSpec& spec) {
    std::set<BoundaryId> seen;
    for (const auto& c : candidates) {
        require(seen.insert(c.boundary).second,
                std::string("duplicate candidate for boundary ") + boundary_name(c.boundary));
        require(c.confidence >= 0.0 && c.confidence <= 1.0, "candidate confidence outside [0, 1]");
    }
    if (candidates.size() < 2) {
        fail(ErrorKind::RectificationFailure,
             "need at least two boundary ellipses, got " + std::to_string(candidates.size()));
    }

    std::vector<EllipseCandidate> sorted(candidates.begin(), candidates.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& l, const auto& r) { return l.boundary < r.boundary; });
    const std::size_t n = sorted.size();

    // Pairwise compatibility, i < j in boundary order.
    std::vector<std::vector<bool>> compatible(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double nominal = spec.color_boundary_radius_mm(sorted[j].boundary) /
                                   spec.color_boundary_radius_mm(sorted[i].boundary);
            const double observed =
                sorted[j].ellipse.mean_radius() / sorted[i].ellipse.mean_radius();
            const bool ratio_ok = std::abs(observed / nominal - 1.0) <= kRatioTolerance;
            compatible[i][j] = ratio_ok && ellipse_nested(sorted[i].ellipse, sorted[j].ellipse);
        }
    }

    std::uint32_t best_mask = 0;
    SubsetScore best_score;
    for (std::uint32_t subset = 1; subset < (1u << n); ++subset) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (subset & (1u << i)) members.push_back(i);
        }
        if (members.size() < 2) continue;
        bool ok = true;
        for (std::size_t p = 0; ok && p < members.size(); ++p) {
            for (std::size_t q = p + 1; ok && q < members.size(); ++q) {
                ok = compatible[members[p]][members[q]];
            }
        }
        if (!ok) continue;

        SubsetScore score;
        score.members = static_cast<int>(members.size());
        score.confidence = 0.0;
        double wx = 0.0, wy = 0.0, wsum = 0.0;
        for (std::size_t m : members) {
            const auto& c = sorted[m];
            score.confidence += c.confidence;
            const double w = std::max(c.confidence, 1e-12);
            wx += w * c.ellipse.cx;
            wy += w * c.ellipse.cy;
            wsum += w;
        }
        wx /= wsum;
        wy /= wsum;
        for (std::size_t m : members) {
            score.spread = std::max(score.spread,
                                    std::hypot(sorted[m].ellipse.cx - wx, sorted[m].ellipse.cy - wy));
        }
        score.spread /= sorted[members.back()].ellipse.mean_radius();
        if (better(score, best_score)) {
            best_score = score;
            best_mask = subset;
        }
    }
    if (best_mask == 0) {
        fail(ErrorKind::RectificationFailure, "no nested, ratio-consistent pair of boundary ellipses");
    }

    EllipseSet set;
    for (std::size_t i = 0; i < n; ++i) {
        set.entries[sorted[i].boundary] = sorted[i];
        if (best_mask & (1u << i)) set.selected.push_back(sorted[i].boundary);
    }
    return set;
}

}  // namespace arrowscore::rectify
