#include <arrowscore/evaluate.hpp>
#include <arrowscore/error.hpp>

#include <cmath>

namespace arrowscore::evaluate {
namespace {

double ratio(int num, int den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

std::optional<PointMm> centroid_mm(std::span<const PointPx> points, int frame_size_px) {
    if (points.empty()) return std::nullopt;
    double sx = 0.0, sy = 0.0;
    for (const auto& p : points) {
        sx += p.x;
        sy += p.y;
    }
    const double n = static_cast<double>(points.size());
    return px_to_mm({sx / n, sy / n}, frame_size_px);
}

}  // namespace

double Counts::precision() const { return ratio(tp, tp + fp); }
double Counts::recall() const { return ratio(tp, tp + fn); }
double Counts::f1() const {
    const double p = precision();
    const double r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::vector<PointPx> detection_points(std::span<const Detection> detections) {
    std::vector<PointPx> out;
    out.reserve(detections.size());
    for (const auto& d : detections) out.push_back({d.x, d.y});
    return out;
}

MatchResult match_detections(std::span<const PointPx> preds, std::span<const PointPx> gts,
                             double radius_px) {
    require(std::isfinite(radius_px) && radius_px > 0.0, "match radius must be > 0");
    MatchResult result;
    result.match_radius_px = radius_px;
    const int np = static_cast<int>(preds.size());
    const int ng = static_cast<int>(gts.size());
    CostMatrix cost(np, ng);
    for (int i = 0; i < np; ++i) {
        for (int j = 0; j < ng; ++j) {
            cost(i, j) = std::hypot(preds[static_cast<std::size_t>(i)].x - gts[static_cast<std::size_t>(j)].x,
                                    preds[static_cast<std::size_t>(i)].y - gts[static_cast<std::size_t>(j)].y);
        }
    }
    std::vector<char> pred_matched(static_cast<std::size_t>(np), 0), gt_matched(static_cast<std::size_t>(ng), 0);
    if (np > 0 && ng > 0) {
        for (const auto& [i, j] : hungarian(cost).pairs) {
            const double d = cost(i, j);
            if (d <= radius_px) {
                result.pairs.push_back({i, j, d});
                pred_matched[static_cast<std::size_t>(i)] = 1;
                gt_matched[static_cast<std::size_t>(j)] = 1;
            }
        }
    }
    for (int i = 0; i < np; ++i) {
        if (!pred_matched[static_cast<std::size_t>(i)]) result.false_positives.push_back(i);
    }
    for (int j = 0; j < ng; ++j) {
        if (!gt_matched[static_cast<std::size_t>(j)]) result.false_negatives.push_back(j);
    }
    return result;
}

EvalReport detection_metrics(const MatchResult& match, int output_frame_px) {
    require(output_frame_px > 0, "output frame size must be positive");
    EvalReport report;
    report.counts = {match.tp(), match.fp(), match.fn()};
    report.precision = report.counts.precision();
    report.recall = report.counts.recall();
    report.f1 = report.counts.f1();
    if (!match.pairs.empty()) {
        double sum = 0.0;
        for (const auto& p : match.pairs) sum += p.distance_px;
        report.mean_error_mm =
            sum / static_cast<double>(match.pairs.size()) * kFaceSpanMm / output_frame_px;
    }
    return report;
}

ArcheryReport archery_metrics(const scoring::TargetScorecard& pred_card,
                              const scoring::TargetScorecard& gt_card,
                              std::span<const PointPx> preds, std::span<const PointPx> gts,
                              int frame_size_px) {
    ArcheryReport report;
    report.avg_score_pred = pred_card.average();
    report.avg_score_gt = gt_card.average();
    if (report.avg_score_pred && report.avg_score_gt) {
        report.signed_error_points = *report.avg_score_pred - *report.avg_score_gt;
        if (*report.avg_score_gt != 0.0) {
            report.rel_error_pct = std::abs(*report.signed_error_points) / *report.avg_score_gt * 100.0;
        }
    }
    const auto cp = centroid_mm(preds, frame_size_px);
    const auto cg = centroid_mm(gts, frame_size_px);
    if (cp && cg) report.centroid_error_mm = std::hypot(cp->x - cg->x, cp->y - cg->y);
    return report;
}

}  // namespace arrowscore::evaluate
