#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <arrowscore/core.hpp>
#include <arrowscore/decode.hpp>
#include <arrowscore/heatmap.hpp>
#include <arrowscore/scoring.hpp>

namespace arrowscore::evaluate {

/// Dense row-major cost matrix.
struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    CostMatrix() = default;
    CostMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  ///< (row, col), ascending by row
    double cost = 0.0;
};

/// Minimum-cost matching of min(rows, cols) pairs. Among optimal
/// matchings the lexicographically smallest (row, col) list is returned.
/// Throws InvalidInput on non-finite entries.
Assignment hungarian(const CostMatrix& cost);

struct MatchPair {
    int pred = 0;
    int gt = 0;
    double distance_px = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<int> false_positives;
    std::vector<int> false_negatives;
    double match_radius_px = 15.0;

    int tp() const { return static_cast<int>(pairs.size()); }
    int fp() const { return static_cast<int>(false_positives.size()); }
    int fn() const { return static_cast<int>(false_negatives.size()); }
};

inline constexpr double kDefaultMatchRadiusPx = 15.0;

/// Hungarian on the full distance matrix; assigned pairs farther than
/// `radius_px` count as one FP and one FN.
MatchResult match_detections(std::span<const PointPx> preds, std::span<const PointPx> gts,
                             double radius_px = kDefaultMatchRadiusPx);

struct Counts {
    int tp = 0;
    int fp = 0;
    int fn = 0;

    double precision() const;  ///< 0 when tp + fp == 0
    double recall() const;     ///< 0 when tp + fn == 0
    double f1() const;         ///< 0 when precision + recall == 0
    Counts& operator+=(const Counts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

struct EvalReport {
    Counts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> mean_error_mm;  ///< absent without true positives
};

EvalReport detection_metrics(const MatchResult& match, int output_frame_px);

struct ArcheryReport {
    std::optional<double> avg_score_pred;
    std::optional<double> avg_score_gt;
    std::optional<double> rel_error_pct;
    std::optional<double> signed_error_points;
    std::optional<double> centroid_error_mm;
};

ArcheryReport archery_metrics(const scoring::TargetScorecard& pred_card,
                              const scoring::TargetScorecard& gt_card,
                              std::span<const PointPx> preds, std::span<const PointPx> gts,
                              int frame_size_px);

struct GridRow {
    decode::DecoderConfig config;
    Counts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct GridSearchResult {
    std::vector<GridRow> rows;  ///< threshold-major, kernel-minor
    std::size_t best_index = 0;

    const GridRow& best() const { return rows[best_index]; }
};

/// Ordering used to pick the best row: higher F1, then higher precision,
/// then lower threshold, then smaller kernel.
bool grid_row_better(const GridRow& lhs, const GridRow& rhs);

/// Pooled-count F1 over the corpus for every grid candidate.
GridSearchResult grid_search_decoder(std::span<const heatmap::HeatTensor> tensors,
                                     std::span<const std::vector<PointPx>> gts,
                                     const decode::DecoderConfig& base = {},
                                     double match_radius_px = kDefaultMatchRadiusPx);

std::vector<PointPx> detection_points(std::span<const Detection> detections);

}  // namespace arrowscore::evaluate
