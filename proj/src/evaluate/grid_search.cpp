#include <arrowscore/evaluate.hpp>
#include <arrowscore/error.hpp>

#include <map>

namespace arrowscore::evaluate {

bool grid_row_better(const GridRow& lhs, const GridRow& rhs) {
    if (lhs.f1 != rhs.f1) return lhs.f1 > rhs.f1;
    if (lhs.precision != rhs.precision) return lhs.precision > rhs.precision;
    if (lhs.config.threshold != rhs.config.threshold) return lhs.config.threshold < rhs.config.threshold;
    return lhs.config.nms_kernel < rhs.config.nms_kernel;
}

GridSearchResult grid_search_decoder(std::span<const heatmap::HeatTensor> tensors,
                                     std::span<const std::vector<PointPx>> gts,
                                     const decode::DecoderConfig& base, double match_radius_px) {
    require(!tensors.empty(), "grid search needs at least one heatmap");
    require(tensors.size() == gts.size(), "grid search: " + std::to_string(tensors.size()) +
                                              " heatmaps but " + std::to_string(gts.size()) +
                                              " ground-truth sets");
    const std::vector<decode::DecoderConfig> candidates = decode::grid_candidates(base);
    GridSearchResult result;
    result.rows.resize(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) result.rows[c].config = candidates[c];

    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const Grid<double> probs = decode::sigmoid_map(tensors[t].logits);
        std::map<int, std::vector<decode::Peak>> peaks_by_kernel;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            const auto& config = candidates[c];
            auto it = peaks_by_kernel.find(config.nms_kernel);
            if (it == peaks_by_kernel.end()) {
                it = peaks_by_kernel.emplace(config.nms_kernel, decode::nms_peaks(probs, config.nms_kernel)).first;
            }
            const auto detections = decode::decode_peaks(it->second, tensors[t], config);
            const auto points = detection_points(detections);
            const MatchResult match = match_detections(points, gts[t], match_radius_px);
            result.rows[c].counts += Counts{match.tp(), match.fp(), match.fn()};
        }
    }
    for (std::size_t c = 0; c < result.rows.size(); ++c) {
        GridRow& row = result.rows[c];
        row.precision = row.counts.precision();
        row.recall = row.counts.recall();
        row.f1 = row.counts.f1();
        if (c == 0 || grid_row_better(row, result.rows[result.best_index])) result.best_index = c;
    }
    return result;
}

}  // namespace arrowscore::evaluate
