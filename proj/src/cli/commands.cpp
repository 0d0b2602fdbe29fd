#include <arrowscore/cli.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include <arrowscore/decode.hpp>
#include <arrowscore/error.hpp>
#include <arrowscore/evaluate.hpp>
#include <arrowscore/heatmap.hpp>
#include <arrowscore/io.hpp>
#include <arrowscore/rectify.hpp>
#include <arrowscore/scoring.hpp>
#include <arrowscore/synth.hpp>

namespace arrowscore::cli {
namespace {

using io::Json;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::RectificationFailure: return kExitRectification;
        case ErrorKind::NumericFailure: return kExitNumeric;
        default: return kExitInput;
    }
}

int report(const Error& e, std::ostream& err, std::optional<std::string> stage = std::nullopt) {
    err << io::error_to_json(e, std::move(stage)).dump() << "\n";
    return exit_code_for(e.kind());
}

/// Runs `body`, turning library and I/O exceptions into an exit code.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        return report(e, err);
    } catch (const nlohmann::json::exception& e) {
        return report(Error(ErrorKind::InvalidInput, e.what()), err);
    } catch (const std::filesystem::filesystem_error& e) {
        return report(Error(ErrorKind::InvalidInput, e.what()), err);
    }
}

void ensure_parent(const Path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
}

struct PointsDoc {
    int frame_size_px = 0;
    std::vector<PointPx> points;
    std::optional<io::Annotation> annotation;
};

/// Accepts either a detections file or an annotation file.
PointsDoc read_points(const Path& path) {
    const Json doc = io::read_json(path);
    PointsDoc out;
    if (doc.is_object() && doc.contains("detections")) {
        const io::DetectionFile file = io::detections_from_json(doc);
        out.frame_size_px = file.frame_size_px;
        out.points = evaluate::detection_points(file.detections);
    } else {
        io::Annotation a = io::annotation_from_json(doc);
        out.frame_size_px = a.frame_size_px;
        out.points = a.points_px();
        out.annotation = std::move(a);
    }
    return out;
}

std::vector<Detection> as_detections(std::span<const PointPx> points) {
    std::vector<Detection> out;
    out.reserve(points.size());
    for (const PointPx& p : points) out.push_back({p.x, p.y, 1.0, false});
    return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "n/a"; }

std::map<std::string, Path> files_by_stem(const Path& dir, const std::string& ext) {
    if (!std::filesystem::is_directory(dir)) {
        fail(ErrorKind::InvalidInput, "not a directory: " + dir.string());
    }
    std::map<std::string, Path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) {
            out.emplace(entry.path().stem().string(), entry.path());
        }
    }
    return out;
}

int require_square(const heatmap::HeatTensor& tensor) {
    require(tensor.width() == tensor.height(),
            "heatmap must be square, got " + std::to_string(tensor.width()) + "x" +
                std::to_string(tensor.height()));
    return tensor.width();
}

}  // namespace

int cmd_rectify(const RectifyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const io::Config config = io::load_config(args.config);
        const RgbImage image = io::read_image(args.input);
        const rectify::RectifyResult result = rectify::rectify_photo(image, config.rectify_options());
        ensure_parent(args.output);
        io::write_png(args.output, result.canonical);
        if (args.debug_dir) {
            std::filesystem::create_directories(*args.debug_dir);
            for (const auto& m : result.masks) {
                io::write_mask_png(*args.debug_dir / (std::string("mask_") + boundary_name(m.boundary) + ".png"),
                                   m.mask);
            }
            io::write_text(*args.debug_dir / "ellipses.svg",
                           io::ellipse_overlay_svg(result, image.width(), image.height()));
            io::write_json(*args.debug_dir / "ellipses.json", io::ellipses_to_json(result));
            io::write_json(*args.debug_dir / "warp.json", io::warp_to_json(result.warp));
        }
        out << "rectified " << args.input.string() << " -> " << args.output.string() << " ("
            << result.ellipses.selected.size() << " boundaries)\n";
        return kExitOk;
    });
}

int cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        io::Config config = io::load_config(args.config);
        if (args.use_offsets) config.decoder.use_offsets = true;
        const heatmap::HeatTensor tensor = io::read_hmp1(args.heatmap);
        io::DetectionFile file;
        file.frame_size_px = tensor.width();
        file.detections = decode::decode(tensor, config.decoder);
        ensure_parent(args.output);
        io::write_json(args.output, io::detections_to_json(file));
        out << file.detections.size() << " detections\n";
        return kExitOk;
    });
}

int cmd_score(const ScoreArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        static_cast<void>(io::load_config(args.config));
        const io::DetectionFile file = io::detections_from_json(io::read_json(args.detections));
        const scoring::TargetScorecard card = scoring::score_detections(file.detections, file.frame_size_px);
        ensure_parent(args.output);
        io::write_json(args.output, io::scorecard_to_json(card, file.frame_size_px));
        out << "total " << card.total << " over " << card.arrows.size() << " arrows, average "
            << fmt_opt(card.average()) << "\n";
        return kExitOk;
    });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const io::Config config = io::load_config(args.config);
        const double radius = args.radius_px.value_or(config.match_radius_px);
        const PointsDoc pred = read_points(args.pred);
        const PointsDoc gt = read_points(args.gt);
        if (pred.frame_size_px != gt.frame_size_px) {
            fail(ErrorKind::InvalidInput, "frame mismatch: pred frame_size_px " +
                                              std::to_string(pred.frame_size_px) + " vs gt " +
                                              std::to_string(gt.frame_size_px));
        }
        const int frame = pred.frame_size_px;
        const evaluate::MatchResult match = evaluate::match_detections(pred.points, gt.points, radius);
        const evaluate::EvalReport report = evaluate::detection_metrics(match, frame);
        const auto pred_card = scoring::score_detections(as_detections(pred.points), frame);
        const auto gt_card = scoring::score_detections(as_detections(gt.points), frame);
        const evaluate::ArcheryReport archery =
            evaluate::archery_metrics(pred_card, gt_card, pred.points, gt.points, frame);
        ensure_parent(args.output);
        io::write_json(args.output, io::eval_to_json(report, archery, radius, frame));
        out << "TP " << report.counts.tp << " FP " << report.counts.fp << " FN " << report.counts.fn
            << " | P " << fmt(report.precision) << " R " << fmt(report.recall) << " F1 "
            << fmt(report.f1) << " | mean error " << fmt_opt(report.mean_error_mm) << " mm"
            << " | avg score pred " << fmt_opt(archery.avg_score_pred) << " gt "
            << fmt_opt(archery.avg_score_gt) << " | centroid error "
            << fmt_opt(archery.centroid_error_mm) << " mm\n";
        return kExitOk;
    });
}

int cmd_gridsearch(const GridSearchArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const io::Config config = io::load_config(args.config);
        const auto heatmaps = files_by_stem(args.heatmaps, ".hmp1");
        const auto gts = files_by_stem(args.gts, ".json");
        std::vector<std::string> unmatched;
        for (const auto& [stem, path] : heatmaps) {
            if (!gts.count(stem)) unmatched.push_back(path.filename().string());
        }
        for (const auto& [stem, path] : gts) {
            if (!heatmaps.count(stem)) unmatched.push_back(path.filename().string());
        }
        if (!unmatched.empty()) {
            std::string list;
            for (const auto& u : unmatched) list += (list.empty() ? "" : ", ") + u;
            fail(ErrorKind::InvalidInput, "unmatched stems: " + list);
        }
        if (heatmaps.empty()) fail(ErrorKind::InvalidInput, "no heatmap/ground-truth pairs found");

        std::vector<heatmap::HeatTensor> tensors;
        std::vector<std::vector<PointPx>> truths;
        for (const auto& [stem, path] : heatmaps) {
            tensors.push_back(io::read_hmp1(path));
            const int frame = require_square(tensors.back());
            PointsDoc doc = read_points(gts.at(stem));
            if (doc.annotation && doc.annotation->unit == io::PointUnit::Mm) {
                doc.annotation->frame_size_px = frame;
                doc.points = doc.annotation->points_px();
            } else if (doc.frame_size_px != frame) {
                fail(ErrorKind::InvalidInput, stem + ": ground truth frame " +
                                                  std::to_string(doc.frame_size_px) +
                                                  " does not match heatmap " + std::to_string(frame));
            }
            truths.push_back(std::move(doc.points));
        }

        const evaluate::GridSearchResult result =
            evaluate::grid_search_decoder(tensors, truths, config.decoder, config.match_radius_px);
        std::string csv = "threshold,kernel,tp,fp,fn,precision,recall,f1\n";
        for (const auto& row : result.rows) {
            csv += fmt(row.config.threshold, "%.10g") + "," + std::to_string(row.config.nms_kernel) +
                   "," + std::to_string(row.counts.tp) + "," + std::to_string(row.counts.fp) + "," +
                   std::to_string(row.counts.fn) + "," + fmt(row.precision, "%.10g") + "," +
                   fmt(row.recall, "%.10g") + "," + fmt(row.f1, "%.10g") + "\n";
        }
        ensure_parent(args.output);
        io::write_text(args.output, csv);
        const auto& best = result.best();
        Path best_path = args.output;
        best_path.replace_extension(".best.json");
        io::write_json(best_path, Json{{"row_index", result.best_index},
                                       {"threshold", best.config.threshold},
                                       {"nms_kernel", best.config.nms_kernel},
                                       {"separation_px", best.config.separation_px},
                                       {"use_offsets", best.config.use_offsets},
                                       {"tp", best.counts.tp},
                                       {"fp", best.counts.fp},
                                       {"fn", best.counts.fn},
                                       {"precision", best.precision},
                                       {"recall", best.recall},
                                       {"f1", best.f1}});
        out << "best threshold " << fmt(best.config.threshold) << " kernel " << best.config.nms_kernel
            << " F1 " << fmt(best.f1) << " over " << tensors.size() << " heatmaps\n";
        return kExitOk;
    });
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const io::Config config = io::load_config(args.config);
        require(args.count >= 1, "--count must be >= 1");
        const std::uint64_t seed0 = args.seed.value_or(0);
        const int arrows = args.arrows.value_or(config.synth.arrows);
        const double tilt = args.tilt_deg.value_or(config.synth.tilt_deg);
        const CanonicalFrame frame(config.canonical_size_px);
        std::filesystem::create_directories(args.out_dir);
        for (int i = 0; i < args.count; ++i) {
            const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(i);
            const synth::SynthCase sc =
                synth::generate_case(seed, arrows, tilt, TargetFaceSpec{}, frame, config.synth.options);
            const std::string stem = "case_" + std::to_string(seed);
            io::write_png(args.out_dir / (stem + ".png"), sc.image);
            const auto rectified = sc.rectified_gt();
            io::write_json(args.out_dir / (stem + ".json"),
                           io::annotation_to_json(io::annotation_from_mm(rectified, frame.size_px())));
            Json h = io::homography_to_json(sc.homography);
            Json face = Json::array();
            for (const PointMm& p : sc.gt_points_canonical) face.push_back(Json{{"x", p.x}, {"y", p.y}});
            h["seed"] = seed;
            h["tilt_deg"] = sc.tilt_deg;
            h["roll_rad"] = sc.roll_rad;
            h["brightness"] = sc.brightness;
            h["frame_size_px"] = frame.size_px();
            h["face_points_mm"] = std::move(face);
            io::write_json(args.out_dir / (stem + ".homography.json"), h);
            out << stem << ": " << arrows << " arrows, tilt " << fmt(sc.tilt_deg) << " deg\n";
        }
        return kExitOk;
    });
}

int cmd_gradcheck(const GradCheckArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        require(args.trials >= 1, "--trials must be >= 1");
        constexpr double kTolerance = 1e-4;
        const std::pair<heatmap::LossKind, const char*> kinds[] = {
            {heatmap::LossKind::Focal, "focal_loss"},
            {heatmap::LossKind::Offset, "offset_loss"},
            {heatmap::LossKind::Total, "total_loss"}};
        bool ok = true;
        for (const auto& [kind, name] : kinds) {
            double worst = 0.0;
            for (int t = 0; t < args.trials; ++t) {
                const auto seed = static_cast<std::uint64_t>(t);
                const heatmap::LossFixture fx = heatmap::random_fixture(seed);
                heatmap::GradCheckProblem problem = heatmap::make_loss_problem(kind, fx.tensor, fx.target);
                if (args.break_gradient) {
                    auto exact = problem.gradient;
                    problem.gradient = [exact](std::span<const double> x) {
                        std::vector<double> g = exact(x);
                        for (double& v : g) v = v * 1.01 + 1e-3;
                        return g;
                    };
                }
                worst = std::max(worst, heatmap::grad_check(problem, 1e-5, 200, seed).max_rel_error);
            }
            const bool pass = worst < kTolerance;
            ok = ok && pass;
            out << name << " max_rel_error " << fmt(worst, "%.3e") << (pass ? " ok" : " FAIL") << "\n";
        }
        if (!ok) {
            err << Json{{"error", std::string(to_string(ErrorKind::NumericFailure))},
                        {"message", "gradient check exceeded tolerance 1e-4"}}
                       .dump()
                << "\n";
            return kExitNumeric;
        }
        return kExitOk;
    });
}

int cmd_pipeline(const PipelineArgs& args, std::ostream& out, std::ostream& err) {
    std::string stage = "config";
    try {
        io::Config config = io::load_config(args.config);
        if (args.use_offsets) config.decoder.use_offsets = true;
        stage = "read";
        const RgbImage image = io::read_image(args.input);
        stage = "rectify";
        const rectify::RectifyResult result = rectify::rectify_photo(image, config.rectify_options());
        stage = "write";
        std::filesystem::create_directories(args.output_dir);
        io::write_png(args.output_dir / "canonical.png", result.canonical);
        Json summary{{"input", args.input.string()}, {"canonical", "canonical.png"}};
        if (!args.heatmap) {
            summary["note"] = "no heatmap supplied";
            io::write_json(args.output_dir / "summary.json", summary);
            out << "rectified; no heatmap supplied\n";
            return kExitOk;
        }
        stage = "decode";
        const heatmap::HeatTensor tensor = io::read_hmp1(*args.heatmap);
        const int frame = require_square(tensor);
        io::DetectionFile detections{frame, decode::decode(tensor, config.decoder)};
        stage = "score";
        const scoring::TargetScorecard card = scoring::score_detections(detections.detections, frame);
        stage = "write";
        io::write_json(args.output_dir / "detections.json", io::detections_to_json(detections));
        io::write_json(args.output_dir / "scorecard.json", io::scorecard_to_json(card, frame));
        io::write_text(args.output_dir / "overlay.svg",
                       io::detections_overlay_svg(card, frame, TargetFaceSpec{}, "canonical.png"));
        summary["detections"] = "detections.json";
        summary["scorecard"] = "scorecard.json";
        summary["overlay"] = "overlay.svg";
        summary["total"] = card.total;
        io::write_json(args.output_dir / "summary.json", summary);
        out << card.arrows.size() << " arrows, total " << card.total << ", average "
            << fmt_opt(card.average()) << "\n";
        return kExitOk;
    } catch (const Error& e) {
        return report(e, err, stage);
    } catch (const nlohmann::json::exception& e) {
        return report(Error(ErrorKind::InvalidInput, e.what()), err, stage);
    } catch (const std::filesystem::filesystem_error& e) {
        return report(Error(ErrorKind::InvalidInput, e.what()), err, stage);
    }
}

}  // namespace arrowscore::cli
