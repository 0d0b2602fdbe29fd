#include <arrowscore/io.hpp>
#include <arrowscore/error.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace arrowscore::io {
namespace {

const Json& member(const Json& doc, const char* key, const std::string& where) {
    if (!doc.is_object()) fail(ErrorKind::InvalidInput, where + ": expected a JSON object");
    const auto it = doc.find(key);
    if (it == doc.end()) fail(ErrorKind::InvalidInput, where + ": missing \"" + key + "\"");
    return *it;
}

double finite_number(const Json& v, const std::string& what) {
    if (!v.is_number()) fail(ErrorKind::InvalidInput, what + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ErrorKind::InvalidInput, what + " must be finite");
    return d;
}

int frame_size(const Json& doc, const std::string& where) {
    const Json& v = member(doc, "frame_size_px", where);
    if (!v.is_number_integer() || v.get<long long>() <= 0 || v.get<long long>() > (1 << 20)) {
        fail(ErrorKind::InvalidInput, where + ": frame_size_px must be a positive integer");
    }
    return v.get<int>();
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json point_json(PointPx p) { return Json{{"x", p.x}, {"y", p.y}}; }

Json ellipse_json(const rectify::Ellipse& e) {
    return Json{{"cx", e.cx}, {"cy", e.cy}, {"a", e.a}, {"b", e.b}, {"phi", e.phi}};
}

Json matrix_json(const Eigen::Matrix3d& m) {
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r) rows.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
    return rows;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidInput, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::InvalidInput, "write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::InvalidInput, path.string() + ": malformed JSON: " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

std::vector<PointPx> Annotation::points_px() const {
    if (unit == PointUnit::PxCanonical) return points;
    std::vector<PointPx> out;
    out.reserve(points.size());
    for (const PointPx& p : points) out.push_back(mm_to_px({p.x, p.y}, frame_size_px));
    return out;
}

Annotation annotation_from_json(const Json& doc) {
    const std::string where = "annotation";
    Annotation a;
    a.frame_size_px = frame_size(doc, where);
    const Json& unit = member(doc, "unit", where);
    if (unit == "px_canonical") {
        a.unit = PointUnit::PxCanonical;
    } else if (unit == "mm") {
        a.unit = PointUnit::Mm;
    } else {
        fail(ErrorKind::InvalidInput, where + ": unit must be \"px_canonical\" or \"mm\"");
    }
    const Json& points = member(doc, "points", where);
    if (!points.is_array()) fail(ErrorKind::InvalidInput, where + ": points must be an array");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string at = where + ": points[" + std::to_string(i) + "]";
        a.points.push_back({finite_number(member(points[i], "x", at), at + ".x"),
                            finite_number(member(points[i], "y", at), at + ".y")});
    }
    return a;
}

Json annotation_to_json(const Annotation& annotation) {
    Json points = Json::array();
    for (const PointPx& p : annotation.points) points.push_back(point_json(p));
    return Json{{"frame_size_px", annotation.frame_size_px},
                {"unit", annotation.unit == PointUnit::Mm ? "mm" : "px_canonical"},
                {"points", std::move(points)}};
}

Annotation annotation_from_mm(std::span<const PointMm> points, int frame_size_px) {
    Annotation a;
    a.frame_size_px = frame_size_px;
    a.unit = PointUnit::Mm;
    for (const PointMm& p : points) a.points.push_back({p.x, p.y});
    return a;
}

DetectionFile detections_from_json(const Json& doc) {
    const std::string where = "detections file";
    DetectionFile file;
    file.frame_size_px = frame_size(doc, where);
    const Json& list = member(doc, "detections", where);
    if (!list.is_array()) fail(ErrorKind::InvalidInput, where + ": detections must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string at = where + ": detections[" + std::to_string(i) + "]";
        Detection d;
        d.x = finite_number(member(list[i], "x", at), at + ".x");
        d.y = finite_number(member(list[i], "y", at), at + ".y");
        if (list[i].contains("confidence")) {
            d.confidence = finite_number(list[i]["confidence"], at + ".confidence");
        }
        if (list[i].contains("refined")) {
            if (!list[i]["refined"].is_boolean()) {
                fail(ErrorKind::InvalidInput, at + ".refined must be a boolean");
            }
            d.refined = list[i]["refined"].get<bool>();
        }
        file.detections.push_back(d);
    }
    return file;
}

Json detections_to_json(const DetectionFile& file) {
    Json list = Json::array();
    for (const Detection& d : file.detections) {
        list.push_back(Json{{"x", d.x}, {"y", d.y}, {"confidence", d.confidence}, {"refined", d.refined}});
    }
    return Json{{"frame_size_px", file.frame_size_px}, {"detections", std::move(list)}};
}

Json scorecard_to_json(const scoring::TargetScorecard& card, int frame_size_px) {
    Json arrows = Json::array();
    for (const auto& a : card.arrows) {
        arrows.push_back(Json{{"x", a.detection.x},
                              {"y", a.detection.y},
                              {"confidence", a.detection.confidence},
                              {"distance_mm", a.distance_mm},
                              {"effective_mm", a.effective_mm},
                              {"score", a.score}});
    }
    return Json{{"frame_size_px", frame_size_px},
                {"total", card.total},
                {"average", optional_number(card.average())},
                {"arrows", std::move(arrows)}};
}

Json eval_to_json(const evaluate::EvalReport& eval, const evaluate::ArcheryReport& archery,
                  double match_radius_px, int frame_size_px) {
    return Json{{"frame_size_px", frame_size_px},
                {"match_radius_px", match_radius_px},
                {"detection",
                 {{"tp", eval.counts.tp},
                  {"fp", eval.counts.fp},
                  {"fn", eval.counts.fn},
                  {"precision", eval.precision},
                  {"recall", eval.recall},
                  {"f1", eval.f1},
                  {"mean_error_mm", optional_number(eval.mean_error_mm)}}},
                {"archery",
                 {{"avg_score_pred", optional_number(archery.avg_score_pred)},
                  {"avg_score_gt", optional_number(archery.avg_score_gt)},
                  {"rel_error_pct", optional_number(archery.rel_error_pct)},
                  {"signed_error_points", optional_number(archery.signed_error_points)},
                  {"centroid_error_mm", optional_number(archery.centroid_error_mm)}}}};
}

Json warp_to_json(const rectify::WarpMap& warp) {
    Json radii = Json::array();
    for (int k = 0; k < warp.n_angles(); ++k) {
        Json row = Json::array();
        for (int b = 0; b < warp.n_boundaries(); ++b) row.push_back(warp.radius(k, b));
        radii.push_back(std::move(row));
    }
    return Json{{"canonical_size_px", warp.canonical().size_px()},
                {"n_angles", warp.n_angles()},
                {"center_src", point_json(warp.center_src())},
                {"normalization", matrix_json(warp.normalization())},
                {"knots_mm", warp.knots_mm()},
                {"radii", std::move(radii)}};
}

Json ellipses_to_json(const rectify::RectifyResult& result) {
    Json attempts = Json::array();
    for (const auto& a : result.attempts) {
        Json entry{{"boundary", boundary_name(a.boundary)}, {"foreground_px", a.foreground}};
        if (a.fit) {
            entry["ellipse"] = ellipse_json(a.fit->ellipse);
            entry["confidence"] = a.fit->confidence;
        } else {
            entry["error"] = a.error;
        }
        attempts.push_back(std::move(entry));
    }
    Json selected = Json::array();
    for (BoundaryId id : result.ellipses.selected) selected.push_back(boundary_name(id));
    return Json{{"attempts", std::move(attempts)}, {"selected", std::move(selected)}};
}

Json homography_to_json(const Eigen::Matrix3d& h) {
    return Json{{"maps", "canonical_px_to_photo_px"}, {"matrix", matrix_json(h)}};
}

Json error_to_json(const Error& error, std::optional<std::string> stage) {
    Json doc{{"error", std::string(to_string(error.kind()))}, {"message", error.what()}};
    if (stage) doc["stage"] = *stage;
    return doc;
}

}  // namespace arrowscore::io
