#include <arrowscore/io.hpp>

#include <cstdio>
#include <sstream>

namespace arrowscore::io {
namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

constexpr const char* kBoundaryStroke[4] = {"#d4a000", "#c0202a", "#0070b0", "#404040"};

std::string header(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
}

}  // namespace

std::string ellipse_overlay_svg(const rectify::RectifyResult& result, int width, int height) {
    std::ostringstream out;
    out << header(width, height);
    for (const auto& attempt : result.attempts) {
        if (!attempt.fit) continue;
        const auto& e = attempt.fit->ellipse;
        const char* stroke = kBoundaryStroke[static_cast<int>(attempt.boundary)];
        out << "  <ellipse cx=\"" << num(e.cx) << "\" cy=\"" << num(e.cy) << "\" rx=\"" << num(e.a)
            << "\" ry=\"" << num(e.b) << "\" transform=\"rotate(" << num(e.phi * 180.0 / kPi) << " "
            << num(e.cx) << " " << num(e.cy) << ")\" fill=\"none\" stroke=\"" << stroke
            << "\" stroke-width=\"2\"><title>" << boundary_name(attempt.boundary)
            << " confidence " << num(attempt.fit->confidence) << "</title></ellipse>\n";
        for (const PointPx& p : attempt.fit->hull) {
            out << "  <circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y)
                << "\" r=\"2\" fill=\"" << stroke << "\"/>\n";
        }
    }
    const PointPx c = result.warp.center_src();
    out << "  <circle cx=\"" << num(c.x) << "\" cy=\"" << num(c.y)
        << "\" r=\"4\" fill=\"#00c000\"><title>center</title></circle>\n";
    out << "</svg>\n";
    return out.str();
}

std::string detections_overlay_svg(const scoring::TargetScorecard& card, int frame_size_px,
                                   const TargetFaceSpec& spec, const std::string& background_href) {
    std::ostringstream out;
    out << header(frame_size_px, frame_size_px);
    if (!background_href.empty()) {
        out << "  <image href=\"" << background_href << "\" x=\"0\" y=\"0\" width=\""
            << frame_size_px << "\" height=\"" << frame_size_px << "\"/>\n";
    }
    const double c = frame_size_px / 2.0;
    const double px_per_mm = frame_size_px / kFaceSpanMm;
    for (int i = 0; i < spec.ring_count; ++i) {
        out << "  <circle cx=\"" << num(c) << "\" cy=\"" << num(c) << "\" r=\""
            << num(spec.boundary_radius_mm(i) * px_per_mm)
            << "\" fill=\"none\" stroke=\"#808080\" stroke-width=\"1\"/>\n";
    }
    const double marker = spec.shaft_radius_mm() * px_per_mm;
    for (const auto& a : card.arrows) {
        out << "  <circle cx=\"" << num(a.detection.x) << "\" cy=\"" << num(a.detection.y)
            << "\" r=\"" << num(marker) << "\" fill=\"none\" stroke=\"#00e000\" stroke-width=\"1\"/>\n";
        out << "  <text x=\"" << num(a.detection.x + marker + 1.0) << "\" y=\""
            << num(a.detection.y - marker - 1.0) << "\" font-size=\"" << num(std::max(8.0, 2.5 * marker))
            << "\" fill=\"#00e000\">" << a.score << "</text>\n";
    }
    out << "  <text x=\"4\" y=\"16\" font-size=\"14\" fill=\"#000000\">total " << card.total
        << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace arrowscore::io
