#include <arrowscore/io.hpp>
#include <arrowscore/error.hpp>

#include <cmath>
#include <cstdlib>
#include <initializer_list>

namespace arrowscore::io {
namespace {

/// Rejects keys outside `allowed`, naming the offending key path.
void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(ErrorKind::InvalidInput, "config: " + path + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) {
            fail(ErrorKind::InvalidInput,
                 "config: unknown key \"" + (path.empty() ? key : path + "." + key) + "\"");
        }
    }
}

void read_number(const Json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return;
    const Json& v = obj[key];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
        fail(ErrorKind::InvalidInput, "config: " + path + "." + key + " must be a finite number");
    }
    out = v.get<double>();
}

void read_int(const Json& obj, const char* key, const std::string& path, int& out) {
    if (!obj.contains(key)) return;
    const Json& v = obj[key];
    if (!v.is_number_integer()) {
        fail(ErrorKind::InvalidInput, "config: " + path + "." + key + " must be an integer");
    }
    out = v.get<int>();
}

void read_bool(const Json& obj, const char* key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_boolean()) {
        fail(ErrorKind::InvalidInput, "config: " + path + "." + key + " must be a boolean");
    }
    out = obj[key].get<bool>();
}

void read_band(const Json& obj, const char* key, const std::string& path, rectify::HueBand& band) {
    if (!obj.contains(key)) return;
    const Json& b = obj[key];
    const std::string p = path + "." + key;
    check_keys(b, p, {"hue_min_deg", "hue_max_deg", "chroma_min", "l_min"});
    read_number(b, "hue_min_deg", p, band.hue_min_deg);
    read_number(b, "hue_max_deg", p, band.hue_max_deg);
    read_number(b, "chroma_min", p, band.chroma_min);
    if (b.contains("l_min")) {
        if (b["l_min"].is_null()) {
            band.l_min.reset();
        } else {
            double v = 0.0;
            read_number(b, "l_min", p, v);
            band.l_min = v;
        }
    }
}

Json band_json(const rectify::HueBand& b) {
    return Json{{"hue_min_deg", b.hue_min_deg},
                {"hue_max_deg", b.hue_max_deg},
                {"chroma_min", b.chroma_min},
                {"l_min", b.l_min ? Json(*b.l_min) : Json(nullptr)}};
}

}  // namespace

rectify::RectifyOptions Config::rectify_options() const {
    rectify::RectifyOptions o;
    o.thresholds = thresholds;
    o.canonical_size_px = canonical_size_px;
    o.n_angles = n_angles;
    return o;
}

Config config_from_json(const Json& doc) {
    Config c;
    check_keys(doc, "", {"thresholds", "loss", "decoder", "eval", "synth", "rectify"});

    if (doc.contains("thresholds")) {
        const Json& t = doc["thresholds"];
        const std::string p = "thresholds";
        check_keys(t, p, {"yellow", "red", "blue", "black_l_max", "black_chroma_max", "white_l_min",
                          "white_chroma_max", "adaptive_reference_l", "adaptive_gain"});
        read_band(t, "yellow", p, c.thresholds.yellow);
        read_band(t, "red", p, c.thresholds.red);
        read_band(t, "blue", p, c.thresholds.blue);
        read_number(t, "black_l_max", p, c.thresholds.black_l_max);
        read_number(t, "black_chroma_max", p, c.thresholds.black_chroma_max);
        read_number(t, "white_l_min", p, c.thresholds.white_l_min);
        read_number(t, "white_chroma_max", p, c.thresholds.white_chroma_max);
        read_number(t, "adaptive_reference_l", p, c.thresholds.adaptive_reference_l);
        read_number(t, "adaptive_gain", p, c.thresholds.adaptive_gain);
    }
    if (doc.contains("loss")) {
        const Json& l = doc["loss"];
        check_keys(l, "loss", {"alpha", "beta", "sigma_px", "mask_radius_px", "beta_off"});
        read_number(l, "alpha", "loss", c.loss.alpha);
        read_number(l, "beta", "loss", c.loss.beta);
        read_number(l, "sigma_px", "loss", c.loss.sigma_px);
        read_number(l, "mask_radius_px", "loss", c.loss.mask_radius_px);
        read_number(l, "beta_off", "loss", c.loss.beta_off);
        c.loss.validate();
    }
    if (doc.contains("decoder")) {
        const Json& d = doc["decoder"];
        check_keys(d, "decoder", {"threshold", "nms_kernel", "separation_px", "use_offsets"});
        read_number(d, "threshold", "decoder", c.decoder.threshold);
        read_int(d, "nms_kernel", "decoder", c.decoder.nms_kernel);
        read_number(d, "separation_px", "decoder", c.decoder.separation_px);
        read_bool(d, "use_offsets", "decoder", c.decoder.use_offsets);
        c.decoder.validate();
    }
    if (doc.contains("eval")) {
        const Json& e = doc["eval"];
        check_keys(e, "eval", {"match_radius_px"});
        read_number(e, "match_radius_px", "eval", c.match_radius_px);
        require(c.match_radius_px > 0.0, "config: eval.match_radius_px must be > 0");
    }
    if (doc.contains("synth")) {
        const Json& s = doc["synth"];
        check_keys(s, "synth", {"arrows", "tilt_deg", "gaussian_fraction", "gaussian_sigma_mm",
                                "brightness_jitter"});
        read_int(s, "arrows", "synth", c.synth.arrows);
        read_number(s, "tilt_deg", "synth", c.synth.tilt_deg);
        read_number(s, "gaussian_fraction", "synth", c.synth.options.gaussian_fraction);
        read_number(s, "gaussian_sigma_mm", "synth", c.synth.options.gaussian_sigma_mm);
        read_number(s, "brightness_jitter", "synth", c.synth.options.brightness_jitter);
        require(c.synth.arrows >= 0, "config: synth.arrows must be >= 0");
        require(c.synth.tilt_deg >= 0.0 && c.synth.tilt_deg <= 45.0,
                "config: synth.tilt_deg must lie in [0, 45]");
    }
    if (doc.contains("rectify")) {
        const Json& r = doc["rectify"];
        check_keys(r, "rectify", {"canonical_size_px", "n_angles"});
        read_int(r, "canonical_size_px", "rectify", c.canonical_size_px);
        read_int(r, "n_angles", "rectify", c.n_angles);
        static_cast<void>(CanonicalFrame{c.canonical_size_px});
        require(c.n_angles >= 180, "config: rectify.n_angles must be >= 180");
    }
    return c;
}

Json config_to_json(const Config& c) {
    const auto& t = c.thresholds;
    return Json{
        {"thresholds",
         {{"yellow", band_json(t.yellow)},
          {"red", band_json(t.red)},
          {"blue", band_json(t.blue)},
          {"black_l_max", t.black_l_max},
          {"black_chroma_max", t.black_chroma_max},
          {"white_l_min", t.white_l_min},
          {"white_chroma_max", t.white_chroma_max},
          {"adaptive_reference_l", t.adaptive_reference_l},
          {"adaptive_gain", t.adaptive_gain}}},
        {"loss",
         {{"alpha", c.loss.alpha},
          {"beta", c.loss.beta},
          {"sigma_px", c.loss.sigma_px},
          {"mask_radius_px", c.loss.mask_radius_px},
          {"beta_off", c.loss.beta_off}}},
        {"decoder",
         {{"threshold", c.decoder.threshold},
          {"nms_kernel", c.decoder.nms_kernel},
          {"separation_px", c.decoder.separation_px},
          {"use_offsets", c.decoder.use_offsets}}},
        {"eval", {{"match_radius_px", c.match_radius_px}}},
        {"synth",
         {{"arrows", c.synth.arrows},
          {"tilt_deg", c.synth.tilt_deg},
          {"gaussian_fraction", c.synth.options.gaussian_fraction},
          {"gaussian_sigma_mm", c.synth.options.gaussian_sigma_mm},
          {"brightness_jitter", c.synth.options.brightness_jitter}}},
        {"rectify", {{"canonical_size_px", c.canonical_size_px}, {"n_angles", c.n_angles}}}};
}

Config load_config(const std::optional<std::filesystem::path>& explicit_path) {
    if (explicit_path) return config_from_json(read_json(*explicit_path));
    if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
        return config_from_json(read_json(env));
    }
    return Config{};
}

}  // namespace arrowscore::io
