#include <arrowscore/rectify.hpp>

#include <algorithm>
#include <cmath>
#include <queue>

namespace arrowscore::rectify {
namespace {

// D65 reference white, XYZ scaled so Y = 1.
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

const std::array<double, 256>& linear_lut() {
    static const std::array<double, 256> lut = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const double c = i / 255.0;
            t[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
        }
        return t;
    }();
    return lut;
}

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

bool in_hue_band(const HueBand& band, double hue, double chroma, double l, double l_shift) {
    if (chroma <= band.chroma_min) return false;
    if (hue < band.hue_min_deg || hue > band.hue_max_deg) return false;
    if (band.l_min && l <= *band.l_min + l_shift) return false;
    return true;
}

/// 3x3 min (erode) or max (dilate) with the window clipped at the border.
Mask filter3x3(const Mask& in, bool take_max) {
    const int w = in.width();
    const int h = in.height();
    Mask rows(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = in(x, y);
            if (x > 0) v = take_max ? std::max(v, in(x - 1, y)) : std::min(v, in(x - 1, y));
            if (x + 1 < w) v = take_max ? std::max(v, in(x + 1, y)) : std::min(v, in(x + 1, y));
            rows(x, y) = v;
        }
    }
    Mask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = rows(x, y);
            if (y > 0) v = take_max ? std::max(v, rows(x, y - 1)) : std::min(v, rows(x, y - 1));
            if (y + 1 < h) v = take_max ? std::max(v, rows(x, y + 1)) : std::min(v, rows(x, y + 1));
            out(x, y) = v;
        }
    }
    return out;
}

}  // namespace

Lab srgb_to_lab(Rgb pixel) {
    const auto& lut = linear_lut();
    const double r = lut[pixel[0]];
    const double g = lut[pixel[1]];
    const double b = lut[pixel[2]];
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);
    return {static_cast<float>(116.0 * fy - 16.0), static_cast<float>(500.0 * (fx - fy)),
            static_cast<float>(200.0 * (fy - fz))};
}

LabImage rgb_to_lab(const RgbImage& image) {
    require(!image.empty(), "rgb_to_lab: empty image");
    LabImage lab(image.width(), image.height());
    const auto& src = image.grid().values();
    auto& dst = lab.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = srgb_to_lab(src[i]);
    return lab;
}

double adaptive_l_shift(const LabImage& lab, const ColorThresholdConfig& config) {
    if (lab.empty()) return 0.0;
    std::vector<float> l(lab.size());
    for (std::size_t i = 0; i < lab.size(); ++i) l[i] = lab[i].l;
    const auto mid = l.begin() + static_cast<std::ptrdiff_t>(l.size() / 2);
    std::nth_element(l.begin(), mid, l.end());
    return (static_cast<double>(*mid) - config.adaptive_reference_l) * config.adaptive_gain;
}

Grid<ColorClass> classify_colors(const LabImage& lab, const ColorThresholdConfig& config,
                                 double l_shift) {
    Grid<ColorClass> classes(lab.width(), lab.height(), ColorClass::Other);
    constexpr double kRadToDeg = 180.0 / kPi;
    for (std::size_t i = 0; i < lab.size(); ++i) {
        const Lab& px = lab[i];
        const double chroma = std::hypot(px.a, px.b);
        const double hue = std::atan2(static_cast<double>(px.b), static_cast<double>(px.a)) *
                           kRadToDeg;
        ColorClass c = ColorClass::Other;
        if (in_hue_band(config.yellow, hue, chroma, px.l, l_shift)) {
            c = ColorClass::Yellow;
        } else if (in_hue_band(config.red, hue, chroma, px.l, l_shift)) {
            c = ColorClass::Red;
        } else if (in_hue_band(config.blue, hue, chroma, px.l, l_shift)) {
            c = ColorClass::Blue;
        } else if (px.l < config.black_l_max + l_shift && chroma < config.black_chroma_max) {
            c = ColorClass::Black;
        } else if (px.l > config.white_l_min + l_shift && chroma < config.white_chroma_max) {
            c = ColorClass::White;
        }
        classes[i] = c;
    }
    return classes;
}

Mask morph_open(const Mask& mask) { return filter3x3(filter3x3(mask, false), true); }
Mask morph_close(const Mask& mask) { return filter3x3(filter3x3(mask, true), false); }

std::size_t count_foreground(const Mask& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.values().begin(), mask.values().end(), [](auto v) { return v != 0; }));
}

Mask largest_component(const Mask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    Grid<int> label(w, h, -1);
    std::vector<std::size_t> sizes;
    std::vector<std::pair<int, int>> stack;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            if (!mask(x0, y0) || label(x0, y0) >= 0) continue;
            const int id = static_cast<int>(sizes.size());
            std::size_t size = 0;
            stack.assign(1, {x0, y0});
            label(x0, y0) = id;
            while (!stack.empty()) {
                const auto [x, y] = stack.back();
                stack.pop_back();
                ++size;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (mask.contains(nx, ny) && mask(nx, ny) && label(nx, ny) < 0) {
                            label(nx, ny) = id;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
            }
            sizes.push_back(size);
        }
    }
    Mask out(w, h, 0);
    if (sizes.empty()) return out;
    const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = label[i] == best ? 1 : 0;
    return out;
}

std::vector<BandMask> extract_band_masks(const LabImage& lab, const ColorThresholdConfig& config) {
    const Grid<ColorClass> classes = classify_colors(lab, config, adaptive_l_shift(lab, config));
    // Color classes strictly inside each boundary, cumulatively.
    constexpr std::array<ColorClass, 4> kInner = {ColorClass::Yellow, ColorClass::Red,
                                                  ColorClass::Blue, ColorClass::Black};
    std::vector<BandMask> masks;
    Mask cumulative(lab.width(), lab.height(), 0);
    for (std::size_t k = 0; k < kInner.size(); ++k) {
        for (std::size_t i = 0; i < classes.size(); ++i) {
            if (classes[i] == kInner[k]) cumulative[i] = 1;
        }
        Mask cleaned = largest_component(morph_close(morph_open(cumulative)));
        masks.push_back({kAllBoundaries[k], std::move(cleaned)});
    }
    return masks;
}

}  // namespace arrowscore::rectify
