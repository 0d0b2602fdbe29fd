#include <arrowscore/image.hpp>

#include <cmath>

namespace arrowscore {

Rgb sample_bilinear(const RgbImage& image, double x, double y, Rgb outside) {
    const int w = image.width();
    const int h = image.height();
    if (!(x >= 0.0 && y >= 0.0 && x < w && y < h)) return outside;

    const double fx = x - 0.5;
    const double fy = y - 0.5;
    const double x0f = std::floor(fx);
    const double y0f = std::floor(fy);
    const double tx = fx - x0f;
    const double ty = fy - y0f;
    const int x0 = std::clamp(static_cast<int>(x0f), 0, w - 1);
    const int y0 = std::clamp(static_cast<int>(y0f), 0, h - 1);
    const int x1 = std::clamp(static_cast<int>(x0f) + 1, 0, w - 1);
    const int y1 = std::clamp(static_cast<int>(y0f) + 1, 0, h - 1);

    const Rgb& p00 = image(x0, y0);
    const Rgb& p10 = image(x1, y0);
    const Rgb& p01 = image(x0, y1);
    const Rgb& p11 = image(x1, y1);
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + (p10[c] - p00[c]) * tx;
        const double bottom = p01[c] + (p11[c] - p01[c]) * tx;
        const double v = top + (bottom - top) * ty;
        out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return out;
}

RgbImage rotate90_cw(const RgbImage& image) {
    const int w = image.width();
    const int h = image.height();
    RgbImage out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out(h - 1 - y, x) = image(x, y);
    }
    return out;
}

}  // namespace arrowscore
