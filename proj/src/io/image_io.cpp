#include <arrowscore/io.hpp>
#include <arrowscore/error.hpp>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace arrowscore::io {
namespace {

const std::vector<int> kPngParams = {cv::IMWRITE_PNG_COMPRESSION, 6, cv::IMWRITE_PNG_STRATEGY,
                                     cv::IMWRITE_PNG_STRATEGY_DEFAULT};

void encode_to(const std::filesystem::path& path, const cv::Mat& mat) {
    std::vector<std::uint8_t> buffer;
    if (!cv::imencode(".png", mat, buffer, kPngParams)) {
        fail(ErrorKind::InvalidInput, "PNG encoding failed for " + path.string());
    }
    write_bytes(path, buffer);
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_bytes(path);
    if (bytes.empty()) fail(ErrorKind::InvalidInput, "empty image file " + path.string());
    cv::Mat mat;
    try {
        mat = cv::imdecode(bytes, cv::IMREAD_COLOR);
    } catch (const cv::Exception&) {
        mat.release();
    }
    if (mat.empty()) fail(ErrorKind::InvalidInput, "cannot decode image " + path.string());
    RgbImage image(mat.cols, mat.rows);
    for (int y = 0; y < mat.rows; ++y) {
        const auto* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < mat.cols; ++x) image(x, y) = {row[x][2], row[x][1], row[x][0]};
    }
    return image;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    require(!image.empty(), "cannot write an empty image");
    cv::Mat mat(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        auto* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width(); ++x) {
            const Rgb& p = image(x, y);
            row[x] = cv::Vec3b(p[2], p[1], p[0]);
        }
    }
    encode_to(path, mat);
}

void write_mask_png(const std::filesystem::path& path, const Grid<std::uint8_t>& mask) {
    require(!mask.empty(), "cannot write an empty mask");
    cv::Mat mat(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        auto* row = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < mask.width(); ++x) row[x] = mask(x, y) ? 255 : 0;
    }
    encode_to(path, mat);
}

}  // namespace arrowscore::io
