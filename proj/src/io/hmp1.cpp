#include <arrowscore/io.hpp>
#include <arrowscore/error.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace arrowscore::io {
namespace {

constexpr char kMagic[4] = {'H', 'M', 'P', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

void put_f32(std::vector<std::uint8_t>& out, double value) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
}

[[noreturn]] void bad_byte(std::size_t offset, const std::string& what) {
    fail(ErrorKind::InvalidInput,
         "HMP1: bad byte at offset " + std::to_string(offset) + " (" + what + ")");
}

}  // namespace

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidInput, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::InvalidInput, "write failed: " + path.string());
}

std::vector<std::uint8_t> encode_hmp1(const heatmap::HeatTensor& tensor) {
    const std::size_t plane = tensor.logits.size();
    std::vector<std::uint8_t> out;
    out.reserve(kHmp1HeaderBytes + 4 * plane * static_cast<std::size_t>(tensor.channels()));
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kHmp1Version);
    out.insert(out.end(), 3, 0);
    put_u32(out, static_cast<std::uint32_t>(tensor.height()));
    put_u32(out, static_cast<std::uint32_t>(tensor.width()));
    put_u32(out, static_cast<std::uint32_t>(tensor.channels()));
    for (double v : tensor.logits.values()) put_f32(out, v);
    if (tensor.offsets) {
        for (double v : tensor.offsets->dx.values()) put_f32(out, v);
        for (double v : tensor.offsets->dy.values()) put_f32(out, v);
    }
    return out;
}

heatmap::HeatTensor decode_hmp1(const std::vector<std::uint8_t>& bytes) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (i >= bytes.size()) {
            fail(ErrorKind::InvalidInput, "HMP1: truncated header, expected " +
                                              std::to_string(kHmp1HeaderBytes) + " bytes, got " +
                                              std::to_string(bytes.size()));
        }
        if (bytes[i] != static_cast<std::uint8_t>(kMagic[i])) bad_byte(i, "magic");
    }
    if (bytes.size() < kHmp1HeaderBytes) {
        fail(ErrorKind::InvalidInput, "HMP1: truncated header, expected " +
                                          std::to_string(kHmp1HeaderBytes) + " bytes, got " +
                                          std::to_string(bytes.size()));
    }
    if (bytes[4] != kHmp1Version) bad_byte(4, "unsupported version " + std::to_string(bytes[4]));
    for (std::size_t i = 5; i < 8; ++i) {
        if (bytes[i] != 0) bad_byte(i, "reserved byte must be 0");
    }
    const std::uint32_t h = get_u32(bytes, 8);
    const std::uint32_t w = get_u32(bytes, 12);
    const std::uint32_t c = get_u32(bytes, 16);
    if (h == 0 || h > (1u << 15)) bad_byte(8, "height " + std::to_string(h));
    if (w == 0 || w > (1u << 15)) bad_byte(12, "width " + std::to_string(w));
    if (c != 1 && c != 3) bad_byte(16, "channels " + std::to_string(c));

    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t expected = kHmp1HeaderBytes + 4 * plane * c;
    if (bytes.size() != expected) {
        fail(ErrorKind::InvalidInput, "HMP1: payload length mismatch, expected " +
                                          std::to_string(expected) + " bytes, got " +
                                          std::to_string(bytes.size()));
    }

    heatmap::HeatTensor tensor(static_cast<int>(w), static_cast<int>(h), 0.0, c == 3);
    std::size_t at = kHmp1HeaderBytes;
    auto read_plane = [&](Grid<double>& g) {
        for (std::size_t i = 0; i < plane; ++i, at += 4) {
            const float v = std::bit_cast<float>(get_u32(bytes, at));
            if (!std::isfinite(v)) bad_byte(at, "non-finite value");
            g[i] = static_cast<double>(v);
        }
    };
    read_plane(tensor.logits);
    if (tensor.offsets) {
        read_plane(tensor.offsets->dx);
        read_plane(tensor.offsets->dy);
    }
    return tensor;
}

heatmap::HeatTensor read_hmp1(const std::filesystem::path& path) {
    return decode_hmp1(read_bytes(path));
}

void write_hmp1(const std::filesystem::path& path, const heatmap::HeatTensor& tensor) {
    write_bytes(path, encode_hmp1(tensor));
}

}  // namespace arrowscore::io
