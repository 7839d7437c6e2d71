// Mask and SDF file I/O.
//
// Masks are read from binary PGM (P5) or non-interlaced grayscale PNG
// (bit depth 1/2/4/8); a pixel is foreground when its intensity exceeds
// 127. Masks are written as P5 with foreground 255, background 0.
//
// SDF maps use the toolkit's own "SDF1" container, bit-exact across
// platforms:
//   bytes 0..3   ASCII magic "SDF1"
//   bytes 4..7   height, unsigned 32-bit little-endian
//   bytes 8..11  width, unsigned 32-bit little-endian
//   byte  12     normalized flag (0 or 1)
//   if flag: two IEEE-754 64-bit little-endian floats, mean then std
//   then height*width IEEE-754 32-bit little-endian floats, row-major
#pragma once

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <zlib.h>

#include "grid.hpp"

namespace focussdf {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for reading: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure: " + path);
    return bytes;
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failure: " + path);
}

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint32_t get_u32be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

// ---- PGM (P5) ----

inline BinaryMask parse_pgm(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    std::size_t pos = 2;  // past "P5"
    auto next_token = [&]() -> std::uint64_t {
        // Skip whitespace and '#' comments, then read a decimal token.
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
            throw IoError("malformed PGM header: " + path);
        std::uint64_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 0xffffffffull) throw IoError("malformed PGM header: " + path);
            ++pos;
        }
        return v;
    };

    const std::uint64_t width = next_token();
    const std::uint64_t height = next_token();
    const std::uint64_t maxval = next_token();
    if (width == 0 || height == 0) throw IoError("zero-sized image: " + path);
    if (maxval == 0 || maxval > 255)
        throw IoError("unsupported format: PGM maxval " + std::to_string(maxval) +
                      " (only 8-bit supported): " + path);
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw IoError("malformed PGM header: " + path);
    ++pos;  // single whitespace between maxval and raster

    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    if (bytes.size() - pos < pixels) throw IoError("truncated PGM raster: " + path);

    std::vector<std::uint8_t> labels(pixels);
    for (std::size_t i = 0; i < pixels; ++i) labels[i] = bytes[pos + i] > 127 ? 1 : 0;
    return BinaryMask::from_data(static_cast<int>(height), static_cast<int>(width),
                                 std::move(labels));
}

// ---- PNG (strict subset: non-interlaced grayscale) ----

inline int paeth_predictor(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

inline std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* src, std::size_t len,
                                              std::size_t expected, const std::string& path) {
    std::vector<std::uint8_t> out(expected);
    uLongf out_len = static_cast<uLongf>(expected);
    const int rc = ::uncompress(out.data(), &out_len, src, static_cast<uLong>(len));
    if (rc != Z_OK || out_len != expected)
        throw IoError("corrupt or truncated PNG image data: " + path);
    return out;
}

inline BinaryMask parse_png(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    static const std::uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), signature, 8) != 0)
        throw IoError("not a PNG file: " + path);

    std::uint32_t width = 0, height = 0;
    int bit_depth = 0;
    bool have_ihdr = false, have_iend = false;
    std::vector<std::uint8_t> idat;

    std::size_t pos = 8;
    while (pos + 8 <= bytes.size() && !have_iend) {
        const std::uint32_t len = get_u32be(&bytes[pos]);
        if (pos + 12 + static_cast<std::size_t>(len) > bytes.size())
            throw IoError("truncated PNG chunk: " + path);
        const std::uint8_t* type = &bytes[pos + 4];
        const std::uint8_t* data = &bytes[pos + 8];
        const std::uint32_t stored_crc = get_u32be(data + len);
        const std::uint32_t crc =
            static_cast<std::uint32_t>(::crc32(::crc32(0L, type, 4), data, len));
        if (crc != stored_crc) throw IoError("PNG chunk CRC mismatch: " + path);

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw IoError("malformed PNG IHDR: " + path);
            width = get_u32be(data);
            height = get_u32be(data + 4);
            bit_depth = data[8];
            const int color_type = data[9], compression = data[10], filter = data[11],
                      interlace = data[12];
            if (width == 0 || height == 0) throw IoError("zero-sized image: " + path);
            if (color_type != 0)
                throw IoError("unsupported format: PNG color type " +
                              std::to_string(color_type) + " (grayscale only): " + path);
            if (bit_depth != 1 && bit_depth != 2 && bit_depth != 4 && bit_depth != 8)
                throw IoError("unsupported format: PNG bit depth " + std::to_string(bit_depth) +
                              ": " + path);
            if (compression != 0 || filter != 0)
                throw IoError("unsupported format: nonstandard PNG compression/filter: " + path);
            if (interlace != 0)
                throw IoError("unsupported format: interlaced PNG: " + path);
            have_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            if (!have_ihdr) throw IoError("PNG IDAT before IHDR: " + path);
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            have_iend = true;
        }
        pos += 12 + static_cast<std::size_t>(len);
    }
    if (!have_ihdr || !have_iend || idat.empty())
        throw IoError("truncated PNG stream: " + path);

    const std::size_t row_bytes =
        (static_cast<std::size_t>(width) * static_cast<std::size_t>(bit_depth) + 7) / 8;
    const std::size_t raw_size = (row_bytes + 1) * height;
    std::vector<std::uint8_t> raw = zlib_inflate(idat.data(), idat.size(), raw_size, path);

    // Unfilter scanlines in place; one byte per pixel step at <=8-bit gray.
    std::vector<std::uint8_t> prev(row_bytes, 0), cur(row_bytes);
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(width) * height);
    const int scale = 255 / ((1 << bit_depth) - 1);

    for (std::uint32_t r = 0; r < height; ++r) {
        const std::uint8_t* line = &raw[r * (row_bytes + 1)];
        const int filter = line[0];
        const std::uint8_t* src = line + 1;
        for (std::size_t i = 0; i < row_bytes; ++i) {
            const int a = i > 0 ? cur[i - 1] : 0;
            const int b = prev[i];
            const int c = i > 0 ? prev[i - 1] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth_predictor(a, b, c); break;
                default: throw IoError("corrupt PNG: unknown filter type: " + path);
            }
            cur[i] = static_cast<std::uint8_t>(v & 0xff);
        }
        for (std::uint32_t x = 0; x < width; ++x) {
            int sample;
            if (bit_depth == 8) {
                sample = cur[x];
            } else {
                const std::size_t bit = static_cast<std::size_t>(x) * bit_depth;
                sample = (cur[bit / 8] >> (8 - bit_depth - bit % 8)) & ((1 << bit_depth) - 1);
            }
            labels[static_cast<std::size_t>(r) * width + x] = sample * scale > 127 ? 1 : 0;
        }
        std::swap(prev, cur);
    }
    return BinaryMask::from_data(static_cast<int>(height), static_cast<int>(width),
                                 std::move(labels));
}

}  // namespace detail

/// Load a mask from PGM (P5) or grayscale PNG; format sniffed from magic
/// bytes, not the extension. Intensity > 127 maps to foreground.
inline BinaryMask load_mask(const std::string& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5')
        return detail::parse_pgm(bytes, path);
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P')
        return detail::parse_png(bytes, path);
    throw IoError("unsupported format (expected P5 PGM or grayscale PNG): " + path);
}

/// Write a mask as binary PGM, foreground 255 / background 0.
inline void save_mask(const BinaryMask& mask, const std::string& path) {
    std::vector<std::uint8_t> bytes;
    const std::string header = "P5\n" + std::to_string(mask.width()) + " " +
                               std::to_string(mask.height()) + "\n255\n";
    bytes.insert(bytes.end(), header.begin(), header.end());
    bytes.reserve(bytes.size() + mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) bytes.push_back(mask[i] ? 255 : 0);
    detail::write_file(path, bytes);
}

/// Write an SDF1 container. Values are narrowed to 32-bit floats; a value
/// whose magnitude overflows float range is an error rather than an Inf.
inline void save_sdf(const SdfMap& sdf, const std::string& path) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(17 + 4 * sdf.size());
    const char magic[4] = {'S', 'D', 'F', '1'};
    bytes.insert(bytes.end(), magic, magic + 4);
    detail::put_u32le(bytes, static_cast<std::uint32_t>(sdf.height()));
    detail::put_u32le(bytes, static_cast<std::uint32_t>(sdf.width()));
    bytes.push_back(sdf.normalized() ? 1 : 0);
    if (sdf.normalized()) {
        detail::put_u64le(bytes, std::bit_cast<std::uint64_t>(sdf.norm_params()->mean));
        detail::put_u64le(bytes, std::bit_cast<std::uint64_t>(sdf.norm_params()->std));
    }
    for (std::size_t i = 0; i < sdf.size(); ++i) {
        const float v = static_cast<float>(sdf[i]);
        if (!std::isfinite(v))
            throw IoError("SDF value not representable as a finite 32-bit float: " + path);
        detail::put_u32le(bytes, std::bit_cast<std::uint32_t>(v));
    }
    detail::write_file(path, bytes);
}

/// Read an SDF1 container written by save_sdf.
inline SdfMap load_sdf(const std::string& path) {
    const std::vector<std::uint8_t> bytes = detail::read_file(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "SDF1", 4) != 0)
        throw IoError("bad magic (expected SDF1): " + path);
    if (bytes.size() < 13) throw IoError("truncated SDF1 header: " + path);
    const std::uint32_t height = detail::get_u32le(&bytes[4]);
    const std::uint32_t width = detail::get_u32le(&bytes[8]);
    const std::uint8_t flag = bytes[12];
    if (height == 0 || width == 0) throw IoError("zero-sized SDF1 map: " + path);
    if (flag > 1) throw IoError("corrupt SDF1 normalized flag: " + path);

    std::size_t pos = 13;
    std::optional<NormParams> norm;
    if (flag) {
        if (bytes.size() < pos + 16) throw IoError("truncated SDF1 header: " + path);
        NormParams p;
        p.mean = std::bit_cast<double>(detail::get_u64le(&bytes[pos]));
        p.std = std::bit_cast<double>(detail::get_u64le(&bytes[pos + 8]));
        if (!std::isfinite(p.mean) || !(p.std > 0.0))
            throw IoError("corrupt SDF1 normalization parameters: " + path);
        norm = p;
        pos += 16;
    }

    const std::size_t pixels = static_cast<std::size_t>(height) * width;
    if (bytes.size() - pos < 4 * pixels) throw IoError("truncated SDF1 payload: " + path);
    std::vector<double> values(pixels);
    for (std::size_t i = 0; i < pixels; ++i) {
        const float v = std::bit_cast<float>(detail::get_u32le(&bytes[pos + 4 * i]));
        if (!std::isfinite(v)) throw IoError("non-finite value in SDF1 payload: " + path);
        values[i] = v;
    }
    return SdfMap::from_data(static_cast<int>(height), static_cast<int>(width),
                             std::move(values), norm);
}

}  // namespace focussdf
