#include "png_writer.hpp"

#include "braintune/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace braintune::tools {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<std::uint8_t>& data) {
    std::vector<std::uint8_t> buf;
    put_u32(buf, static_cast<std::uint32_t>(data.size()));
    buf.insert(buf.end(), type, type + 4);
    buf.insert(buf.end(), data.begin(), data.end());
    const auto crc = crc32(0L, buf.data() + 4, static_cast<uInt>(buf.size() - 4));
    put_u32(buf, static_cast<std::uint32_t>(crc));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

} // namespace

void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != width * height * 3)
        throw ContractError("write_png: pixel buffer does not match dimensions");
    // raw scanlines, filter byte 0 per row
    std::vector<std::uint8_t> raw;
    raw.reserve(height * (width * 3 + 1));
    for (std::size_t y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + static_cast<std::ptrdiff_t>(y * width * 3),
                   pixels.begin() + static_cast<std::ptrdiff_t>((y + 1) * width * 3));
    }
    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(), static_cast<uLong>(raw.size()),
                  6) != Z_OK)
        throw Error("write_png: zlib compression failed");
    compressed.resize(compressed_size);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    static const std::uint8_t signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(signature), 8);

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(width));
    put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // interlace
    write_chunk(out, "IHDR", ihdr);
    write_chunk(out, "IDAT", compressed);
    write_chunk(out, "IEND", {});
}

void write_matrix_heatmap(const std::filesystem::path& path, const std::vector<double>& values,
                          std::size_t n, std::size_t cell_px) {
    if (values.size() != n * n)
        throw ContractError("write_matrix_heatmap: values do not form an n x n matrix");
    const std::size_t px = n * cell_px;
    std::vector<std::uint8_t> pixels(px * px * 3);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = std::clamp(values[i * n + j], -1.0, 1.0);
            // -1 -> blue, 0 -> white, +1 -> red
            std::uint8_t r, g, b;
            if (v >= 0.0) {
                r = 255;
                g = b = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - v)));
            } else {
                b = 255;
                r = g = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 + v)));
            }
            for (std::size_t py = 0; py < cell_px; ++py) {
                for (std::size_t pxx = 0; pxx < cell_px; ++pxx) {
                    const std::size_t y = i * cell_px + py;
                    const std::size_t x = j * cell_px + pxx;
                    std::uint8_t* p = &pixels[(y * px + x) * 3];
                    p[0] = r;
                    p[1] = g;
                    p[2] = b;
                }
            }
        }
    }
    write_png(path, px, px, pixels);
}

} // namespace braintune::tools
