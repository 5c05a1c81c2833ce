#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace braintune::tools {

/// Minimal RGB PNG writer (8-bit, zlib-compressed). pixels is row-major RGB,
/// 3 bytes per pixel.
void write_png(const std::filesystem::path& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels);

/// Diverging blue-white-red heatmap of a square matrix with values expected
/// in [-1, 1]; each cell becomes a cell_px * cell_px block.
void write_matrix_heatmap(const std::filesystem::path& path, const std::vector<double>& values,
                          std::size_t n, std::size_t cell_px = 16);

} // namespace braintune::tools
