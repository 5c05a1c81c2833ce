#pragma once

// Versioned binary checkpoint container: magic, format version, a JSON
// config block, then each named tensor as (name, shape, raw little-endian
// 64-bit floats). save/load round-trips are byte-exact.

#include "braintune/trainer.hpp"

#include <filesystem>

namespace braintune {

inline constexpr char kCheckpointMagic[4] = {'B', 'T', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(ModelBundle& bundle, const std::filesystem::path& path);

/// Throws FormatError naming the offending field on version mismatch,
/// truncation or shape mismatch.
ModelBundle load_checkpoint(const std::filesystem::path& path);

} // namespace braintune
