#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace braintune {

/// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

} // namespace braintune
