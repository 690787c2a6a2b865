#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace itemlab {

// SHA-256 of the input, as a lowercase hex string. Used for cache keys,
// config hashes, and transcript digests.
std::string sha256_hex(std::string_view data);

// FNV-1a 64-bit. Platform-independent, used for seeded per-pair draws.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace itemlab
