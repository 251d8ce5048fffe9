#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace koopq::csv {

// Shortest-roundtrip-safe decimal: 17 significant digits, %.17g.
std::string fmt(double v);

// 64-bit FNV-1a, used for config hashes in CSV header comments.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace koopq::csv
