#pragma once

#include <cstddef>
#include <cstdint>

namespace cnp {

// Arms are indexed 0..N-1 throughout the library; the CLI and CSV files
// never expose arm indices, so there is no 1-based boundary to convert at.
using ArmIndex = std::size_t;

// 0-based round index within a game. Trace rows report t = round + 1.
using Round = std::uint64_t;

}  // namespace cnp
