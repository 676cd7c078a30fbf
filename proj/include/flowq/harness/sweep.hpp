#pragma once

#include <cstdint>
#include <vector>

#include "flowq/harness/config.hpp"
#include "flowq/harness/runners.hpp"

namespace flowq::harness {

inline constexpr std::size_t kDefaultSweepCap = 10000;

// Cartesian product of grid {"key": [v0, v1, ...], ...}. Keys iterate in
// sorted order with the last key fastest. An empty value list yields no
// points. Throws SchemaError if the point count exceeds cap.
std::vector<Json> expand_grid(const Json& grid, std::size_t cap);

// params: {"algorithm": name, "base": {...}, "grid": {...},
//          "max_points": n, "threads": n (0 = hardware)}
// Point i runs with seed + i. Rows come out in grid order whatever the
// thread count.
RunResult run_sweep(const Json& params, std::uint64_t seed, bool oracle_check);

}  // namespace flowq::harness
