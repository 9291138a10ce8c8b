#pragma once

#include <cstddef>
#include <cstdint>

namespace gcf {

// Selects between the OpenMP kernels and their serial reference versions.
// Both paths produce bit-identical results; the serial path exists for
// testing and benchmarking.
enum class Exec { kSerial, kParallel };

// 0 means "all available cores".
void set_num_threads(int threads);
int max_threads();

// Per-task seed derivation (splitmix64) so that parallel work units get
// independent streams regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace gcf
