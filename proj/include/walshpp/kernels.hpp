#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a serial counterpart
// kept as the reference for tests and the benchmark target.

#include <cstddef>
#include <span>
#include <vector>

namespace walshpp::kernels {

/// Thread cap from WALSHPP_THREADS (unset or invalid: OpenMP default).
void configure_threads();
int max_threads();

/// In-place unnormalized Walsh-Hadamard transform, natural (Hadamard) order:
/// out[u] = sum_c in[c] * (-1)^popcount(c & u). Length must be a power of two.
void wht_serial(std::span<double> v);
void wht_parallel(std::span<double> v);

/// Direct O(N^2) evaluation of the same sum.
std::vector<double> wht_direct(std::span<const double> v);

/// Blockwise transform: applies the WHT independently to each contiguous
/// block of length `block` (a power of two dividing the length).
void block_wht_serial(std::span<double> v, std::size_t block);
void block_wht_parallel(std::span<double> v, std::size_t block);

}  // namespace walshpp::kernels
