#include "walshpp/kernels.hpp"

#include <omp.h>

#include <bit>
#include <cstdlib>
#include <string>

#include "walshpp/dyadic.hpp"

namespace walshpp::kernels {

namespace {

// Below this many elements the thread team costs more than the work.
constexpr std::size_t kParallelThreshold = 1u << 12;

void check_pow2(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) throw Error("transform length must be a power of two");
}

}  // namespace

void configure_threads() {
  const char* env = std::getenv("WALSHPP_THREADS");
  if (!env) return;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (end != env && *end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(n));
}

int max_threads() { return omp_get_max_threads(); }

void wht_serial(std::span<double> v) {
  const std::size_t n = v.size();
  check_pow2(n);
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t base = 0; base < n; base += 2 * h) {
      for (std::size_t i = base; i < base + h; ++i) {
        double x = v[i], y = v[i + h];
        v[i] = x + y;
        v[i + h] = x - y;
      }
    }
  }
}

void wht_parallel(std::span<double> v) {
  const std::size_t n = v.size();
  check_pow2(n);
  if (n < kParallelThreshold) {
    wht_serial(v);
    return;
  }
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  double* data = v.data();
  for (std::size_t h = 1; h < n; h <<= 1) {
    // Each butterfly pair is independent within a stage, so the result is
    // bitwise identical to the serial loop.
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
    for (std::ptrdiff_t p = 0; p < half; ++p) {
      std::size_t q = static_cast<std::size_t>(p);
      std::size_t i = (q / h) * 2 * h + (q % h);
      double x = data[i], y = data[i + h];
      data[i] = x + y;
      data[i + h] = x - y;
    }
  }
}

std::vector<double> wht_direct(std::span<const double> v) {
  const std::size_t n = v.size();
  check_pow2(n);
  std::vector<double> out(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      acc += (popcount(c & u) & 1) ? -v[c] : v[c];
    }
    out[u] = acc;
  }
  return out;
}

void block_wht_serial(std::span<double> v, std::size_t block) {
  check_pow2(block);
  if (v.size() % block) throw Error("block does not divide signal length");
  for (std::size_t s = 0; s < v.size(); s += block) wht_serial(v.subspan(s, block));
}

void block_wht_parallel(std::span<double> v, std::size_t block) {
  check_pow2(block);
  if (v.size() % block) throw Error("block does not divide signal length");
  const auto blocks = static_cast<std::ptrdiff_t>(v.size() / block);
  if (blocks == 1) {
    wht_parallel(v);
    return;
  }
#pragma omp parallel for schedule(static) if (v.size() >= kParallelThreshold)
  for (std::ptrdiff_t s = 0; s < blocks; ++s) {
    wht_serial(v.subspan(static_cast<std::size_t>(s) * block, block));
  }
}

}  // namespace walshpp::kernels
