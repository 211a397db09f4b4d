#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace walshpp::verify {

/// Instance counts are the full acceptance counts times `scale`.
struct Options {
  double scale = 1.0;
  std::uint64_t seed = 1;
};

struct SuiteResult {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string first_failure;
  double seconds = 0.0;

  bool ok() const { return failures == 0; }
  void record(bool pass, const std::string& what);
};

/// transform, indicator, wavepackets, projections, sorting, partitions,
/// truncation, vdp, jumps, intervals, cz, m2, stack.
std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, const Options& opt = {});
std::vector<SuiteResult> run_all(const Options& opt = {});

/// run_all at a small instance count, computed once per process.
bool preflight();

}  // namespace walshpp::verify
