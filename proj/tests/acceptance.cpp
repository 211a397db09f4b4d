// One PASS/FAIL line per acceptance criterion. Optional argument: a path for
// the ratio sweep table.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "walshpp/harness.hpp"
#include "walshpp/kernels.hpp"
#include "walshpp/verify.hpp"

using namespace walshpp;

namespace {

struct Criterion {
  int id;
  const char* suite;
  const char* what;
  double max_seconds;  // 0: no runtime bound
};

const Criterion kSuites[] = {
    {1, "transform", "involution and Plancherel, rel err <= 1e-10, a+b <= 12", 30.0},
    {2, "indicator", "transform of 1_[0,1) exact on every grid", 0},
    {3, "wavepackets", "packet relations and orthogonality, exhaustive on 2^6 cells, <= 1e-12", 0},
    {4, "projections", "cover independence and nested projections, 100 regions, <= 1e-12", 0},
    {5, "sorting", "sorting postconditions, 1000 forests, zero violations", 0},
    {6, "partitions", "frequency partitions, u and l cases, 1000 instances", 0},
    {7, "truncation", "truncation and martingale identities, exact, 1000 instances", 0},
    {8, "vdp", "V^r program against enumeration, 10^4 sequences, exact", 0},
    {9, "jumps", "jump-cover bound and parent maps, 1000 sequences", 0},
    {10, "intervals", "interval decomposition bounds, 1000 step functions", 0},
    {11, "cz", "CZ decomposition properties, 1000 instances on 2^8 cells", 0},
    {12, "m2", "M^2 within 1e-6 on 100 multipliers, M^q witnesses within 1e-9", 0},
    {13, "stack", "stack variation inequality with constant 4, 10^4 trials", 0},
};

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void line(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

bool sweep_criterion(const char* csv_path) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepConfig s;
  s.base.id = "acceptance";
  s.base.signal = SignalKind::random_cells;
  s.base.trials = 2;
  s.base.seed = 7;
  s.kinds = {StudyKind::carleson, StudyKind::mainthm, StudyKind::maxtrunc,
             StudyKind::maxmodvartrunc, StudyKind::mqstar, StudyKind::mqs};
  s.bits = {6, 8, 10};
  s.p = {4.0};
  s.q = {1.5};
  s.r = {3.0};
  s.s = {3.0};
  const std::vector<SweepRow> rows = sweep(s);
  bool ok = rows.size() == s.kinds.size() * s.bits.size();
  for (const SweepRow& r : rows) {
    const bool good = !r.skipped && r.invariants_ok && std::isfinite(r.max_ratio) &&
                      std::isfinite(r.max_ratio_upper) && r.max_ratio > 0.0;
    ok = ok && good;
    std::printf("    %-15s a+b=%2d  max ratio %.6g  upper %.6g  %.1f s%s\n", to_string(r.kind).c_str(),
                r.grid.bits(), r.max_ratio, r.max_ratio_upper, r.seconds, good ? "" : "  <- bad row");
  }
  if (csv_path) {
    std::ofstream out(csv_path);
    write_sweep_csv(out, rows);
  }

  double worst = 0.0;
  for (StudyKind kind : {StudyKind::carleson, StudyKind::mainthm}) {
    for (int bits : s.bits) {
      ExperimentConfig c;
      c.id = "single-packet";
      c.kind = kind;
      c.grid = GridSpec(bits / 2, bits - bits / 2);
      c.signal = SignalKind::single_packet;
      c.p = 4.0;
      c.trials = 2;
      const Certificate cert = run_experiment(c);
      if (!cert.closed_form || !cert.invariants_ok) ok = false;
      for (const TrialRecord& t : cert.trials)
        worst = std::max(worst, cert.closed_form ? std::abs(t.ratio - *cert.closed_form) : INFINITY);
    }
  }
  ok = ok && worst <= 1e-9;
  const double secs = since(t0);
  ok = ok && secs < 600.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "ratio sweeps a+b in {6,8,10}: %zu rows finite; single packet |ratio - closed form| = %.2e "
                "(<= 1e-9); %.1f s (< 600 s)",
                rows.size(), worst, secs);
  line(14, ok, buf);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  kernels::configure_threads();
  bool all = true;
  for (const Criterion& c : kSuites) {
    const verify::SuiteResult r = verify::run_suite(c.suite);
    bool ok = r.ok() && r.checked > 0;
    if (c.max_seconds > 0 && r.seconds >= c.max_seconds) ok = false;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s: %zu checks, %zu failures, %.2f s%s%s", c.what, r.checked, r.failures,
                  r.seconds, r.failures ? "; first: " : "", r.first_failure.c_str());
    line(c.id, ok, buf);
    all = all && ok;
  }
  all = sweep_criterion(argc > 1 ? argv[1] : nullptr) && all;
  std::printf("%s\n", all ? "all criteria PASS" : "some criteria FAIL");
  return all ? 0 : 1;
}
