#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "walshpp/multnorm.hpp"
#include "walshpp/signal.hpp"

namespace walshpp {

/// Outer L^p_x norm of an inner norm of the bitile sums at x.
enum class StudyKind {
  carleson,        // sup_xi |S[f]|
  mainthm,         // V^r_xi of S[f]
  maxtrunc,        // sup_k V^r_xi of S_k[f]
  maxmodvartrunc,  // sup_xi V^r_k of S_k[f]
  mqstar,          // M^{q,*} of xi -> S_k[f](xi, x)
  mqs,             // M^{q,s} of the same family
};

enum class SignalKind { random_cells, wave_packets, indicator, single_packet, zero };

std::string to_string(StudyKind k);
std::string to_string(SignalKind k);
StudyKind study_kind_from_string(const std::string& s);
SignalKind signal_kind_from_string(const std::string& s);

struct ExperimentConfig {
  std::string id = "experiment";
  GridSpec grid{3, 3};
  StudyKind kind = StudyKind::carleson;
  SignalKind signal = SignalKind::random_cells;
  double p = 2.0;
  double q = 1.5;
  double r = 3.0;
  double s = 3.0;
  int trials = 8;
  std::uint64_t seed = 1;
  EstimateBudget budget{0, 0, 1, false};  // per-x estimator, kept cheap
  bool require_verified = true;
  std::string output;  // certificate path, empty for none

  /// Hypotheses required for `kind`; empty when they hold.
  std::optional<std::string> hypothesis_violation() const;
  /// Grid caps: N <= 2^12 for field studies, N <= 2^10 for per-x estimators.
  std::optional<std::string> resource_violation() const;
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool skipped = false;  // f = 0
  double ratio = 0.0;        // from the computed (or lower-estimated) inner norm
  double ratio_upper = 0.0;  // estimator studies: from the upper bounds
};

struct Certificate {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;
  double max_ratio = 0.0;
  double max_ratio_upper = 0.0;
  bool invariants_ok = true;  // verify suites, estimator brackets, closed forms
  std::vector<std::string> invariant_notes;
  std::optional<double> closed_form;  // single-packet studies with a known value
  nlohmann::json environment;
};

nlohmann::json to_json(const Certificate& c);
Certificate certificate_from_json(const nlohmann::json& j);

/// Seed of trial i, independent of scheduling.
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Test signals with dyadic values (packets aside).
DiscreteSignal random_cell_signal(const GridSpec& g, std::mt19937_64& rng);
DiscreteSignal random_packet_signal(const GridSpec& g, std::mt19937_64& rng);
DiscreteSignal random_indicator(const GridSpec& g, std::mt19937_64& rng);
/// phi_{[0,2^a) x w} for a random frequency cell w.
DiscreteSignal random_full_packet(const GridSpec& g, std::mt19937_64& rng);
DiscreteSignal generate_signal(SignalKind kind, const GridSpec& g, std::mt19937_64& rng);

struct StudyValue {
  double ratio = 0.0;
  double ratio_upper = 0.0;
  bool skipped = false;
};

/// One trial's ratio ||inner norm||_{L^p_x} / ||f||_p.
StudyValue study_ratio(const ExperimentConfig& cfg, const DiscreteSignal& f);

/// Value of the ratio for the single-packet signal, where it is known exactly.
std::optional<double> single_packet_value(StudyKind kind);

nlohmann::json environment_fingerprint();

Certificate run_experiment(const ExperimentConfig& cfg);

/// Regenerates every trial from its seed and compares the ratios bitwise.
bool revalidate(const Certificate& c, std::string* why = nullptr);

struct SweepConfig {
  ExperimentConfig base;
  std::vector<StudyKind> kinds;
  std::vector<int> bits;  // a + b, split as a = bits / 2
  std::vector<double> p, q, r, s;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);

struct SweepRow {
  StudyKind kind;
  GridSpec grid;
  double p, q, r, s;
  bool skipped = false;
  std::string reason;
  double max_ratio = 0.0;
  double max_ratio_upper = 0.0;
  bool invariants_ok = true;
  double seconds = 0.0;
};

std::vector<SweepRow> sweep(const SweepConfig& cfg);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace walshpp
