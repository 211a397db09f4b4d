#include "walshpp/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "walshpp/io.hpp"
#include "walshpp/kernels.hpp"
#include "walshpp/phaseplane.hpp"
#include "walshpp/varnorm.hpp"
#include "walshpp/verify.hpp"

namespace walshpp {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "walshpp 0.1.0";

const char* const kStudyNames[] = {"carleson", "mainthm", "maxtrunc", "maxmodvartrunc", "mqstar", "mqs"};
const char* const kSignalNames[] = {"random_cells", "wave_packets", "indicator", "single_packet", "zero"};

bool per_x_estimator(StudyKind k) { return k == StudyKind::mqstar || k == StudyKind::mqs; }

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double conjugate(double r) { return r / (r - 1.0); }

// Per-scale terms of S at a fixed x: terms[q * scales + (j - min_scale)].
struct Slice {
  std::size_t scales = 0;
  std::vector<double> terms;

  double truncated(std::size_t q, std::size_t kept) const {
    double s = 0.0;
    for (std::size_t j = 0; j < kept; ++j) s += terms[q * scales + j];
    return s;
  }
};

Slice slice_at(const FieldEngine& eng, std::size_t x) {
  const std::size_t n = eng.grid().size();
  Slice sl;
  sl.scales = static_cast<std::size_t>(eng.scale_count());
  sl.terms.assign(n * sl.scales, 0.0);
  for (std::size_t q = 0; q < n; ++q)
    eng.contributions(x, q, std::span<double>(sl.terms.data() + q * sl.scales, sl.scales));
  return sl;
}

struct InnerValue {
  double value = 0.0;
  double upper = 0.0;
  bool bracket_ok = true;
};

// Inner norm at one x. Frequencies run over the cell left endpoints and any
// xi >= 2^b, where every S_k in use equals f(x).
InnerValue inner_norm(const ExperimentConfig& cfg, const FieldEngine& eng, double fx, std::size_t x) {
  const GridSpec& g = eng.grid();
  const std::size_t n = g.size();
  const Slice sl = slice_at(eng, x);
  // S_k keeps scales j < k; slot t holds k = 1 - b + t for t in [0, scales].
  const std::size_t slots = sl.scales + 1;
  InnerValue out;
  switch (cfg.kind) {
    case StudyKind::carleson: {
      double m = std::abs(fx);
      for (std::size_t q = 0; q < n; ++q) m = std::max(m, std::abs(sl.truncated(q, sl.scales)));
      out.value = m;
      break;
    }
    case StudyKind::mainthm: {
      std::vector<double> seq(n + 1);
      for (std::size_t q = 0; q < n; ++q) seq[q] = sl.truncated(q, sl.scales);
      seq[n] = fx;
      out.value = variation_norm(seq, cfg.r);
      break;
    }
    case StudyKind::maxtrunc: {
      std::vector<double> seq(n + 1);
      for (std::size_t t = 0; t < slots; ++t) {
        for (std::size_t q = 0; q < n; ++q) seq[q] = sl.truncated(q, t);
        seq[n] = fx;
        out.value = std::max(out.value, variation_norm(seq, cfg.r));
      }
      break;
    }
    case StudyKind::maxmodvartrunc: {
      // k below 1 - b contributes the zero limit; past the grid, 0 then f(x).
      out.value = 2.0 * std::abs(fx);
      std::vector<double> seq(slots + 1, 0.0);
      for (std::size_t q = 0; q < n; ++q) {
        double acc = 0.0;
        for (std::size_t t = 1; t < slots; ++t) {
          acc += sl.terms[q * sl.scales + t - 1];
          seq[t + 1] = acc;
        }
        out.value = std::max(out.value, variation_norm(seq, cfg.r));
      }
      break;
    }
    case StudyKind::mqstar:
    case StudyKind::mqs: {
      std::vector<Multiplier> ms(slots, Multiplier(n, 0.0));
      bool any = false;
      for (std::size_t t = 0; t < slots; ++t)
        for (std::size_t q = 0; q < n; ++q) {
          ms[t][q] = sl.truncated(q, t);
          any = any || ms[t][q] != 0.0;
        }
      if (!any) break;
      EstimateBudget b = cfg.budget;
      b.seed = splitmix64(cfg.budget.seed ^ (x + 1));
      const NormEstimate e = cfg.kind == StudyKind::mqstar ? mqstar_norm_estimate(g, ms, cfg.q, b)
                                                           : mqs_norm_estimate(g, ms, cfg.q, cfg.s, b);
      out.value = e.lower;
      out.upper = e.upper;
      out.bracket_ok = e.lower <= e.upper;
      break;
    }
  }
  if (!per_x_estimator(cfg.kind)) out.upper = out.value;
  return out;
}

std::string format_exponent(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(StudyKind k) { return kStudyNames[static_cast<int>(k)]; }
std::string to_string(SignalKind k) { return kSignalNames[static_cast<int>(k)]; }

StudyKind study_kind_from_string(const std::string& s) {
  for (int i = 0; i < 6; ++i)
    if (s == kStudyNames[i]) return static_cast<StudyKind>(i);
  throw Error("unknown study kind '" + s + "'");
}

SignalKind signal_kind_from_string(const std::string& s) {
  for (int i = 0; i < 5; ++i)
    if (s == kSignalNames[i]) return static_cast<SignalKind>(i);
  throw Error("unknown signal kind '" + s + "'");
}

std::optional<std::string> ExperimentConfig::hypothesis_violation() const {
  if (!(p > 1.0 && p < std::numeric_limits<double>::infinity())) return "requires 1 < p < inf";
  switch (kind) {
    case StudyKind::carleson:
      break;
    case StudyKind::mainthm:
    case StudyKind::maxtrunc:
      if (!(r > 2.0)) return "requires r > 2";
      if (!(p > conjugate(r))) return "requires p > r'";
      break;
    case StudyKind::maxmodvartrunc:
      if (!(r > 2.0)) return "requires r > 2";
      break;
    case StudyKind::mqs:
      if (!(s > 2.0)) return "requires s > 2";
      [[fallthrough]];
    case StudyKind::mqstar:
      if (!(q > 1.0 && q < 2.0)) return "requires 1 < q < 2";
      if (!(1.0 / p + 1.0 / q < 1.5)) return "requires 1/p + 1/q < 3/2";
      break;
  }
  return std::nullopt;
}

std::optional<std::string> ExperimentConfig::resource_violation() const {
  const int cap = per_x_estimator(kind) ? 10 : 12;
  if (grid.bits() > cap) return "grid above 2^" + std::to_string(cap) + " cells for this study";
  if (trials < 0) return "negative trial count";
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (auto v = hypothesis_violation()) throw Error(to_string(kind) + ": " + *v);
  if (auto v = resource_violation()) throw Error(to_string(kind) + ": " + *v);
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("id")) c.id = j.at("id").get<std::string>();
  if (j.contains("grid")) c.grid = io::grid_from_json(j.at("grid"));
  if (j.contains("bits")) {
    const int bits = j.at("bits").get<int>();
    c.grid = GridSpec(bits / 2, bits - bits / 2);
  }
  if (j.contains("kind")) c.kind = study_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("signal")) c.signal = signal_kind_from_string(j.at("signal").get<std::string>());
  if (j.contains("p")) c.p = j.at("p").get<double>();
  if (j.contains("q")) c.q = j.at("q").get<double>();
  if (j.contains("r")) c.r = j.at("r").get<double>();
  if (j.contains("s")) c.s = j.at("s").get<double>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("budget")) {
    const json& b = j.at("budget");
    if (b.contains("starts")) c.budget.starts = b.at("starts").get<int>();
    if (b.contains("iterations")) c.budget.iterations = b.at("iterations").get<int>();
    if (b.contains("seed")) c.budget.seed = b.at("seed").get<std::uint64_t>();
    if (b.contains("member_witnesses")) c.budget.member_witnesses = b.at("member_witnesses").get<bool>();
  }
  if (j.contains("require_verified")) c.require_verified = j.at("require_verified").get<bool>();
  if (j.contains("output")) c.output = j.at("output").get<std::string>();
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {{"id", c.id},
          {"grid", io::to_json(c.grid)},
          {"kind", to_string(c.kind)},
          {"signal", to_string(c.signal)},
          {"p", c.p},
          {"q", c.q},
          {"r", c.r},
          {"s", c.s},
          {"trials", c.trials},
          {"seed", c.seed},
          {"budget",
           {{"starts", c.budget.starts},
            {"iterations", c.budget.iterations},
            {"seed", c.budget.seed},
            {"member_witnesses", c.budget.member_witnesses}}},
          {"require_verified", c.require_verified},
          {"output", c.output}};
}

json to_json(const Certificate& c) {
  json trials = json::array();
  for (const TrialRecord& t : c.trials) {
    json r{{"trial", t.trial}, {"seed", t.seed}, {"skipped", t.skipped}};
    if (!t.skipped) {
      r["ratio"] = t.ratio;
      r["ratio_upper"] = t.ratio_upper;
    }
    trials.push_back(r);
  }
  json out{{"experiment", to_json(c.config)},
           {"trials", trials},
           {"max_ratio", c.max_ratio},
           {"max_ratio_upper", c.max_ratio_upper},
           {"invariants_ok", c.invariants_ok},
           {"invariant_notes", c.invariant_notes},
           {"environment", c.environment}};
  if (c.closed_form) out["closed_form"] = *c.closed_form;
  return out;
}

Certificate certificate_from_json(const json& j) {
  Certificate c;
  c.config = config_from_json(j.at("experiment"));
  for (const json& t : j.at("trials")) {
    TrialRecord r;
    r.trial = t.at("trial").get<int>();
    r.seed = t.at("seed").get<std::uint64_t>();
    r.skipped = t.at("skipped").get<bool>();
    if (!r.skipped) {
      r.ratio = t.at("ratio").get<double>();
      r.ratio_upper = t.at("ratio_upper").get<double>();
    }
    c.trials.push_back(r);
  }
  c.max_ratio = j.at("max_ratio").get<double>();
  c.max_ratio_upper = j.at("max_ratio_upper").get<double>();
  c.invariants_ok = j.at("invariants_ok").get<bool>();
  c.invariant_notes = j.at("invariant_notes").get<std::vector<std::string>>();
  if (j.contains("closed_form")) c.closed_form = j.at("closed_form").get<double>();
  if (j.contains("environment")) c.environment = j.at("environment");
  return c;
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(trial));
}

DiscreteSignal random_cell_signal(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> v(-16, 16);
  DiscreteSignal f(g);
  for (double& x : f.values) x = v(rng) / 16.0;
  return f;
}

DiscreteSignal random_packet_signal(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4), scale(-g.b, g.a), coef(1, 4), sign(0, 1);
  DiscreteSignal f(g);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const int k = scale(rng);
    std::uniform_int_distribution<std::uint64_t> ti(0, (std::uint64_t{1} << (g.a - k)) - 1);
    std::uniform_int_distribution<std::uint64_t> wi(0, (std::uint64_t{1} << (g.b + k)) - 1);
    const Tile p = make_tile({k, ti(rng)}, {-k, wi(rng)});
    const double c = (sign(rng) ? 1.0 : -1.0) * coef(rng) / 4.0;
    const DiscreteSignal w = wave_packet(p, g);
    for (std::size_t x = 0; x < f.size(); ++x) f[x] += c * w[x];
  }
  return f;
}

DiscreteSignal random_indicator(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4), scale(-g.b, g.a);
  DiscreteSignal f(g);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const int k = scale(rng);
    std::uniform_int_distribution<std::uint64_t> ti(0, (std::uint64_t{1} << (g.a - k)) - 1);
    const std::uint64_t t = ti(rng);
    const std::size_t len = std::size_t{1} << (k + g.b);
    for (std::size_t c = t * len; c < (t + 1) * len; ++c) f[c] = 1.0;
  }
  return f;
}

DiscreteSignal random_full_packet(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> wi(0, g.size() - 1);
  return wave_packet(make_tile({g.a, 0}, {-g.a, wi(rng)}), g);
}

DiscreteSignal generate_signal(SignalKind kind, const GridSpec& g, std::mt19937_64& rng) {
  switch (kind) {
    case SignalKind::random_cells: return random_cell_signal(g, rng);
    case SignalKind::wave_packets: return random_packet_signal(g, rng);
    case SignalKind::indicator: return random_indicator(g, rng);
    case SignalKind::single_packet: return random_full_packet(g, rng);
    case SignalKind::zero: return DiscreteSignal(g);
  }
  throw Error("unknown signal kind");
}

StudyValue study_ratio(const ExperimentConfig& cfg, const DiscreteSignal& f) {
  StudyValue out;
  const double fn = lp_norm(f, cfg.p);
  if (fn == 0.0) {
    out.skipped = true;
    return out;
  }
  const FieldEngine eng(f);
  const std::size_t n = f.size();
  std::vector<double> val(n), up(n);
  std::vector<std::uint8_t> ok(n, 1);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t x = 0; x < n; ++x) {
    const InnerValue v = inner_norm(cfg, eng, f[x], x);
    val[x] = v.value;
    up[x] = v.upper;
    ok[x] = v.bracket_ok;
  }
  for (std::uint8_t o : ok)
    if (!o) throw Error("estimator returned lower > upper");
  out.ratio = lp_norm(val, cfg.p, f.grid.time_weight()) / fn;
  out.ratio_upper = lp_norm(up, cfg.p, f.grid.time_weight()) / fn;
  return out;
}

std::optional<double> single_packet_value(StudyKind kind) {
  // For phi_{[0,2^a) x w} the sum at x is 0 below w and phi(x) above it, and
  // |phi| is constant.
  switch (kind) {
    case StudyKind::carleson: return 1.0;
    case StudyKind::mainthm: return 2.0;
    default: return std::nullopt;
  }
}

json environment_fingerprint() {
  json env{{"library", kVersion}, {"cplusplus", static_cast<long>(__cplusplus)}};
#if defined(__VERSION__)
  env["compiler"] = __VERSION__;
#endif
#if defined(_OPENMP)
  env["openmp"] = _OPENMP;
#endif
  env["threads"] = kernels::max_threads();
  env["pointer_bits"] = static_cast<int>(8 * sizeof(void*));
  return env;
}

Certificate run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  kernels::configure_threads();
  Certificate c;
  c.config = cfg;
  c.environment = environment_fingerprint();
  if (cfg.require_verified && !verify::preflight()) {
    c.invariants_ok = false;
    c.invariant_notes.push_back("verify suites failed; no ratios computed");
    return c;
  }
  if (cfg.signal == SignalKind::single_packet) c.closed_form = single_packet_value(cfg.kind);
  for (int i = 0; i < cfg.trials; ++i) {
    TrialRecord t;
    t.trial = i;
    t.seed = trial_seed(cfg.seed, i);
    std::mt19937_64 rng(t.seed);
    const DiscreteSignal f = generate_signal(cfg.signal, cfg.grid, rng);
    StudyValue v;
    try {
      v = study_ratio(cfg, f);
    } catch (const Error& e) {
      c.invariants_ok = false;
      c.invariant_notes.push_back("trial " + std::to_string(i) + ": " + e.what());
      continue;
    }
    t.skipped = v.skipped;
    t.ratio = v.ratio;
    t.ratio_upper = v.ratio_upper;
    if (!t.skipped) {
      if (!std::isfinite(t.ratio) || !std::isfinite(t.ratio_upper)) {
        c.invariants_ok = false;
        c.invariant_notes.push_back("trial " + std::to_string(i) + ": non-finite ratio");
      }
      if (c.closed_form && std::abs(t.ratio - *c.closed_form) > 1e-9) {
        c.invariants_ok = false;
        c.invariant_notes.push_back("trial " + std::to_string(i) + ": single-packet value " +
                                    std::to_string(t.ratio) + " differs from " + std::to_string(*c.closed_form));
      }
      c.max_ratio = std::max(c.max_ratio, t.ratio);
      c.max_ratio_upper = std::max(c.max_ratio_upper, t.ratio_upper);
    }
    c.trials.push_back(t);
  }
  if (!cfg.output.empty()) io::write_json_file(cfg.output, to_json(c));
  return c;
}

bool revalidate(const Certificate& c, std::string* why) {
  for (const TrialRecord& t : c.trials) {
    if (t.seed != trial_seed(c.config.seed, t.trial)) {
      if (why) *why = "trial " + std::to_string(t.trial) + ": seed does not derive from the master seed";
      return false;
    }
    std::mt19937_64 rng(t.seed);
    const DiscreteSignal f = generate_signal(c.config.signal, c.config.grid, rng);
    const StudyValue v = study_ratio(c.config, f);
    if (v.skipped != t.skipped || (!v.skipped && (v.ratio != t.ratio || v.ratio_upper != t.ratio_upper))) {
      if (why) *why = "trial " + std::to_string(t.trial) + ": ratio does not reproduce";
      return false;
    }
  }
  return true;
}

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig s;
  s.base = config_from_json(j.contains("base") ? j.at("base") : json::object());
  if (j.contains("kinds"))
    for (const json& k : j.at("kinds")) s.kinds.push_back(study_kind_from_string(k.get<std::string>()));
  else
    s.kinds.push_back(s.base.kind);
  if (j.contains("bits")) s.bits = j.at("bits").get<std::vector<int>>();
  const auto list = [&](const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<std::vector<double>>() : std::vector<double>{fallback};
  };
  s.p = list("p", s.base.p);
  s.q = list("q", s.base.q);
  s.r = list("r", s.base.r);
  s.s = list("s", s.base.s);
  return s;
}

std::vector<SweepRow> sweep(const SweepConfig& cfg) {
  std::vector<SweepRow> rows;
  for (StudyKind kind : cfg.kinds) {
    const bool uses_r = kind == StudyKind::mainthm || kind == StudyKind::maxtrunc ||
                        kind == StudyKind::maxmodvartrunc;
    const bool uses_q = per_x_estimator(kind);
    const std::vector<double> rs = uses_r ? cfg.r : std::vector<double>{cfg.base.r};
    const std::vector<double> qs = uses_q ? cfg.q : std::vector<double>{cfg.base.q};
    const std::vector<double> ss = kind == StudyKind::mqs ? cfg.s : std::vector<double>{cfg.base.s};
    for (int bits : cfg.bits)
      for (double p : cfg.p)
        for (double r : rs)
          for (double q : qs)
            for (double s : ss) {
              ExperimentConfig e = cfg.base;
              e.kind = kind;
              e.grid = GridSpec(bits / 2, bits - bits / 2);
              e.p = p;
              e.q = q;
              e.r = r;
              e.s = s;
              e.output.clear();
              e.id = cfg.base.id + "/" + to_string(kind) + "/" + std::to_string(bits);
              SweepRow row{kind, e.grid, p, q, r, s, false, {}};
              auto why = e.hypothesis_violation();
              if (!why) why = e.resource_violation();
              if (why) {
                row.skipped = true;
                row.reason = *why;
              } else {
                const auto t0 = std::chrono::steady_clock::now();
                const Certificate c = run_experiment(e);
                row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                row.max_ratio = c.max_ratio;
                row.max_ratio_upper = c.max_ratio_upper;
                row.invariants_ok = c.invariants_ok;
              }
              rows.push_back(row);
            }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "kind,a,b,p,q,r,s,status,max_ratio,max_ratio_upper,invariants_ok,seconds,reason\n";
  os.precision(12);
  for (const SweepRow& r : rows) {
    os << to_string(r.kind) << ',' << r.grid.a << ',' << r.grid.b << ',' << format_exponent(r.p) << ','
       << format_exponent(r.q) << ',' << format_exponent(r.r) << ',' << format_exponent(r.s) << ','
       << (r.skipped ? "skipped" : "ok") << ',';
    if (r.skipped)
      os << ",,,";
    else
      os << r.max_ratio << ',' << r.max_ratio_upper << ',' << (r.invariants_ok ? 1 : 0) << ',' << r.seconds;
    os << ',' << r.reason << '\n';
  }
}

}  // namespace walshpp
