#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "walshpp/czdecomp.hpp"
#include "walshpp/harness.hpp"
#include "walshpp/io.hpp"
#include "walshpp/kernels.hpp"
#include "walshpp/multnorm.hpp"
#include "walshpp/partition.hpp"
#include "walshpp/trees.hpp"
#include "walshpp/varnorm.hpp"
#include "walshpp/verify.hpp"

using namespace walshpp;
using nlohmann::json;

namespace {

void emit(const json& j, const std::string& out) {
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    io::write_json_file(out, j);
}

BitileSet bitiles_or_all(const GridSpec& g, const std::string& path) {
  return path.empty() ? BitileSet::all(g) : io::bitile_set_from_json(g, io::read_json_file(path));
}

int cmd_verify(const std::string& suite, double scale, std::uint64_t seed) {
  verify::Options opt;
  opt.scale = scale;
  opt.seed = seed;
  std::vector<verify::SuiteResult> results;
  if (suite.empty() || suite == "all")
    results = verify::run_all(opt);
  else
    results.push_back(verify::run_suite(suite, opt));
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%-12s %s  checks=%zu failures=%zu  %.2fs%s%s\n", r.name.c_str(), r.ok() ? "PASS" : "FAIL", r.checked,
                r.failures, r.seconds, r.ok() ? "" : "  first: ", r.first_failure.c_str());
    ok = ok && r.ok();
  }
  return ok ? 0 : 1;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& revalidate_path) {
  if (!revalidate_path.empty()) {
    const Certificate c = certificate_from_json(io::read_json_file(revalidate_path));
    std::string why;
    const bool ok = revalidate(c, &why);
    std::cout << (ok ? "certificate reproduces" : "certificate does not reproduce: " + why) << '\n';
    return ok && c.invariants_ok ? 0 : 1;
  }
  ExperimentConfig cfg = config_from_json(io::read_json_file(config));
  if (!out.empty()) cfg.output = out;
  const Certificate c = run_experiment(cfg);
  if (cfg.output.empty()) std::cout << to_json(c).dump(2) << '\n';
  std::cerr << cfg.id << ": max ratio " << c.max_ratio << " (upper " << c.max_ratio_upper << "), invariants "
            << (c.invariants_ok ? "ok" : "FAILED") << '\n';
  return c.invariants_ok ? 0 : 1;
}

int cmd_sweep(const std::string& config, const std::string& csv) {
  const SweepConfig cfg = sweep_config_from_json(io::read_json_file(config));
  const std::vector<SweepRow> rows = sweep(cfg);
  bool ok = true;
  for (const SweepRow& r : rows) ok = ok && (r.skipped || (r.invariants_ok && std::isfinite(r.max_ratio)));
  if (csv.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream os(csv);
    if (!os) throw Error("cannot write " + csv);
    write_sweep_csv(os, rows);
  }
  return ok ? 0 : 1;
}

int cmd_transform(const std::string& in, const std::string& out) {
  const json j = io::read_json_file(in);
  if (j.value("domain", std::string("time")) == "frequency")
    emit(io::to_json(inverse_transform(io::spectrum_from_json(j))), out);
  else
    emit(io::to_json(walsh_transform(io::signal_from_json(j))), out);
  return 0;
}

int cmd_field(const std::string& in, const std::string& bitiles, const std::vector<int>& ks, int average,
              bool has_average, const std::string& out) {
  const DiscreteSignal f = io::signal_from_json(io::read_json_file(in));
  if (f.grid.bits() > 12) throw Error("field export is capped at 2^12 cells");
  const BitileSet P = bitiles_or_all(f.grid, bitiles);
  const TFField fld = has_average ? averaging_field(f, average)
                      : ks.empty() ? partial_sum_field(f, P)
                                   : truncated_field(f, P, ks);
  if (out.empty()) {
    io::write_field_csv(std::cout, fld);
  } else {
    std::ofstream os(out);
    if (!os) throw Error("cannot write " + out);
    io::write_field_csv(os, fld);
  }
  return 0;
}

int cmd_decompose(const std::string& in, const std::string& bitiles, int level, const std::string& out) {
  const DiscreteSignal f = io::signal_from_json(io::read_json_file(in));
  const BitileSet P = bitiles_or_all(f.grid, bitiles);
  const Selection sel = select_trees(P, f, level);
  const ConditionReport sc = check_selection(P, f, level, sel);
  const SortedForest forest = proper_sort(sel.trees);
  const ConditionReport fc = check_sorted_forest(forest, sel.trees);
  json j = io::to_json(forest);
  j["grid"] = io::to_json(f.grid);
  j["remainder"] = io::to_json(sel.remainder);
  j["counting"] = {{"l1_mass", sel.counting.l1_mass},
                   {"bmo", sel.counting.bmo},
                   {"l1_ratio", sel.counting.l1_ratio},
                   {"bmo_ratio", sel.counting.bmo_ratio}};
  j["conditions"] = {{"selection", io::to_json(sc)}, {"sorting", io::to_json(fc)}};
  emit(j, out);
  return sc.ok && fc.ok ? 0 : 1;
}

int cmd_partition(const std::string& forest_path, std::uint64_t x, const std::string& which, const std::string& out) {
  const SortedForest forest = io::forest_from_json(io::read_json_file(forest_path));
  const bool use_u = which == "u" || (which.empty() && forest.l_trees.empty());
  const std::vector<Tree>& trees = use_u ? forest.u_trees : forest.l_trees;
  if (trees.empty()) throw Error("forest has no trees of the requested kind");
  const FreqPartition part = use_u ? partition_u(x, trees) : partition_l(x, trees);
  const ConditionReport cert = check_partition(part, trees);
  json j = io::to_json(part);
  j["case"] = use_u ? "u" : "l";
  j["x"] = x;
  j["certificate"] = io::to_json(cert);
  emit(j, out);
  return cert.ok ? 0 : 1;
}

int cmd_varnorm(const std::string& in, double r, int levels, const std::string& out) {
  const json j = io::read_json_file(in);
  json res{{"r", r}};
  bool ok = true;
  if (j.contains("breakpoints")) {
    const StepFunction m = io::step_function_from_json(j);
    res["norm"] = variation_norm_step(m, r);
    if (levels >= 0) {
      const StepDecomposition d = interval_decomposition(m, r, levels);
      const DecompositionCheck c = check_decomposition(m, d);
      res["decomposition"] = io::to_json(d);
      res["check"] = io::to_json(c);
      ok = c.ok();
    }
  } else {
    const json& seq = j.at("sequence");
    if (!seq.empty() && seq.front().is_array()) {
      const std::vector<Point> c = seq.get<std::vector<Point>>();
      res["norm"] = variation_norm(c, r);
      if (c.size() >= 2) {
        const ParentMap pm = parent_map(c, default_lambda0(c));
        const ParentMapCheck chk = check_parent_map(c, pm);
        res["parent_map"] = {{"lambda0", pm.lambda0}, {"rho", pm.rho}, {"ok", chk.ok()}};
        ok = chk.ok();
      }
      if (j.contains("lambda")) res["jump_cover"] = jump_cover(c, j.at("lambda").get<double>()).indices;
    } else {
      const std::vector<double> c = seq.get<std::vector<double>>();
      res["norm"] = variation_norm(c, r);
      if (j.contains("lambda")) res["jump_cover"] = jump_cover(c, j.at("lambda").get<double>()).indices;
    }
  }
  emit(res, out);
  return ok ? 0 : 1;
}

int cmd_norm(const std::string& in, double q, double s, bool has_s, const EstimateBudget& budget,
             const std::string& out) {
  const json j = io::read_json_file(in);
  const GridSpec g = io::grid_from_json(j.at("grid"));
  NormEstimate e;
  double reproduced = 0.0;
  if (j.contains("family")) {
    const std::vector<Multiplier> ms = j.at("family").get<std::vector<Multiplier>>();
    if (has_s) {
      e = mqs_norm_estimate(g, ms, q, s, budget);
      reproduced = mqs_ratio(ms, e.witness, q, s);
    } else {
      e = mqstar_norm_estimate(g, ms, q, budget);
      reproduced = mqstar_ratio(ms, e.witness, q);
    }
  } else {
    const Multiplier m = j.at("values").get<Multiplier>();
    e = mq_norm_estimate(g, m, q, budget);
    reproduced = mq_ratio(m, e.witness, q);
  }
  json res = io::to_json(e);
  res["q"] = q;
  if (has_s) res["s"] = s;
  const bool ok = e.lower <= e.upper && std::abs(reproduced - e.lower) <= 1e-9 * std::max(1.0, e.lower);
  res["witness_reproduces"] = ok;
  emit(res, out);
  return ok ? 0 : 1;
}

int cmd_cz(const std::string& in, const std::string& out) {
  const json j = io::read_json_file(in);
  const DiscreteSignal g = io::signal_from_json(j.at("signal"));
  std::vector<DyadicRational> xi;
  if (j.contains("xi"))
    for (const json& x : j.at("xi")) xi.push_back(io::dyadic_from_json(x));
  const std::vector<FreqInterval> ups = io::upsilon_from_json(j.value("upsilon", json()));
  MultiplierFamily fam{g.grid, xi, {}, 1.0, -g.grid.a, g.grid.b};
  const double r = j.value("r", 3.0);
  const double B = j.contains("B") ? j.at("B").get<double>() : std::max(1.0, cz_constant(fam, ups, r));
  const CZResult res = cz_decompose(g, j.at("lambda").get<double>(), xi, ups, B);
  const CZReport rep = verify_bad_function(res, g, ups, fam);
  emit({{"decomposition", io::to_json(res)}, {"report", io::to_json(rep)}}, out);
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  kernels::configure_threads();
  CLI::App app{"Walsh-model time-frequency toolkit"};
  app.require_subcommand(1);

  std::string in, out, config, bitiles, suite, csv, revalidate_path, which;
  double scale = 1.0, q = 2.0, s = 3.0, r = 3.0;
  std::uint64_t seed = 1, x = 0;
  int level = 0, levels = -1, average = 0;
  std::vector<int> ks;
  EstimateBudget budget;

  auto* v = app.add_subcommand("verify", "run the exact-identity suites");
  v->add_option("suite", suite, "suite name or 'all'");
  v->add_option("--scale", scale, "instance count multiplier");
  v->add_option("--seed", seed);

  auto* run = app.add_subcommand("run", "run one ratio study");
  run->add_option("--config", config, "experiment JSON");
  run->add_option("--out", out, "certificate path");
  run->add_option("--revalidate", revalidate_path, "re-evaluate a stored certificate");

  auto* sw = app.add_subcommand("sweep", "grid and exponent sweep");
  sw->add_option("--config", config, "sweep JSON")->required();
  sw->add_option("--csv", csv, "output CSV");

  auto* tr = app.add_subcommand("transform", "Walsh transform of a signal JSON");
  tr->add_option("--in", in)->required();
  tr->add_option("--out", out);

  auto* fd = app.add_subcommand("field", "export a bitile-sum field as CSV");
  fd->add_option("--in", in)->required();
  fd->add_option("--bitiles", bitiles, "bitile list JSON (default: all)");
  fd->add_option("--truncate", ks, "truncation scales k");
  auto* avg = fd->add_option("--average", average, "averaging field at scale k");
  fd->add_option("--out", out);

  auto* dc = app.add_subcommand("decompose", "tree selection and proper sorting");
  dc->add_option("--in", in)->required();
  dc->add_option("--bitiles", bitiles);
  dc->add_option("--level", level, "selection level 2^-k")->required();
  dc->add_option("--out", out);

  auto* pt = app.add_subcommand("partition", "frequency partition for a stack");
  pt->add_option("--forest", in)->required();
  pt->add_option("--x", x, "time cell")->required();
  pt->add_option("--case", which, "u or l")->check(CLI::IsMember({"u", "l"}));
  pt->add_option("--out", out);

  auto* vn = app.add_subcommand("varnorm", "variation norms and decompositions");
  vn->add_option("--in", in)->required();
  vn->add_option("--r", r);
  vn->add_option("--decompose", levels, "interval decomposition through level J");
  vn->add_option("--out", out);

  auto* nm = app.add_subcommand("norm", "two-sided multiplier norm estimate");
  nm->add_option("--in", in)->required();
  nm->add_option("--q", q);
  auto* sopt = nm->add_option("--s", s, "variation exponent (family input)");
  nm->add_option("--budget", budget.starts, "random starts");
  nm->add_option("--iterations", budget.iterations);
  nm->add_option("--seed", budget.seed);
  nm->add_option("--out", out);

  auto* cz = app.add_subcommand("cz", "multiple-frequency Calderon-Zygmund decomposition");
  cz->add_option("--in", in)->required();
  cz->add_option("--out", out);

  CLI11_PARSE(app, argc, argv);
  try {
    if (v->parsed()) return cmd_verify(suite, scale, seed);
    if (run->parsed()) {
      if (config.empty() && revalidate_path.empty()) throw Error("run needs --config or --revalidate");
      return cmd_run(config, out, revalidate_path);
    }
    if (sw->parsed()) return cmd_sweep(config, csv);
    if (tr->parsed()) return cmd_transform(in, out);
    if (fd->parsed()) return cmd_field(in, bitiles, ks, average, avg->count() > 0, out);
    if (dc->parsed()) return cmd_decompose(in, bitiles, level, out);
    if (pt->parsed()) return cmd_partition(in, x, which, out);
    if (vn->parsed()) return cmd_varnorm(in, r, levels, out);
    if (nm->parsed()) return cmd_norm(in, q, s, sopt->count() > 0, budget, out);
    if (cz->parsed()) return cmd_cz(in, out);
  } catch (const std::exception& e) {
    std::cerr << "walshpp: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
