#include "walshpp/io.hpp"

#include <fstream>
#include <ostream>

namespace walshpp::io {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("missing JSON field '") + key + "'");
  return j.at(key);
}

std::vector<double> doubles(const json& j) {
  if (!j.is_array()) throw Error("expected a JSON array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

json to_json(const GridSpec& g) { return {{"a", g.a}, {"b", g.b}}; }

GridSpec grid_from_json(const json& j) { return {field(j, "a").get<int>(), field(j, "b").get<int>()}; }

json to_json(const DyadicRational& x) { return x.to_double(); }

DyadicRational dyadic_from_json(const json& j) {
  if (!j.is_number()) throw Error("expected a dyadic number");
  return DyadicRational::from_double(j.get<double>());
}

json to_json(const DyadicInterval& I) { return {{"k", I.scale}, {"n", I.index}}; }

DyadicInterval interval_from_json(const json& j) {
  return {field(j, "k").get<int>(), field(j, "n").get<std::uint64_t>()};
}

json to_json(const Bitile& p) { return {{"I", to_json(p.time)}, {"w", to_json(p.freq)}}; }

Bitile bitile_from_json(const json& j) {
  return make_bitile(interval_from_json(field(j, "I")), interval_from_json(field(j, "w")));
}

json to_json(const BitileSet& s) {
  json out = json::array();
  for (const Bitile& p : s.members()) out.push_back(to_json(p));
  return out;
}

BitileSet bitile_set_from_json(const GridSpec& g, const json& j) {
  if (!j.is_array()) throw Error("expected a list of bitiles");
  BitileSet s(g);
  for (const json& e : j) {
    const Bitile p = bitile_from_json(e);
    if (!fits(p, g)) throw Error("bitile " + to_string(p) + " does not fit the grid");
    s.insert(p);
  }
  return s;
}

json to_json(const DiscreteSignal& f) { return {{"grid", to_json(f.grid)}, {"values", f.values}}; }

DiscreteSignal signal_from_json(const json& j) {
  return {grid_from_json(field(j, "grid")), doubles(field(j, "values"))};
}

json to_json(const SpectralSignal& F) {
  return {{"grid", to_json(F.grid)}, {"domain", "frequency"}, {"values", F.values}};
}

SpectralSignal spectrum_from_json(const json& j) {
  return {grid_from_json(field(j, "grid")), doubles(field(j, "values"))};
}

json to_json(const Tree& t) {
  return {{"top", {{"xi", to_json(t.top_freq)}, {"I", to_json(t.top_interval)}}},
          {"members", to_json(t.members)}};
}

Tree tree_from_json(const GridSpec& g, const json& j) {
  const json& top = field(j, "top");
  Tree t{bitile_set_from_json(g, field(j, "members")), dyadic_from_json(field(top, "xi")),
         interval_from_json(field(top, "I"))};
  if (!has_tree_shape(t.members, t.top_freq, t.top_interval))
    throw Error("members do not share the stated top data");
  return t;
}

json to_json(const SortedForest& f) {
  json u = json::array(), l = json::array();
  for (const Tree& t : f.u_trees) u.push_back(to_json(t));
  for (const Tree& t : f.l_trees) l.push_back(to_json(t));
  json out{{"u_trees", u}, {"l_trees", l}};
  if (!f.u_trees.empty()) out["grid"] = to_json(f.u_trees.front().grid());
  else if (!f.l_trees.empty()) out["grid"] = to_json(f.l_trees.front().grid());
  return out;
}

SortedForest forest_from_json(const json& j) {
  const GridSpec g = grid_from_json(field(j, "grid"));
  SortedForest f;
  if (j.contains("u_trees"))
    for (const json& t : j.at("u_trees")) f.u_trees.push_back(tree_from_json(g, t));
  if (j.contains("l_trees"))
    for (const json& t : j.at("l_trees")) f.l_trees.push_back(tree_from_json(g, t));
  return f;
}

json to_json(const FreqPartition& p) {
  json pieces = json::array();
  for (const FreqPiece& q : p.pieces) {
    pieces.push_back({{"tree", q.tree},
                      {"lo", to_json(p.grid.freq_point(q.lo))},
                      {"hi", to_json(p.grid.freq_point(q.hi))},
                      {"cells", {q.lo, q.hi}}});
  }
  return {{"grid", to_json(p.grid)}, {"pieces", pieces}};
}

json to_json(const ConditionReport& r) {
  json out{{"ok", r.ok}};
  if (!r.ok) {
    out["condition"] = r.condition;
    out["witness"] = r.witness;
  }
  return out;
}

json to_json(const StepFunction& m) {
  json bp = json::array();
  for (const DyadicRational& x : m.breakpoints) bp.push_back(to_json(x));
  return {{"breakpoints", bp}, {"values", m.values}};
}

StepFunction step_function_from_json(const json& j) {
  StepFunction m;
  for (const json& x : field(j, "breakpoints")) m.breakpoints.push_back(dyadic_from_json(x));
  m.values = doubles(field(j, "values"));
  m.validate();
  return m;
}

json to_json(const StepDecomposition& d) {
  json levels = json::array();
  for (const DecompLevel& lv : d.levels) {
    json pieces = json::array();
    for (const DecompLevel::Piece& p : lv.pieces)
      pieces.push_back({{"l", p.l}, {"lo", to_json(p.lo)}, {"hi", to_json(p.hi)}, {"tilde_b", p.tilde_b},
                        {"b", p.b}});
    levels.push_back({{"j", lv.j}, {"pieces", pieces}});
  }
  return {{"norm", d.norm},
          {"r", d.r},
          {"value", d.value == LevelValue::mean ? "mean" : "midrange"},
          {"cumulative", d.cumulative},
          {"levels", levels}};
}

json to_json(const DecompositionCheck& c) {
  return {{"ok", c.ok()},
          {"count_ok", c.count_ok},
          {"coefficient_ok", c.coefficient_ok},
          {"disjoint_ok", c.disjoint_ok},
          {"tail_ok", c.tail_ok},
          {"worst_coefficient_ratio", c.worst_coefficient_ratio},
          {"worst_tail_ratio", c.worst_tail_ratio}};
}

json to_json(const NormEstimate& e) {
  return {{"lower", e.lower}, {"upper", e.upper}, {"methods", e.methods}, {"witness", to_json(e.witness)}};
}

NormEstimate norm_estimate_from_json(const json& j) {
  NormEstimate e;
  e.lower = field(j, "lower").get<double>();
  e.upper = field(j, "upper").get<double>();
  if (j.contains("methods")) e.methods = j.at("methods").get<std::vector<std::string>>();
  e.witness = signal_from_json(field(j, "witness"));
  return e;
}

std::vector<FreqInterval> upsilon_from_json(const json& j) {
  std::vector<FreqInterval> out;
  if (j.is_null()) return out;
  for (const json& u : j) {
    FreqInterval v{dyadic_from_json(field(u, "lo")), dyadic_from_json(field(u, "hi"))};
    if (u.contains("b")) v.b = u.at("b").get<double>();
    out.push_back(v);
  }
  return out;
}

json to_json(const CZResult& r) {
  json intervals = json::array();
  for (const DyadicInterval& I : r.intervals) intervals.push_back(to_json(I));
  json lambda = json::array();
  for (const DyadicRational& x : r.Lambda) lambda.push_back(to_json(x));
  return {{"grid", to_json(r.grid)},   {"lambda", r.lambda},       {"n", r.n},
          {"B", r.B},                  {"threshold", r.threshold}, {"degenerate", r.degenerate},
          {"intervals", intervals},    {"Lambda", lambda},         {"good", r.good.values},
          {"bad", r.bad.values}};
}

json to_json(const CZReport& r) {
  json out{{"ok", r.ok()},
           {"sum_exact", r.sum_exact},
           {"bad_support", r.bad_support},
           {"bad_cancellation", r.bad_cancellation},
           {"h_support", r.h_support},
           {"h_cancellation", r.h_cancellation},
           {"dk_support", r.dk_support},
           {"coefficient_bound", r.coefficient_bound},
           {"measure_bound", r.measure_bound},
           {"good_bound", r.good_bound},
           {"max_residual", r.max_residual}};
  if (!r.witness.empty()) out["witness"] = r.witness;
  return out;
}

void write_field_csv(std::ostream& os, const TFField& f) {
  const GridSpec& g = f.grid;
  os << "x,xi,k,value\n";
  os.precision(17);
  for (std::size_t s = 0; s < f.slots(); ++s) {
    const std::string k = f.scales.empty() ? "" : std::to_string(f.scales[s]);
    for (std::size_t x = 0; x < g.size(); ++x)
      for (std::size_t xi = 0; xi < g.size(); ++xi)
        os << g.time_point(x).to_double() << ',' << g.freq_point(xi).to_double() << ',' << k << ','
           << f.at(x, xi, s) << '\n';
  }
}

}  // namespace walshpp::io
