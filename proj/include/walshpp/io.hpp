#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "walshpp/czdecomp.hpp"
#include "walshpp/multnorm.hpp"
#include "walshpp/partition.hpp"
#include "walshpp/trees.hpp"
#include "walshpp/varnorm.hpp"

namespace walshpp::io {

using nlohmann::json;

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

json to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j);

// Dyadic numbers travel as JSON numbers; parsing rejects negative and non-finite values.
json to_json(const DyadicRational& x);
DyadicRational dyadic_from_json(const json& j);

json to_json(const DyadicInterval& I);  // {k, n}
DyadicInterval interval_from_json(const json& j);

json to_json(const Bitile& p);  // {I:{k,n}, w:{k,n}}
Bitile bitile_from_json(const json& j);
json to_json(const BitileSet& s);
BitileSet bitile_set_from_json(const GridSpec& g, const json& j);

json to_json(const DiscreteSignal& f);  // {grid:{a,b}, values:[...]}
DiscreteSignal signal_from_json(const json& j);
json to_json(const SpectralSignal& F);
SpectralSignal spectrum_from_json(const json& j);

json to_json(const Tree& t);
Tree tree_from_json(const GridSpec& g, const json& j);
/// {grid, u_trees:[...], l_trees:[...]}
json to_json(const SortedForest& f);
SortedForest forest_from_json(const json& j);

json to_json(const FreqPartition& p);
json to_json(const ConditionReport& r);

json to_json(const StepFunction& m);  // {breakpoints:[...], values:[...]}
StepFunction step_function_from_json(const json& j);
json to_json(const StepDecomposition& d);
json to_json(const DecompositionCheck& c);

json to_json(const NormEstimate& e);
NormEstimate norm_estimate_from_json(const json& j);

std::vector<FreqInterval> upsilon_from_json(const json& j);
json to_json(const CZResult& r);
json to_json(const CZReport& r);

/// Rows x,xi,k,value with cell left endpoints; k is empty for untruncated fields.
void write_field_csv(std::ostream& os, const TFField& f);

}  // namespace walshpp::io
