#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "walshpp/signal.hpp"
#include "walshpp/varnorm.hpp"

namespace walshpp {

/// Multiplier values on the frequency cells of a grid.
using Multiplier = std::vector<double>;

/// Xi with coefficients a_w; D_k sums a_w 1_w over |w| = 2^k meeting Xi.
/// Intervals missing from `coeffs` get `default_coeff`.
struct MultiplierFamily {
  GridSpec grid;
  std::vector<DyadicRational> xi;
  std::map<DyadicInterval, double> coeffs;
  double default_coeff = 0.0;
  int k_min = 0;
  int k_max = 0;

  double coeff(const DyadicInterval& w) const;
};

/// (m g^)^check.
DiscreteSignal apply_multiplier(std::span<const double> m, const DiscreteSignal& g);

Multiplier dk_multiplier(const MultiplierFamily& fam, int k);
std::vector<Multiplier> dk_family(const MultiplierFamily& fam);

Multiplier from_step_function(const GridSpec& g, const StepFunction& m);
StepFunction to_step_function(const GridSpec& g, std::span<const double> m);

/// The M^2 norm, sup |m|.
double m2_norm(std::span<const double> m);
/// Largest singular value of g -> (m g^)^check by power iteration.
double m2_power_iteration(const GridSpec& g, std::span<const double> m, int iterations,
                          std::uint64_t seed);

struct EstimateBudget {
  int starts = 8;
  int iterations = 200;
  std::uint64_t seed = 1;
  bool member_witnesses = true;  // seed the family estimates with per-member optima
};

struct NormEstimate {
  double lower = 0.0;
  double upper = 0.0;
  DiscreteSignal witness;
  std::vector<std::string> methods;
};

/// ||(m g^)^check||_q / ||g||_q for one g.
double mq_ratio(std::span<const double> m, const DiscreteSignal& g, double q);
/// ||sup_k |(m_k g^)^check|||_q / ||g||_q.
double mqstar_ratio(std::span<const Multiplier> ms, const DiscreteSignal& g, double q);
/// ||V^s_k (m_k g^)^check||_q / ||g||_q.
double mqs_ratio(std::span<const Multiplier> ms, const DiscreteSignal& g, double q, double s);

/// Convolution-kernel bounds at q = 1, 2, inf, interpolated in between.
double mq_upper_bound(const GridSpec& g, std::span<const double> m, double q);
double mqstar_upper_bound(const GridSpec& g, std::span<const Multiplier> ms, double q);
double mqs_upper_bound(const GridSpec& g, std::span<const Multiplier> ms, double q, double s);

NormEstimate mq_norm_estimate(const GridSpec& g, std::span<const double> m, double q,
                              const EstimateBudget& budget = {});
NormEstimate mqstar_norm_estimate(const GridSpec& g, std::span<const Multiplier> ms, double q,
                                  const EstimateBudget& budget = {});
NormEstimate mqs_norm_estimate(const GridSpec& g, std::span<const Multiplier> ms, double q, double s,
                               const EstimateBudget& budget = {});

}  // namespace walshpp
