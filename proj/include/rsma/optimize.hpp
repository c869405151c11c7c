#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/layout.hpp"
#include "rsma/metric.hpp"
#include "rsma/schemes.hpp"

namespace rsma {

struct OptimizerConfig {
  enum class Tier { Grid, GridRefine };

  Tier tier = Tier::GridRefine;
  int grid_points = 101;  // per power axis
  int iters = 300;
  double tol = 1e-9;
  double soft_min_temp0 = 1.0;
  double soft_min_temp_min = 1e-3;
  double penalty0 = 10.0;
  std::uint64_t seed = 0;
};

struct OptResult {
  PrecoderSet precoders;
  RateReport report;       // evaluated on the true channels
  double objective = 0.0;  // metric of `report`
  bool feasible = true;
  std::vector<double> trace;  // best-so-far objective per refinement iteration
};

// WSR / MMF / EE value of a report; -inf when a QoS threshold is violated.
double evaluate_metric(const RateReport& report, const PrecoderSet& pre,
                       const Metric& metric);

bool qos_feasible(const RateReport& report, const Metric& metric,
                  double tol = 1e-6);

// Verifiable tier: MMSE-style private directions and a dominant-singular-
// vector common direction from the channel estimates, exhaustive grid over
// the scalar power fractions. MISO layouts with unit stream dims only.
OptResult optimize_powers_fixed_directions(const ChannelSet& ch,
                                           const StreamLayout& layout,
                                           const Metric& metric, double power,
                                           int grid_points = 101);

// Performance tier: projected-gradient ascent on all precoder entries over a
// temperature-annealed soft-min surrogate, QoS via quadratic penalty,
// projection onto the power ball. Never returns worse than `init`.
OptResult optimize_precoders_refine(const ChannelSet& ch,
                                    const StreamLayout& layout,
                                    const Metric& metric,
                                    const PrecoderSet& init, int iters,
                                    double tol,
                                    const OptimizerConfig& cfg = {});

// Grid tier plus optional refinement and, for 1-layer RS with K = 2,
// multi-start from embedded SDMA/NOMA solutions.
OptResult optimize_scheme(const ChannelSet& ch, SchemeKind kind,
                          const LayoutOptions& options, const Metric& metric,
                          double power, const OptimizerConfig& cfg);

// Smooth surrogate used by the refinement tier, exposed for the
// finite-difference gradient verification. Gradients are Wirtinger
// derivatives d f / d conj(p); the real-coordinate gradient is
// (2 Re g, 2 Im g).
double surrogate_objective(const ChannelSet& ch, const StreamLayout& layout,
                           const std::vector<CVec>& precoders,
                           const Metric& metric, double temperature,
                           double penalty_weight);
std::vector<CVec> surrogate_gradient(const ChannelSet& ch,
                                     const StreamLayout& layout,
                                     const std::vector<CVec>& precoders,
                                     const Metric& metric, double temperature,
                                     double penalty_weight);

struct DownlinkScenario {
  int tx = 4;
  std::vector<double> variances;  // per user; rx antennas are all 1
  double power = 100.0;           // noise-normalized budget
  bool imperfect_csit = false;
  double alpha_exponent = -0.6;
  SchemeKind kind = SchemeKind::OneLayerRS;
  LayoutOptions layout_options;
  Metric metric;
  OptimizerConfig opt;
};

struct ErgodicReport {
  std::vector<double> mean_user_total;
  std::vector<double> stderr_user_total;
  double mean_objective = 0.0;
  double stderr_objective = 0.0;
  int samples = 0;
};

// Per sample: draw a channel, apply the CSIT error model, design precoders on
// the estimates, evaluate on the true channels, average.
ErgodicReport ergodic_average(const DownlinkScenario& scenario, int samples,
                              std::uint64_t base_seed);

// K = 2 weight sweep: log-spaced u1/u2 ratios, Pareto-filtered frontier of
// (R1, R2) ergodic means.
std::vector<std::pair<double, double>> rate_region_boundary(
    const DownlinkScenario& scenario, int n_points, int samples,
    std::uint64_t base_seed);

}  // namespace rsma
