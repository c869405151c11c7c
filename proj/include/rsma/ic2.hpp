#pragma once

#include "rsma/channel.hpp"

namespace rsma {

enum class IcRegimeTag { VeryWeak, Weak, Strong, VeryStrong };

struct IcRegime {
  IcRegimeTag tag;
  double weak_threshold;         // |h_d|^2
  double very_strong_threshold;  // |h_d|^2 (1 + P |h_d|^2)
};

// Fraction of the per-transmitter power on the common stream.
struct IcSplit {
  double t = 0.0;
};

struct IcCommonBounds {
  double b1;     // direct-link bound
  double b2;    // cross-link bound
  double b_sum;  // sum bound divided by two (effective per-stream bound)

  double min() const { return std::min({b1, b2, b_sum}); }
};

struct IcBaselines {
  double orthogonal;
  double tin;
  double decode;
};

// Very-weak classification threshold on |h_c|^2 / |h_d|^2.
inline constexpr double kVeryWeakRatio = 1e-3;

IcCommonBounds common_rate_bounds(const IcChannel& ch, const IcSplit& split);
double private_rate(const IcChannel& ch, const IcSplit& split);
double rs_symmetric_rate(const IcChannel& ch, const IcSplit& split);
IcRegime classify_regime(const IcChannel& ch, double very_weak_ratio = kVeryWeakRatio);
IcBaselines baseline_rates(const IcChannel& ch);

struct IcOptimum {
  double t_star;
  double rate;
};

// Grid search over t plus golden-section refinement in the winning cell.
// Endpoints t = 0 and t = 1 are returned exactly when they win.
IcOptimum optimize_t(const IcChannel& ch, int grid_points = 1001);

const char* regime_name(IcRegimeTag tag);

}  // namespace rsma
