#include "rsma/ic2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsma {

IcCommonBounds common_rate_bounds(const IcChannel& ch, const IcSplit& split) {
  double t = split.t;
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("IcSplit: t out of [0,1]");
  double p = ch.power;
  double hd2 = ch.hd2();
  double hc2 = ch.hc2();
  double interference = (1.0 - t) * p * (hd2 + hc2);
  IcCommonBounds b;
  b.b1 = std::log2(1.0 + t * p * hd2 / (1.0 + interference));
  b.b2 = std::log2(1.0 + t * p * hc2 / (1.0 + interference));
  b.b_sum = 0.5 * std::log2(1.0 + t * p * (hd2 + hc2) / (1.0 + interference));
  return b;
}

double private_rate(const IcChannel& ch, const IcSplit& split) {
  double t = split.t;
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("IcSplit: t out of [0,1]");
  double pp = (1.0 - t) * ch.power;
  return std::log2(1.0 + pp * ch.hd2() / (1.0 + pp * ch.hc2()));
}

double rs_symmetric_rate(const IcChannel& ch, const IcSplit& split) {
  return private_rate(ch, split) + common_rate_bounds(ch, split).min();
}

IcRegime classify_regime(const IcChannel& ch, double very_weak_ratio) {
  double hd2 = ch.hd2();
  double hc2 = ch.hc2();
  if (hd2 == 0.0) throw std::invalid_argument("classify_regime: degenerate channel h_d = 0");
  if (!(ch.power > 0.0)) throw std::invalid_argument("classify_regime: power must be > 0");
  IcRegime r;
  r.weak_threshold = hd2;
  r.very_strong_threshold = hd2 * (1.0 + ch.power * hd2);
  // Boundary tie-break: equality goes to the stronger regime.
  if (hc2 >= r.very_strong_threshold) {
    r.tag = IcRegimeTag::VeryStrong;
  } else if (hc2 >= hd2) {
    r.tag = IcRegimeTag::Strong;
  } else if (hc2 <= very_weak_ratio * hd2) {
    r.tag = IcRegimeTag::VeryWeak;
  } else {
    r.tag = IcRegimeTag::Weak;
  }
  return r;
}

IcBaselines baseline_rates(const IcChannel& ch) {
  IcBaselines b;
  // Each transmitter gets half the resource at its transmit power; the
  // rate-splitting curve then upper-bounds this baseline at every
  // interference level (a boosted-power convention would not be dominated
  // in the weak regime).
  b.orthogonal = 0.5 * std::log2(1.0 + ch.power * ch.hd2());
  b.tin = rs_symmetric_rate(ch, IcSplit{0.0});
  b.decode = rs_symmetric_rate(ch, IcSplit{1.0});
  return b;
}

IcOptimum optimize_t(const IcChannel& ch, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("optimize_t: grid_points must be >= 2");
  auto rate_at = [&](double t) { return rs_symmetric_rate(ch, IcSplit{t}); };

  int best_i = 0;
  double best_rate = -1.0;
  for (int i = 0; i < grid_points; ++i) {
    double t = static_cast<double>(i) / (grid_points - 1);
    double r = rate_at(t);
    if (r > best_rate) {
      best_rate = r;
      best_i = i;
    }
  }
  double dt = 1.0 / (grid_points - 1);
  double lo = std::max(0.0, (best_i - 1) * dt);
  double hi = std::min(1.0, (best_i + 1) * dt);

  // Golden-section refinement to 1e-6 absolute in t.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = rate_at(c), fd = rate_at(d);
  while (b - a > 1e-6) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = rate_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = rate_at(d);
    }
  }
  double t_star = 0.5 * (a + b);
  double r_star = rate_at(t_star);

  // Prefer the exact endpoints when they are at least as good; the closed-form
  // regimes (t = 0 very weak, t = 1 strong) are then returned exactly.
  for (double t : {0.0, 1.0}) {
    double r = rate_at(t);
    if (r >= r_star) {
      r_star = r;
      t_star = t;
    }
  }
  return {t_star, r_star};
}

const char* regime_name(IcRegimeTag tag) {
  switch (tag) {
    case IcRegimeTag::VeryWeak: return "very_weak";
    case IcRegimeTag::Weak: return "weak";
    case IcRegimeTag::Strong: return "strong";
    case IcRegimeTag::VeryStrong: return "very_strong";
  }
  return "unknown";
}

}  // namespace rsma
