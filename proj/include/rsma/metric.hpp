#pragma once

#include <vector>

namespace rsma {

// Objective specification: WSR weights, MMF, or EE constants, with optional
// per-user QoS rate thresholds.
struct Metric {
  enum class Kind { WSR, MMF, EE };

  Kind kind = Kind::WSR;
  std::vector<double> weights;        // WSR only; nonnegative, not all zero
  double eta = 0.35;                  // power amplifier efficiency, in (0,1]
  double p_dyn_w = 0.0;               // dynamic circuit power per antenna [W]
  double p_sta_w = 0.0;               // static circuit power [W]
  std::vector<double> qos;            // per-user rate thresholds; empty = none

  static Metric wsr(std::vector<double> w) {
    Metric m;
    m.kind = Kind::WSR;
    m.weights = std::move(w);
    return m;
  }
  static Metric wsr_unit(int users) {
    return wsr(std::vector<double>(users, 1.0));
  }
  static Metric mmf() {
    Metric m;
    m.kind = Kind::MMF;
    return m;
  }
  static Metric ee(double eta, double p_dyn_w, double p_sta_w) {
    Metric m;
    m.kind = Kind::EE;
    m.eta = eta;
    m.p_dyn_w = p_dyn_w;
    m.p_sta_w = p_sta_w;
    return m;
  }

  double weight(int user) const {
    if (kind == Kind::WSR && user < static_cast<int>(weights.size())) {
      return weights[user];
    }
    return 1.0;
  }
};

}  // namespace rsma
