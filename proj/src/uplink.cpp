#include "rsma/uplink.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsma {

namespace {

void validate(const ChannelSet& ch, const UplinkConfig& cfg) {
  const int users = ch.num_users();
  if (static_cast<int>(cfg.precoders.size()) != users ||
      static_cast<int>(cfg.power_budgets.size()) != users) {
    throw std::invalid_argument("uplink: per-user config size mismatch");
  }
  std::size_t total_streams = 0;
  for (int k = 0; k < users; ++k) {
    const auto& parts = cfg.precoders[k];
    if (parts.empty() || parts.size() > 2) {
      throw std::invalid_argument("uplink: each user carries one or two streams");
    }
    double power = 0.0;
    for (const auto& p : parts) {
      if (p.rows() != ch.users[k].rx_antennas) {
        throw std::invalid_argument("uplink: precoder rows must match user antennas");
      }
      power += p.squaredNorm();
    }
    if (power > cfg.power_budgets[k] + 1e-9) {
      throw std::invalid_argument("uplink: power budget exceeded");
    }
    total_streams += parts.size();
  }
  if (cfg.decoding_order.size() != total_streams) {
    throw std::invalid_argument("uplink: decoding order must cover all streams");
  }
  std::vector<UplinkStreamRef> seen;
  for (const auto& ref : cfg.decoding_order) {
    if (ref.user < 0 || ref.user >= users || ref.part < 0 ||
        ref.part >= static_cast<int>(cfg.precoders[ref.user].size())) {
      throw std::invalid_argument("uplink: decoding order references unknown stream");
    }
    if (std::find(seen.begin(), seen.end(), ref) != seen.end()) {
      throw std::invalid_argument("uplink: duplicate stream in decoding order");
    }
    seen.push_back(ref);
  }
}

// Effective received matrix H_k P_{k,i}, M x dim.
CMat effective(const ChannelSet& ch, const UplinkConfig& cfg,
               const UplinkStreamRef& ref) {
  return ch.users[ref.user].true_channel * cfg.precoders[ref.user][ref.part];
}

}  // namespace

std::vector<CMat> mmse_filters(const ChannelSet& ch, const UplinkConfig& cfg) {
  validate(ch, cfg);
  const int m = ch.tx_antennas;
  std::vector<CMat> filters;
  filters.reserve(cfg.decoding_order.size());
  for (std::size_t p = 0; p < cfg.decoding_order.size(); ++p) {
    CMat cov = CMat::Identity(m, m);
    for (std::size_t q = p + 1; q < cfg.decoding_order.size(); ++q) {
      CMat e = effective(ch, cfg, cfg.decoding_order[q]);
      cov += e * e.adjoint();
    }
    CMat e = effective(ch, cfg, cfg.decoding_order[p]);
    filters.push_back(e.adjoint() * cov.inverse());
  }
  return filters;
}

UplinkRates rate_uplink(const ChannelSet& ch, const UplinkConfig& cfg) {
  validate(ch, cfg);
  const int m = ch.tx_antennas;
  UplinkRates out;
  out.stream_rate.resize(cfg.decoding_order.size());
  out.user_total.assign(ch.num_users(), 0.0);

  // Interference at position p = all streams decoded after p.
  const std::size_t n = cfg.decoding_order.size();
  std::vector<CMat> tail(n + 1);
  tail[n] = CMat::Identity(m, m);
  for (std::size_t p = n; p-- > 0;) {
    CMat e = effective(ch, cfg, cfg.decoding_order[p]);
    tail[p] = tail[p + 1] + e * e.adjoint();
  }
  for (std::size_t p = 0; p < n; ++p) {
    CMat e = effective(ch, cfg, cfg.decoding_order[p]);
    double rate =
        clamp_rate(log2det_i_plus(e.adjoint() * tail[p + 1].llt().solve(e)));
    out.stream_rate[p] = rate;
    out.user_total[cfg.decoding_order[p].user] += rate;
  }
  return out;
}

MacRegion2 mac_region_2user(double p1, double p2, double g1, double g2) {
  if (p1 < 0.0 || p2 < 0.0) throw std::invalid_argument("mac_region_2user: negative power");
  MacRegion2 r;
  r.r1_max = std::log2(1.0 + p1 * g1);
  r.r2_max = std::log2(1.0 + p2 * g2);
  r.r_sum = std::log2(1.0 + p1 * g1 + p2 * g2);
  return r;
}

UplinkConfig split_config_2user(const SplitSolution& sol, double p1, double p2) {
  UplinkConfig cfg;
  cfg.power_budgets = {p1, p2};
  auto scalar = [](double power) {
    CMat p(1, 1);
    p(0, 0) = std::sqrt(power);
    return p;
  };
  if (sol.order == "user1_first") {
    cfg.precoders = {{scalar(p1)}, {scalar(p2)}};
    cfg.decoding_order = {{0, 0}, {1, 0}};
  } else if (sol.order == "user2_first") {
    cfg.precoders = {{scalar(p1)}, {scalar(p2)}};
    cfg.decoding_order = {{1, 0}, {0, 0}};
  } else {
    cfg.precoders = {{scalar(sol.a * p1), scalar((1.0 - sol.a) * p1)},
                     {scalar(p2)}};
    cfg.decoding_order = {{0, 0}, {1, 0}, {0, 1}};
  }
  return cfg;
}

std::optional<SplitSolution> find_split_for_point(double r1_target,
                                                  double r2_target, double p1,
                                                  double p2, double g1,
                                                  double g2, double tol) {
  MacRegion2 region = mac_region_2user(p1, p2, g1, g2);
  if (!region.contains(r1_target, r2_target, tol)) return std::nullopt;

  // User-1 rate under the split chain s_{1,1}, s_2, s_{1,2}; decreasing in a.
  auto r1_of = [&](double a) {
    double num = a * p1 * g1;
    double denom = 1.0 + (1.0 - a) * p1 * g1 + p2 * g2;
    return std::log2(1.0 + num / denom) + std::log2(1.0 + (1.0 - a) * p1 * g1);
  };

  double r1_lo = r1_of(1.0);  // user 1 fully decoded first
  double r1_hi = r1_of(0.0);  // == r1_max
  // Aim within [r1_target, r_sum - r2_target]; both are reachable on the face.
  double aim = std::clamp(r1_target, r1_lo, region.r_sum - r2_target);

  if (aim <= r1_lo + tol * 0.5) return SplitSolution{1.0, "user1_first"};
  if (aim >= r1_hi - tol * 0.5) return SplitSolution{1.0, "user2_first"};

  // Coarse grid, then bisection on the winning cell.
  const int grid = 2001;
  double lo = 0.0, hi = 1.0;
  for (int i = 1; i < grid; ++i) {
    double a = static_cast<double>(i) / (grid - 1);
    if (r1_of(a) <= aim) {
      hi = a;
      lo = a - 1.0 / (grid - 1);
      break;
    }
  }
  while (hi - lo > 1e-13) {
    double mid = 0.5 * (lo + hi);
    if (r1_of(mid) <= aim) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // lo gives r1 >= aim >= r1_target; the sum rate is conserved, so r2 follows.
  return SplitSolution{lo, "split"};
}

}  // namespace rsma
