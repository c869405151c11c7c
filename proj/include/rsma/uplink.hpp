#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/types.hpp"

namespace rsma {

// One transmitted stream vector: (user, part). Unsplit users carry part 0 only.
struct UplinkStreamRef {
  int user = 0;
  int part = 0;

  bool operator==(const UplinkStreamRef&) const = default;
};

// Uplink MIMO configuration: per-user precoders for each stream part, power
// budgets, and a total SIC order over all transmitted streams. The channel
// set's tx_antennas is the receiver antenna count M; user matrices are M x N.
struct UplinkConfig {
  std::vector<std::vector<CMat>> precoders;  // [user][part], N x dim
  std::vector<double> power_budgets;
  std::vector<UplinkStreamRef> decoding_order;
};

struct UplinkRates {
  std::vector<double> stream_rate;  // aligned with decoding_order
  std::vector<double> user_total;
};

struct MacRegion2 {
  double r1_max;
  double r2_max;
  double r_sum;

  bool contains(double r1, double r2, double tol = 1e-9) const {
    return r1 <= r1_max + tol && r2 <= r2_max + tol && r1 + r2 <= r_sum + tol;
  }
};

// MMSE receive filters against not-yet-decoded interference, aligned with the
// decoding order. Each filter is dim x M.
std::vector<CMat> mmse_filters(const ChannelSet& ch, const UplinkConfig& cfg);

UplinkRates rate_uplink(const ChannelSet& ch, const UplinkConfig& cfg);

MacRegion2 mac_region_2user(double p1, double p2, double g1, double g2);

struct SplitSolution {
  double a;           // power fraction of user 1 on its first stream
  std::string order;  // "user1_first", "user2_first", or "split"
};

// Two-user SISO: find a split power and SIC order whose rate pair dominates
// the target componentwise within `tol`. Targets outside the pentagon are
// reported infeasible.
std::optional<SplitSolution> find_split_for_point(double r1_target,
                                                  double r2_target, double p1,
                                                  double p2, double g1,
                                                  double g2, double tol = 1e-6);

// Build the 2-user SISO config corresponding to a SplitSolution.
UplinkConfig split_config_2user(const SplitSolution& sol, double p1, double p2);

}  // namespace rsma
