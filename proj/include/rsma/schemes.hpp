#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/layout.hpp"
#include "rsma/metric.hpp"
#include "rsma/types.hpp"

namespace rsma {

// Per-stream precoders plus the power budget and optional decoding orders.
struct PrecoderSet {
  std::vector<CMat> precoders;  // one M x dim matrix per stream in the layout
  double power_budget = 0.0;
  // Optional per-user SIC order over the user's streams (GRS); empty = layout
  // default (largest subsets first, lexicographic ties).
  std::vector<std::vector<int>> decoding_orders;
  std::vector<int> dpc_order;  // DPCRS; empty = layout default

  double transmit_power() const {
    double p = 0.0;
    for (const auto& m : precoders) p += m.squaredNorm();
    return p;
  }
};

struct RateReport {
  // R_{A,k}: decode rate of stream A at user k, for k in A's subset.
  std::map<std::pair<int, int>, double> per_stream_user_rate;
  std::vector<double> stream_rate;  // min over the stream's subset
  // C_k^A: portion of stream A's rate allocated to owner k.
  std::map<std::pair<int, int>, double> allocations;
  std::vector<double> user_total;

  double rate_of(int stream, int user) const {
    return per_stream_user_rate.at({stream, user});
  }
  double allocation(int stream, int user) const {
    auto it = allocations.find({stream, user});
    return it == allocations.end() ? 0.0 : it->second;
  }
};

// Split a multi-decoder stream's rate among its owners. `baselines` are the
// owners' rate totals before this stream is allocated.
std::vector<double> allocate_common(double stream_rate,
                                    const std::vector<double>& baselines,
                                    const std::vector<int>& owners,
                                    const Metric& metric);

// Generic SIC rate evaluation for any layout (1-layer RS, HRS, GRS, SDMA,
// NOMA, OMA, Multicast). DPCRS private streams are handled per its
// interference structure.
RateReport evaluate_rates(const ChannelSet& ch, const StreamLayout& layout,
                          const PrecoderSet& pre, const Metric& metric);

RateReport rate_1layer(const ChannelSet& ch, const StreamLayout& layout,
                       const PrecoderSet& pre, const Metric& metric);
RateReport rate_hrs(const ChannelSet& ch, const StreamLayout& layout,
                    const PrecoderSet& pre, const Metric& metric);
RateReport rate_grs(const ChannelSet& ch, const StreamLayout& layout,
                    const PrecoderSet& pre, const Metric& metric);
RateReport rate_dpcrs(const ChannelSet& ch, const StreamLayout& layout,
                      const PrecoderSet& pre, const Metric& metric);

std::string report_to_json(const RateReport& report, const StreamLayout& layout);

}  // namespace rsma
