#pragma once

// Shared helpers for the unit and acceptance suites: random instance
// generation and an independent scalar-SINR oracle for unit-dimension
// MISO layouts, written without the library's log-det path so the two
// implementations can check each other.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/layout.hpp"
#include "rsma/rng.hpp"
#include "rsma/schemes.hpp"
#include "rsma/types.hpp"

namespace testutil {

inline rsma::ChannelSet miso_channel(std::uint64_t seed, int tx, int users,
                                     double variance = 1.0) {
  return rsma::gen_rayleigh(seed, tx, std::vector<int>(users, 1),
                            std::vector<double>(users, variance));
}

// Random unit-dim precoders for `layout`, scaled to use `fill` of the budget.
inline rsma::PrecoderSet random_precoders(rsma::Rng& rng,
                                          const rsma::StreamLayout& layout,
                                          int tx, double budget,
                                          double fill = 1.0) {
  rsma::PrecoderSet pre;
  pre.power_budget = budget;
  double total = 0.0;
  for (const auto& s : layout.streams) {
    rsma::CMat p(tx, s.dim);
    for (int r = 0; r < tx; ++r) {
      for (int c = 0; c < s.dim; ++c) p(r, c) = rng.cnormal();
    }
    total += p.squaredNorm();
    pre.precoders.push_back(std::move(p));
  }
  double scale = std::sqrt(fill * budget / total);
  for (auto& p : pre.precoders) p *= scale;
  return pre;
}

// Scalar-SINR rates for single-antenna users and unit stream dimensions,
// computed with plain complex arithmetic. Mirrors the SIC convention
// (default decode orders; DPC privates see only later-encoded privates)
// but shares no code with the matrix evaluator.
inline std::map<std::pair<int, int>, double> scalar_sinr_rates(
    const rsma::ChannelSet& ch, const rsma::StreamLayout& layout,
    const rsma::PrecoderSet& pre) {
  const int num_streams = static_cast<int>(layout.streams.size());
  std::map<std::pair<int, int>, double> out;

  std::vector<int> dpc_pos(layout.num_users, -1);
  if (layout.kind == rsma::SchemeKind::DPCRS) {
    for (int i = 0; i < layout.num_users; ++i) dpc_pos[layout.dpc_order[i]] = i;
  }

  for (int k = 0; k < layout.num_users; ++k) {
    std::vector<double> recv(num_streams);  // |h_k^H p_s|^2
    for (int s = 0; s < num_streams; ++s) {
      std::complex<double> g = 0.0;
      for (int m = 0; m < ch.tx_antennas; ++m) {
        g += std::conj(ch.users[k].true_channel(m, 0)) * pre.precoders[s](m, 0);
      }
      recv[s] = std::norm(g);
    }
    const std::vector<int> order = layout.default_decode_order(k);
    for (std::size_t i = 0; i < order.size(); ++i) {
      int s = order[i];
      double interference = 0.0;
      bool dpc_private = layout.kind == rsma::SchemeKind::DPCRS &&
                         layout.streams[s].subset.size() == 1;
      if (dpc_private) {
        for (int j = dpc_pos[k] + 1; j < layout.num_users; ++j) {
          int ps = layout.private_stream_of(layout.dpc_order[j]);
          if (ps >= 0) interference += recv[ps];
        }
      } else {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
          interference += recv[order[j]];
        }
        for (int t = 0; t < num_streams; ++t) {
          if (!layout.streams[t].decoded_by(k)) interference += recv[t];
        }
      }
      double rate = std::log2(1.0 + recv[s] / (1.0 + interference));
      out[{s, k}] = rsma::clamp_rate(rate);
    }
  }
  return out;
}

}  // namespace testutil
