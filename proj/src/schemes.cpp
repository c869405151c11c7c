#include "rsma/schemes.hpp"

#include <algorithm>
#include <limits>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rsma {

std::vector<double> allocate_common(double stream_rate,
                                    const std::vector<double>& baselines,
                                    const std::vector<int>& owners,
                                    const Metric& metric) {
  if (stream_rate < 0.0) throw std::invalid_argument("allocate_common: negative rate");
  if (baselines.size() != owners.size()) {
    throw std::invalid_argument("allocate_common: baselines/owners mismatch");
  }
  const std::size_t n = owners.size();
  std::vector<double> alloc(n, 0.0);
  if (n == 0) return alloc;
  if (n == 1) {
    alloc[0] = stream_rate;
    return alloc;
  }
  if (metric.kind == Metric::Kind::MMF) {
    // Water-filling equalization: find level L with sum max(0, L - b_k) = R.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return baselines[a] < baselines[b]; });
    double level = baselines[idx[0]];
    double remaining = stream_rate;
    std::size_t active = 1;
    while (active < n && remaining > 0.0) {
      double gap = baselines[idx[active]] - level;
      double fill = gap * static_cast<double>(active);
      if (fill >= remaining) break;
      remaining -= fill;
      level = baselines[idx[active]];
      ++active;
    }
    level += remaining / static_cast<double>(active);
    for (std::size_t i = 0; i < n; ++i) {
      alloc[i] = std::max(0.0, level - baselines[i]);
    }
    // exact sum contract despite rounding
    double sum = std::accumulate(alloc.begin(), alloc.end(), 0.0);
    if (sum > 0.0) {
      for (auto& a : alloc) a *= stream_rate / sum;
    } else {
      alloc[idx[0]] = stream_rate;
    }
    return alloc;
  }
  // WSR: the whole common rate to the max-weight owner (EE: unit weights).
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (metric.weight(owners[i]) > metric.weight(owners[best])) best = i;
  }
  alloc[best] = stream_rate;
  return alloc;
}

namespace {

void validate(const ChannelSet& ch, const StreamLayout& layout,
              const PrecoderSet& pre) {
  if (layout.num_users != ch.num_users()) {
    throw std::invalid_argument("evaluate_rates: user count mismatch");
  }
  if (pre.precoders.size() != layout.streams.size()) {
    throw std::invalid_argument("evaluate_rates: precoder count mismatch");
  }
  for (std::size_t s = 0; s < layout.streams.size(); ++s) {
    const auto& p = pre.precoders[s];
    if (p.rows() != ch.tx_antennas || p.cols() != layout.streams[s].dim) {
      throw std::invalid_argument("evaluate_rates: precoder dimension mismatch");
    }
  }
  if (pre.transmit_power() > pre.power_budget + 1e-9) {
    throw std::invalid_argument("evaluate_rates: power budget exceeded");
  }
}

std::vector<int> decode_order_for(const StreamLayout& layout,
                                  const PrecoderSet& pre, int user) {
  if (!pre.decoding_orders.empty()) {
    const auto& order = pre.decoding_orders.at(user);
    // must list exactly the user's streams, larger subsets strictly first
    std::vector<int> expected = layout.default_decode_order(user);
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::sort(expected.begin(), expected.end());
    if (sorted != expected) {
      throw std::invalid_argument("decoding order: wrong stream set for user");
    }
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (layout.streams[order[i - 1]].subset.size() <
          layout.streams[order[i]].subset.size()) {
        throw std::invalid_argument("decoding order: smaller subset before larger");
      }
    }
    return order;
  }
  return layout.default_decode_order(user);
}

}  // namespace

RateReport evaluate_rates(const ChannelSet& ch, const StreamLayout& layout,
                          const PrecoderSet& pre, const Metric& metric) {
  validate(ch, layout, pre);
  const int num_streams = static_cast<int>(layout.streams.size());
  const int num_users = layout.num_users;

  RateReport report;
  report.stream_rate.assign(num_streams, 0.0);
  report.user_total.assign(num_users, 0.0);

  std::vector<int> dpc_order = pre.dpc_order.empty() ? layout.dpc_order : pre.dpc_order;
  std::vector<int> dpc_pos(num_users, -1);
  if (layout.kind == SchemeKind::DPCRS) {
    if (static_cast<int>(dpc_order.size()) != num_users) {
      throw std::invalid_argument("evaluate_rates: DPCRS needs an encoding order");
    }
    for (int i = 0; i < num_users; ++i) dpc_pos[dpc_order[i]] = i;
  }

  for (int k = 0; k < num_users; ++k) {
    const CMat& h = ch.users[k].true_channel;  // M x N
    const int n = static_cast<int>(h.cols());

    // Gram of each stream at this user: H^H P P^H H, N x N.
    std::vector<CMat> gram(num_streams);
    for (int s = 0; s < num_streams; ++s) {
      CMat g = h.adjoint() * pre.precoders[s];  // N x dim
      gram[s] = g * g.adjoint();
    }

    CMat undecoded = CMat::Zero(n, n);
    for (int s = 0; s < num_streams; ++s) {
      if (!layout.streams[s].decoded_by(k)) undecoded += gram[s];
    }

    const std::vector<int> order = decode_order_for(layout, pre, k);
    // interference at position i = streams after i in the chain + never decoded
    std::vector<CMat> tail(order.size() + 1);
    tail[order.size()] = undecoded;
    for (int i = static_cast<int>(order.size()) - 1; i >= 0; --i) {
      tail[i] = tail[i + 1] + gram[order[i]];
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      int s = order[i];
      CMat cov = CMat::Identity(n, n) + tail[i + 1];
      bool dpc_private = layout.kind == SchemeKind::DPCRS &&
                         layout.streams[s].subset.size() == 1;
      if (dpc_private) {
        // DPC pre-cancels earlier-encoded private streams; only later ones interfere.
        cov = CMat::Identity(n, n);
        for (int j = dpc_pos[k] + 1; j < num_users; ++j) {
          int ps = layout.private_stream_of(dpc_order[j]);
          if (ps >= 0) cov += gram[ps];
        }
      }
      CMat g = h.adjoint() * pre.precoders[s];  // N x dim
      double rate = clamp_rate(log2det_i_plus(g.adjoint() * cov.llt().solve(g)));
      report.per_stream_user_rate[{s, k}] = rate;
    }
  }

  for (int s = 0; s < num_streams; ++s) {
    double r = std::numeric_limits<double>::infinity();
    for (int k : layout.streams[s].subset) {
      r = std::min(r, report.per_stream_user_rate.at({s, k}));
    }
    report.stream_rate[s] = r;
  }

  // Allocate stream rates to owners, smaller subsets first so that running
  // totals serve as MMF baselines for the wider streams.
  std::vector<int> by_size(num_streams);
  std::iota(by_size.begin(), by_size.end(), 0);
  std::stable_sort(by_size.begin(), by_size.end(), [&](int a, int b) {
    return layout.streams[a].subset.size() < layout.streams[b].subset.size();
  });
  for (int s : by_size) {
    const auto& owners = layout.streams[s].owner_shares;
    std::vector<double> baselines;
    baselines.reserve(owners.size());
    for (int k : owners) baselines.push_back(report.user_total[k]);
    std::vector<double> alloc =
        allocate_common(report.stream_rate[s], baselines, owners, metric);
    for (std::size_t i = 0; i < owners.size(); ++i) {
      report.allocations[{s, owners[i]}] = alloc[i];
      report.user_total[owners[i]] += alloc[i];
    }
  }
  return report;
}

namespace {

RateReport evaluate_kind(const ChannelSet& ch, const StreamLayout& layout,
                         const PrecoderSet& pre, const Metric& metric,
                         SchemeKind expected, const char* what) {
  if (layout.kind != expected) {
    throw std::invalid_argument(std::string(what) + ": wrong layout kind");
  }
  return evaluate_rates(ch, layout, pre, metric);
}

}  // namespace

RateReport rate_1layer(const ChannelSet& ch, const StreamLayout& layout,
                       const PrecoderSet& pre, const Metric& metric) {
  return evaluate_kind(ch, layout, pre, metric, SchemeKind::OneLayerRS, "rate_1layer");
}

RateReport rate_hrs(const ChannelSet& ch, const StreamLayout& layout,
                    const PrecoderSet& pre, const Metric& metric) {
  return evaluate_kind(ch, layout, pre, metric, SchemeKind::HRS, "rate_hrs");
}

RateReport rate_grs(const ChannelSet& ch, const StreamLayout& layout,
                    const PrecoderSet& pre, const Metric& metric) {
  return evaluate_kind(ch, layout, pre, metric, SchemeKind::GRS, "rate_grs");
}

RateReport rate_dpcrs(const ChannelSet& ch, const StreamLayout& layout,
                      const PrecoderSet& pre, const Metric& metric) {
  return evaluate_kind(ch, layout, pre, metric, SchemeKind::DPCRS, "rate_dpcrs");
}

std::string report_to_json(const RateReport& report, const StreamLayout& layout) {
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
  };
  nlohmann::json j;
  j["streams"] = nlohmann::json::object();
  for (std::size_t s = 0; s < layout.streams.size(); ++s) {
    nlohmann::json js;
    js["rate"] = fmt(report.stream_rate[s]);
    js["per_user"] = nlohmann::json::object();
    js["allocations"] = nlohmann::json::object();
    for (int k : layout.streams[s].subset) {
      js["per_user"][std::to_string(k + 1)] =
          fmt(report.rate_of(static_cast<int>(s), k));
    }
    for (int k : layout.streams[s].owner_shares) {
      js["allocations"][std::to_string(k + 1)] =
          fmt(report.allocation(static_cast<int>(s), k));
    }
    std::string key = layout.streams[s].subset_key();
    while (j["streams"].contains(key)) key += "'";  // HRS may repeat a subset
    j["streams"][key] = js;
  }
  j["user_total"] = nlohmann::json::array();
  for (double t : report.user_total) j["user_total"].push_back(fmt(t));
  return j.dump();
}

}  // namespace rsma
