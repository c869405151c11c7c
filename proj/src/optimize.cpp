#include "rsma/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rsma/rng.hpp"

namespace rsma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453;

ChannelSet design_view(const ChannelSet& ch) {
  ChannelSet view = ch;
  for (auto& u : view.users) u.true_channel = u.estimate;
  return view;
}

void require_scalar_streams(const ChannelSet& ch, const StreamLayout& layout,
                            const char* what) {
  for (const auto& u : ch.users) {
    if (u.rx_antennas != 1) {
      throw std::invalid_argument(std::string(what) + ": MISO (single-antenna users) only");
    }
  }
  for (const auto& s : layout.streams) {
    if (s.dim != 1) {
      throw std::invalid_argument(std::string(what) + ": unit stream dimensions only");
    }
  }
}

// Streams interfering with stream s at user k: decoded later in k's chain,
// or never decoded by k. DPCRS private streams see only later-encoded privates.
std::vector<std::vector<std::vector<int>>> interference_sets(
    const StreamLayout& layout) {
  const int num_streams = static_cast<int>(layout.streams.size());
  const int num_users = layout.num_users;
  std::vector<std::vector<std::vector<int>>> sets(
      num_streams, std::vector<std::vector<int>>(num_users));
  std::vector<int> dpc_pos(num_users, -1);
  for (std::size_t i = 0; i < layout.dpc_order.size(); ++i) {
    dpc_pos[layout.dpc_order[i]] = static_cast<int>(i);
  }
  for (int k = 0; k < num_users; ++k) {
    std::vector<int> order = layout.default_decode_order(k);
    std::vector<int> never;
    for (int s = 0; s < num_streams; ++s) {
      if (!layout.streams[s].decoded_by(k)) never.push_back(s);
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      int s = order[i];
      if (layout.kind == SchemeKind::DPCRS && layout.streams[s].subset.size() == 1) {
        for (std::size_t j = dpc_pos[k] + 1; j < layout.dpc_order.size(); ++j) {
          int ps = layout.private_stream_of(layout.dpc_order[j]);
          if (ps >= 0) sets[s][k].push_back(ps);
        }
        continue;
      }
      sets[s][k] = never;
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        sets[s][k].push_back(order[j]);
      }
    }
  }
  return sets;
}

struct SoftMin {
  double value;
  std::vector<double> weights;  // d value / d r_i
};

SoftMin soft_min(const std::vector<double>& r, double temperature) {
  SoftMin out;
  out.weights.assign(r.size(), 0.0);
  if (r.size() == 1) {
    out.value = r[0];
    out.weights[0] = 1.0;
    return out;
  }
  double rmin = *std::min_element(r.begin(), r.end());
  double z = 0.0;
  for (double v : r) z += std::exp(-(v - rmin) / temperature);
  for (std::size_t i = 0; i < r.size(); ++i) {
    out.weights[i] = std::exp(-(r[i] - rmin) / temperature) / z;
  }
  out.value = rmin - temperature * std::log(z / static_cast<double>(r.size())) -
              temperature * std::log(static_cast<double>(r.size()));
  return out;
}

// Water-fill level L with sum_k max(0, L - b_k) = budget; also the active set.
struct WaterFill {
  double level;
  std::vector<int> active;  // indices with b_k < level (receiving allocation)
};

WaterFill water_fill_level(const std::vector<double>& baselines, double budget) {
  const std::size_t n = baselines.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return baselines[a] < baselines[b]; });
  double level = baselines[idx[0]];
  double remaining = budget;
  std::size_t active = 1;
  while (active < n && remaining > 0.0) {
    double fill = (baselines[idx[active]] - level) * static_cast<double>(active);
    if (fill >= remaining) break;
    remaining -= fill;
    level = baselines[idx[active]];
    ++active;
  }
  level += remaining / static_cast<double>(active);
  WaterFill out;
  out.level = level;
  for (std::size_t i = 0; i < active; ++i) out.active.push_back(static_cast<int>(idx[i]));
  return out;
}

}  // namespace

double evaluate_metric(const RateReport& report, const PrecoderSet& pre,
                       const Metric& metric) {
  if (!qos_feasible(report, metric)) return -kInf;
  switch (metric.kind) {
    case Metric::Kind::WSR: {
      double v = 0.0;
      for (std::size_t k = 0; k < report.user_total.size(); ++k) {
        v += metric.weight(static_cast<int>(k)) * report.user_total[k];
      }
      return v;
    }
    case Metric::Kind::MMF:
      return *std::min_element(report.user_total.begin(), report.user_total.end());
    case Metric::Kind::EE: {
      double sum = std::accumulate(report.user_total.begin(),
                                   report.user_total.end(), 0.0);
      double antennas = pre.precoders.empty() ? 0.0
                        : static_cast<double>(pre.precoders[0].rows());
      double circuit = antennas * metric.p_dyn_w + metric.p_sta_w;
      return sum / (pre.transmit_power() / metric.eta + circuit);
    }
  }
  return 0.0;
}

bool qos_feasible(const RateReport& report, const Metric& metric, double tol) {
  for (std::size_t k = 0; k < metric.qos.size() && k < report.user_total.size(); ++k) {
    if (report.user_total[k] < metric.qos[k] - tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Grid tier
// ---------------------------------------------------------------------------

namespace {

struct GridDirections {
  std::vector<CVec> private_dir;  // MMSE-style, unit norm
  CVec common_dir;                // dominant left singular vector of estimates
};

GridDirections grid_directions(const ChannelSet& ch, double power) {
  const int m = ch.tx_antennas;
  const int k = ch.num_users();
  CMat stacked(m, k);
  for (int u = 0; u < k; ++u) stacked.col(u) = ch.users[u].estimate.col(0);

  CMat gram = stacked * stacked.adjoint() +
              (static_cast<double>(k) / power) * CMat::Identity(m, m);
  GridDirections out;
  for (int u = 0; u < k; ++u) {
    CVec d = gram.llt().solve(stacked.col(u));
    double n = d.norm();
    out.private_dir.push_back(n > 0 ? CVec(d / n) : CVec(CVec::Zero(m)));
  }
  Eigen::SelfAdjointEigenSolver<CMat> eig(stacked * stacked.adjoint());
  out.common_dir = eig.eigenvectors().col(m - 1);
  return out;
}

// Candidate per-stream power fractions for a layout, driven by one or two
// scalar grid axes.
std::vector<std::vector<double>> power_fraction_grid(const StreamLayout& layout,
                                                     int grid_points) {
  const int num_streams = static_cast<int>(layout.streams.size());
  std::vector<std::vector<double>> out;
  auto axis = [&](int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(static_cast<double>(i) / (n - 1));
    return v;
  };
  if (num_streams == 1) {
    out.push_back({1.0});
    return out;
  }
  switch (layout.kind) {
    case SchemeKind::OneLayerRS:
    case SchemeKind::DPCRS: {
      // stream 0 is the common stream
      if (layout.num_users == 2) {
        for (double t : axis(grid_points)) {
          for (double q : axis(grid_points)) {
            out.push_back({t, (1.0 - t) * q, (1.0 - t) * (1.0 - q)});
          }
        }
      } else {
        double share = 1.0 / layout.num_users;
        for (double t : axis(grid_points)) {
          std::vector<double> f(num_streams, 0.0);
          f[0] = t;
          for (int s = 1; s < num_streams; ++s) f[s] = (1.0 - t) * share;
          out.push_back(f);
        }
      }
      break;
    }
    case SchemeKind::SDMA: {
      if (layout.num_users == 2) {
        for (double q : axis(grid_points)) out.push_back({q, 1.0 - q});
      } else {
        out.push_back(std::vector<double>(num_streams, 1.0 / num_streams));
      }
      break;
    }
    case SchemeKind::NOMA: {
      if (num_streams == 2) {
        for (double q : axis(grid_points)) out.push_back({q, 1.0 - q});
      } else {
        // geometric profile over chain depth, one shared shape parameter
        for (int i = 0; i < grid_points; ++i) {
          double x = static_cast<double>(i) / (grid_points - 1);
          double g = std::pow(10.0, -1.3 + 2.6 * x);  // 0.05 .. 20
          std::vector<double> f(num_streams);
          double total = 0.0;
          for (int s = 0; s < num_streams; ++s) {
            f[s] = std::pow(g, static_cast<double>(layout.streams[s].subset.size()));
            total += f[s];
          }
          for (auto& v : f) v /= total;
          out.push_back(f);
        }
      }
      break;
    }
    case SchemeKind::Multicast:
    case SchemeKind::OMA: {
      out.push_back(std::vector<double>(num_streams, 1.0 / num_streams));
      break;
    }
    default:
      throw std::invalid_argument(
          "optimize_powers_fixed_directions: unsupported layout kind");
  }
  return out;
}

PrecoderSet assemble(const StreamLayout& layout, const GridDirections& dirs,
                     const std::vector<double>& fractions, double power) {
  PrecoderSet pre;
  pre.power_budget = power;
  for (std::size_t s = 0; s < layout.streams.size(); ++s) {
    const auto& stream = layout.streams[s];
    CVec dir;
    if (stream.subset.size() == static_cast<std::size_t>(layout.num_users) &&
        layout.num_users > 1) {
      dir = dirs.common_dir;
    } else {
      dir = dirs.private_dir[stream.owner_shares.front()];
    }
    pre.precoders.push_back(std::sqrt(fractions[s] * power) * dir);
  }
  return pre;
}

struct Scored {
  PrecoderSet pre;
  double design_objective = -kInf;
  bool feasible = false;
};

Scored best_grid_point(const ChannelSet& design, const StreamLayout& layout,
                       const Metric& metric, int grid_points, double power) {
  GridDirections dirs = grid_directions(design, power);
  Scored best;
  bool have = false;
  for (const auto& fractions : power_fraction_grid(layout, grid_points)) {
    PrecoderSet pre = assemble(layout, dirs, fractions, power);
    RateReport report = evaluate_rates(design, layout, pre, metric);
    bool feasible = qos_feasible(report, metric);
    // rank feasible points by metric; keep the least-infeasible otherwise
    Metric unconstrained = metric;
    unconstrained.qos.clear();
    double value = evaluate_metric(report, pre, unconstrained);
    bool better = !have || (feasible && !best.feasible) ||
                  (feasible == best.feasible && value > best.design_objective);
    if (better) {
      best = {std::move(pre), value, feasible};
      have = true;
    }
  }
  return best;
}

}  // namespace

OptResult optimize_powers_fixed_directions(const ChannelSet& ch,
                                           const StreamLayout& layout,
                                           const Metric& metric, double power,
                                           int grid_points) {
  if (grid_points < 2) {
    throw std::invalid_argument("optimize_powers_fixed_directions: grid too small");
  }
  if (power <= 0.0) {
    throw std::invalid_argument("optimize_powers_fixed_directions: power <= 0");
  }
  require_scalar_streams(ch, layout, "optimize_powers_fixed_directions");
  ChannelSet design = design_view(ch);
  Scored best = best_grid_point(design, layout, metric, grid_points, power);

  OptResult out;
  out.precoders = std::move(best.pre);
  out.report = evaluate_rates(ch, layout, out.precoders, metric);
  out.feasible = qos_feasible(out.report, metric);
  out.objective = evaluate_metric(out.report, out.precoders, metric);
  return out;
}

// ---------------------------------------------------------------------------
// Soft-min surrogate and its Wirtinger gradient
// ---------------------------------------------------------------------------

namespace {

struct SurrogateEval {
  double value = 0.0;
  std::vector<CVec> grad;  // d value / d conj(p_s), filled when requested
};

PrecoderSet pack(const std::vector<CVec>& precoders, double budget) {
  PrecoderSet pre;
  pre.power_budget = budget;
  for (const auto& p : precoders) pre.precoders.push_back(p);
  return pre;
}

SurrogateEval surrogate_eval(const ChannelSet& ch, const StreamLayout& layout,
                             const std::vector<CVec>& precoders,
                             const Metric& metric, double temperature,
                             double penalty_weight, bool want_grad) {
  require_scalar_streams(ch, layout, "surrogate");
  const int num_streams = static_cast<int>(layout.streams.size());
  const int num_users = layout.num_users;
  if (static_cast<int>(precoders.size()) != num_streams) {
    throw std::invalid_argument("surrogate: precoder count mismatch");
  }
  if (temperature <= 0.0) {
    throw std::invalid_argument("surrogate: temperature must be positive");
  }
  const int m = ch.tx_antennas;

  std::vector<CVec> h(num_users);
  for (int k = 0; k < num_users; ++k) h[k] = ch.users[k].true_channel.col(0);

  // inner[s][k] = h_k^H p_s, a = |inner|^2
  std::vector<std::vector<Complex>> inner(num_streams,
                                          std::vector<Complex>(num_users));
  std::vector<std::vector<double>> a(num_streams, std::vector<double>(num_users));
  for (int s = 0; s < num_streams; ++s) {
    for (int k = 0; k < num_users; ++k) {
      inner[s][k] = h[k].dot(precoders[s]);  // Eigen dot conjugates the left arg
      a[s][k] = std::norm(inner[s][k]);
    }
  }

  const auto isets = interference_sets(layout);
  std::vector<std::vector<double>> noise(num_streams, std::vector<double>(num_users));
  std::vector<std::vector<double>> total(num_streams, std::vector<double>(num_users));
  std::vector<std::vector<double>> rate(num_streams, std::vector<double>(num_users));
  std::vector<SoftMin> soft(num_streams);
  for (int s = 0; s < num_streams; ++s) {
    std::vector<double> subset_rates;
    for (int k : layout.streams[s].subset) {
      double nn = 1.0;
      for (int j : isets[s][k]) nn += a[j][k];
      noise[s][k] = nn;
      total[s][k] = nn + a[s][k];
      rate[s][k] = std::log2(total[s][k] / nn);
      subset_rates.push_back(rate[s][k]);
    }
    soft[s] = soft_min(subset_rates, temperature);
  }
  auto soft_weight = [&](int s, int user) {
    const auto& subset = layout.streams[s].subset;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (subset[i] == user) return soft[s].weights[i];
    }
    return 0.0;
  };

  // d objective / d rate[s][k], accumulated per metric and penalty
  std::vector<std::vector<double>> g(num_streams, std::vector<double>(num_users, 0.0));
  double value = 0.0;
  double ee_trace_coeff = 0.0;  // extra gradient term c * p_s for EE

  // Exact allocation fractions at the current point: the share of stream s's
  // rate credited to user k. Held fixed for the gradient.
  std::vector<std::vector<double>> frac;
  auto alloc_fractions = [&]() -> const std::vector<std::vector<double>>& {
    if (!frac.empty()) return frac;
    double trace = 0.0;
    for (const auto& p : precoders) trace += p.squaredNorm();
    RateReport exact =
        evaluate_rates(ch, layout, pack(precoders, trace + 1.0), metric);
    frac.assign(num_streams, std::vector<double>(num_users, 0.0));
    for (int s = 0; s < num_streams; ++s) {
      const auto& owners = layout.streams[s].owner_shares;
      if (exact.stream_rate[s] > kRateClamp) {
        for (int k : owners) {
          frac[s][k] = exact.allocation(s, k) / exact.stream_rate[s];
        }
      } else {
        for (int k : owners) frac[s][k] = 1.0 / static_cast<double>(owners.size());
      }
    }
    return frac;
  };

  switch (metric.kind) {
    case Metric::Kind::WSR: {
      for (int s = 0; s < num_streams; ++s) {
        double wmax = 0.0;
        for (int k : layout.streams[s].owner_shares) {
          wmax = std::max(wmax, metric.weight(k));
        }
        value += wmax * soft[s].value;
        for (int k : layout.streams[s].subset) {
          g[s][k] += wmax * soft_weight(s, k);
        }
      }
      break;
    }
    case Metric::Kind::EE: {
      double num = 0.0;
      for (int s = 0; s < num_streams; ++s) num += soft[s].value;
      double trace = 0.0;
      for (const auto& p : precoders) trace += p.squaredNorm();
      double den = trace / metric.eta + m * metric.p_dyn_w + metric.p_sta_w;
      value = num / den;
      for (int s = 0; s < num_streams; ++s) {
        for (int k : layout.streams[s].subset) {
          g[s][k] += soft_weight(s, k) / den;
        }
      }
      ee_trace_coeff = -num / (den * den * metric.eta);
      break;
    }
    case Metric::Kind::MMF: {
      // Streams that are either per-user singletons or full-coverage commons
      // admit an exact water-fill level; other layouts fall back to soft user
      // totals built from the exact allocation fractions.
      std::vector<double> totals(num_users, 0.0);
      std::vector<int> common_streams;
      bool simple = true;
      for (int s = 0; s < num_streams; ++s) {
        const auto& subset = layout.streams[s].subset;
        if (subset.size() == 1) {
          totals[subset[0]] += rate[s][subset[0]];
        } else if (static_cast<int>(subset.size()) == num_users) {
          common_streams.push_back(s);
        } else {
          simple = false;
          break;
        }
      }
      if (!simple) {
        const auto& f = alloc_fractions();
        std::vector<double> soft_totals(num_users, 0.0);
        for (int k = 0; k < num_users; ++k) {
          for (int s = 0; s < num_streams; ++s) {
            soft_totals[k] += f[s][k] * soft[s].value;
          }
        }
        SoftMin sm = soft_min(soft_totals, temperature);
        value = sm.value;
        for (int s = 0; s < num_streams; ++s) {
          double coeff = 0.0;
          for (int k = 0; k < num_users; ++k) coeff += sm.weights[k] * f[s][k];
          if (coeff == 0.0) continue;
          for (int u : layout.streams[s].subset) {
            g[s][u] += coeff * soft_weight(s, u);
          }
        }
        break;
      }
      double common = 0.0;
      for (int s : common_streams) common += soft[s].value;
      if (common_streams.empty() || num_users == 1) {
        SoftMin sm = soft_min(totals, temperature);
        value = sm.value + common;
        for (int k = 0; k < num_users; ++k) {
          int ps = layout.private_stream_of(k);
          if (ps >= 0) g[ps][k] += sm.weights[k];
        }
        for (int s : common_streams) {
          for (int k : layout.streams[s].subset) g[s][k] += soft_weight(s, k);
        }
      } else {
        WaterFill wf = water_fill_level(totals, common);
        value = wf.level;
        double share = 1.0 / static_cast<double>(wf.active.size());
        for (int s : common_streams) {
          for (int k : layout.streams[s].subset) {
            g[s][k] += share * soft_weight(s, k);
          }
        }
        for (int k : wf.active) {
          int ps = layout.private_stream_of(k);
          if (ps >= 0) g[ps][k] += share;
        }
      }
      break;
    }
  }

  if (!metric.qos.empty() && penalty_weight > 0.0) {
    // Soft user totals reuse the exact allocation fractions at this point;
    // the fractions are held fixed for the gradient.
    const auto& f = alloc_fractions();
    for (std::size_t k = 0; k < metric.qos.size() &&
                            k < static_cast<std::size_t>(num_users); ++k) {
      double tot = 0.0;
      for (int s = 0; s < num_streams; ++s) tot += f[s][k] * soft[s].value;
      double gap = metric.qos[k] - tot;
      if (gap <= 0.0) continue;
      value -= penalty_weight * gap * gap;
      for (int s = 0; s < num_streams; ++s) {
        if (f[s][k] == 0.0) continue;
        double coeff = 2.0 * penalty_weight * gap * f[s][k];
        for (int u : layout.streams[s].subset) {
          g[s][u] += coeff * soft_weight(s, u);
        }
      }
    }
  }

  SurrogateEval out;
  out.value = value;
  if (!want_grad) return out;

  out.grad.assign(num_streams, CVec::Zero(m));
  for (int s = 0; s < num_streams; ++s) {
    for (int k : layout.streams[s].subset) {
      if (g[s][k] == 0.0) continue;
      double c_total = g[s][k] / (kLn2 * total[s][k]);
      out.grad[s] += (c_total * inner[s][k]) * h[k];
      double c_noise = g[s][k] * (1.0 / total[s][k] - 1.0 / noise[s][k]) / kLn2;
      for (int j : isets[s][k]) {
        out.grad[j] += (c_noise * inner[j][k]) * h[k];
      }
    }
  }
  if (ee_trace_coeff != 0.0) {
    for (int s = 0; s < num_streams; ++s) {
      out.grad[s] += ee_trace_coeff * precoders[s];
    }
  }
  return out;
}

}  // namespace

double surrogate_objective(const ChannelSet& ch, const StreamLayout& layout,
                           const std::vector<CVec>& precoders,
                           const Metric& metric, double temperature,
                           double penalty_weight) {
  return surrogate_eval(ch, layout, precoders, metric, temperature,
                        penalty_weight, false)
      .value;
}

std::vector<CVec> surrogate_gradient(const ChannelSet& ch,
                                     const StreamLayout& layout,
                                     const std::vector<CVec>& precoders,
                                     const Metric& metric, double temperature,
                                     double penalty_weight) {
  return surrogate_eval(ch, layout, precoders, metric, temperature,
                        penalty_weight, true)
      .grad;
}

// ---------------------------------------------------------------------------
// Refinement tier
// ---------------------------------------------------------------------------

namespace {

void project_power_ball(std::vector<CVec>& precoders, double budget) {
  double power = 0.0;
  for (const auto& p : precoders) power += p.squaredNorm();
  if (power > budget) {
    double scale = std::sqrt(budget / power);
    for (auto& p : precoders) p *= scale;
  }
}

std::vector<CVec> unpack(const PrecoderSet& pre) {
  std::vector<CVec> out;
  for (const auto& p : pre.precoders) out.push_back(p.col(0));
  return out;
}

}  // namespace

OptResult optimize_precoders_refine(const ChannelSet& ch,
                                    const StreamLayout& layout,
                                    const Metric& metric,
                                    const PrecoderSet& init, int iters,
                                    double tol, const OptimizerConfig& cfg) {
  require_scalar_streams(ch, layout, "optimize_precoders_refine");
  const double budget = init.power_budget;
  if (budget <= 0.0) {
    throw std::invalid_argument("optimize_precoders_refine: power budget <= 0");
  }
  ChannelSet design = design_view(ch);

  auto objective_on = [&](const ChannelSet& which, const std::vector<CVec>& p,
                          RateReport* report_out) {
    PrecoderSet ps = pack(p, budget);
    RateReport report = evaluate_rates(which, layout, ps, metric);
    double v = evaluate_metric(report, ps, metric);
    if (report_out) *report_out = std::move(report);
    return v;
  };

  std::vector<CVec> init_x = unpack(init);
  project_power_ball(init_x, budget);

  // Small deterministic jitter lets the ascent leave exact-zero streams the
  // grid may have produced; the fallback below keeps the guarantee.
  std::vector<CVec> x = init_x;
  {
    Rng rng = Rng::split(cfg.seed, 0x5eed);
    double scale = 1e-3 * std::sqrt(budget / std::max<std::size_t>(1, x.size()));
    for (auto& p : x) {
      for (int i = 0; i < p.rows(); ++i) p(i) += scale * rng.cnormal();
    }
    project_power_ball(x, budget);
  }

  double temperature = cfg.soft_min_temp0;
  double penalty = metric.qos.empty() ? 0.0 : cfg.penalty0;
  double step = 1.0;

  std::vector<CVec> best_x = x;
  double best_design = objective_on(design, x, nullptr);
  {
    double init_design = objective_on(design, init_x, nullptr);
    if (init_design > best_design) {
      best_design = init_design;
      best_x = init_x;
    }
  }

  OptResult out;
  out.trace.push_back(best_design);

  int stall = 0;
  for (int it = 0; it < iters; ++it) {
    if (it > 0 && it % 50 == 0) {
      temperature = std::max(temperature * 0.5, cfg.soft_min_temp_min);
    }
    SurrogateEval cur =
        surrogate_eval(design, layout, x, metric, temperature, penalty, true);
    double grad_norm2 = 0.0;
    for (const auto& gvec : cur.grad) grad_norm2 += gvec.squaredNorm();

    if (grad_norm2 > 1e-24) {
      double s = step;
      bool accepted = false;
      for (int trial = 0; trial < 40; ++trial) {
        std::vector<CVec> cand = x;
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += s * cur.grad[i];
        project_power_ball(cand, budget);
        double f1 = surrogate_objective(design, layout, cand, metric,
                                        temperature, penalty);
        if (f1 > cur.value + 1e-15 * (1.0 + std::abs(cur.value))) {
          x = std::move(cand);
          step = std::min(s * 2.0, 1e3);
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      if (!accepted) step = std::max(step * 0.25, 1e-12);
    }

    RateReport design_report;
    double design_value = objective_on(design, x, &design_report);
    double prev_best = best_design;
    if (design_value > best_design) {
      best_design = design_value;
      best_x = x;
    }
    out.trace.push_back(best_design);

    if (!metric.qos.empty() && it % 25 == 24 &&
        !qos_feasible(design_report, metric)) {
      penalty = std::min(penalty * 2.0, 1e9);
    }
    if (best_design - prev_best < tol) {
      ++stall;
    } else {
      stall = 0;
    }
    if (stall >= 30 && temperature <= cfg.soft_min_temp_min * (1.0 + 1e-12)) break;
  }

  // Fallback contract: never worse than the starting point on the channels
  // the result is reported against.
  RateReport best_report, init_report;
  double best_true = objective_on(ch, best_x, &best_report);
  double init_true = objective_on(ch, init_x, &init_report);
  if (init_true > best_true) {
    best_x = init_x;
    best_true = init_true;
    best_report = std::move(init_report);
  }
  out.precoders = pack(best_x, budget);
  out.report = std::move(best_report);
  out.objective = best_true;
  out.feasible = qos_feasible(out.report, metric);
  return out;
}

// ---------------------------------------------------------------------------
// Per-scheme driver
// ---------------------------------------------------------------------------

OptResult optimize_scheme(const ChannelSet& ch, SchemeKind kind,
                          const LayoutOptions& options, const Metric& metric,
                          double power, const OptimizerConfig& cfg) {
  const int users = ch.num_users();
  const int m = ch.tx_antennas;
  LayoutOptions opts = options;
  if (kind == SchemeKind::NOMA && opts.noma_order.empty()) {
    // strongest estimate first, ties by index
    std::vector<int> order(users);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return ch.users[a].estimate.squaredNorm() > ch.users[b].estimate.squaredNorm();
    });
    opts.noma_order = order;
  }
  StreamLayout layout = build_layout(kind, users, std::vector<int>(users, 1), opts);

  OptResult grid =
      optimize_powers_fixed_directions(ch, layout, metric, power, cfg.grid_points);
  if (cfg.tier == OptimizerConfig::Tier::Grid) return grid;

  std::vector<PrecoderSet> starts = {grid.precoders};
  if (kind == SchemeKind::OneLayerRS && users == 2) {
    // Multi-start from the embedded SDMA and NOMA optima: both are exact
    // specializations of the 1-layer split, so refinement starts at least as
    // good as either baseline.
    OptResult sdma = optimize_scheme(ch, SchemeKind::SDMA, {}, metric, power, cfg);
    PrecoderSet from_sdma;
    from_sdma.power_budget = power;
    from_sdma.precoders = {CMat::Zero(m, 1), sdma.precoders.precoders[0],
                           sdma.precoders.precoders[1]};
    starts.push_back(std::move(from_sdma));

    OptResult noma = optimize_scheme(ch, SchemeKind::NOMA, {}, metric, power, cfg);
    StreamLayout noma_layout =
        build_layout(SchemeKind::NOMA, 2, {1, 1},
                     [&] {
                       LayoutOptions o;
                       o.noma_order =
                           ch.users[0].estimate.squaredNorm() >=
                                   ch.users[1].estimate.squaredNorm()
                               ? std::vector<int>{0, 1}
                               : std::vector<int>{1, 0};
                       return o;
                     }());
    int strong = noma_layout.noma_order[0];
    PrecoderSet from_noma;
    from_noma.power_budget = power;
    // chain stream 0 carries the strong user's message, stream 1 (decoded by
    // both) becomes the common layer; the weak private is switched off
    from_noma.precoders = {noma.precoders.precoders[1], CMat(), CMat()};
    from_noma.precoders[1 + strong] = noma.precoders.precoders[0];
    from_noma.precoders[1 + (1 - strong)] = CMat::Zero(m, 1);
    starts.push_back(std::move(from_noma));
  }

  OptResult best;
  bool have = false;
  for (const auto& start : starts) {
    OptResult r = optimize_precoders_refine(ch, layout, metric, start,
                                            cfg.iters, cfg.tol, cfg);
    if (!have || r.objective > best.objective) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Ergodic averaging and rate regions
// ---------------------------------------------------------------------------

ErgodicReport ergodic_average(const DownlinkScenario& scenario, int samples,
                              std::uint64_t base_seed) {
  if (samples < 1) throw std::invalid_argument("ergodic_average: samples < 1");
  const int users = static_cast<int>(scenario.variances.size());
  std::vector<double> sum_user(users, 0.0), sum_sq_user(users, 0.0);
  double sum_obj = 0.0, sum_sq_obj = 0.0;

  for (int i = 0; i < samples; ++i) {
    std::uint64_t seed = Rng::derive(base_seed, static_cast<std::uint64_t>(i));
    ChannelSet ch = gen_rayleigh(seed, scenario.tx, std::vector<int>(users, 1),
                                 scenario.variances);
    if (scenario.imperfect_csit) {
      ch = apply_csit_error(ch, scenario.alpha_exponent, scenario.power, seed);
    }
    OptResult r = optimize_scheme(ch, scenario.kind, scenario.layout_options,
                                  scenario.metric, scenario.power, scenario.opt);
    for (int k = 0; k < users; ++k) {
      sum_user[k] += r.report.user_total[k];
      sum_sq_user[k] += r.report.user_total[k] * r.report.user_total[k];
    }
    sum_obj += r.objective;
    sum_sq_obj += r.objective * r.objective;
  }

  auto stderr_of = [samples](double sum, double sum_sq) {
    if (samples < 2) return 0.0;
    double mean = sum / samples;
    double var = (sum_sq - samples * mean * mean) / (samples - 1);
    return std::sqrt(std::max(0.0, var) / samples);
  };
  ErgodicReport out;
  out.samples = samples;
  out.mean_objective = sum_obj / samples;
  out.stderr_objective = stderr_of(sum_obj, sum_sq_obj);
  for (int k = 0; k < users; ++k) {
    out.mean_user_total.push_back(sum_user[k] / samples);
    out.stderr_user_total.push_back(stderr_of(sum_user[k], sum_sq_user[k]));
  }
  return out;
}

std::vector<std::pair<double, double>> rate_region_boundary(
    const DownlinkScenario& scenario, int n_points, int samples,
    std::uint64_t base_seed) {
  if (scenario.variances.size() != 2) {
    throw std::invalid_argument("rate_region_boundary: two users only");
  }
  if (n_points < 1) throw std::invalid_argument("rate_region_boundary: n_points < 1");

  std::vector<std::pair<double, double>> points;
  for (int i = 0; i < n_points; ++i) {
    double x = n_points == 1 ? 0.5
                             : static_cast<double>(i) / (n_points - 1);
    double ratio = std::pow(10.0, -3.0 + 6.0 * x);  // u1/u2 in [1e-3, 1e3]
    DownlinkScenario s = scenario;
    s.metric = Metric::wsr({ratio, 1.0});
    s.metric.qos = scenario.metric.qos;
    ErgodicReport rep = ergodic_average(s, samples, base_seed);
    points.emplace_back(rep.mean_user_total[0], rep.mean_user_total[1]);
  }
  // Pareto filter: drop points dominated by another point.
  std::vector<std::pair<double, double>> frontier;
  for (const auto& p : points) {
    bool dominated = false;
    for (const auto& q : points) {
      if (q.first >= p.first && q.second >= p.second &&
          (q.first > p.first || q.second > p.second)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) frontier.push_back(p);
  }
  std::sort(frontier.begin(), frontier.end());
  frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
  return frontier;
}

}  // namespace rsma
