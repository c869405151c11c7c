#include "rsma/multicell.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rsma {

namespace {

void validate(const MultiCellChannelSet& ch, const CoordConfig& cfg) {
  const int cells = ch.cells;
  if (static_cast<int>(ch.links.size()) != cells) {
    throw std::invalid_argument("rate_coordinated: link grid not K x K");
  }
  for (const auto& row : ch.links) {
    if (static_cast<int>(row.size()) != cells) {
      throw std::invalid_argument("rate_coordinated: link grid not K x K");
    }
  }
  if (static_cast<int>(cfg.common_precoders.size()) != cells ||
      static_cast<int>(cfg.private_precoders.size()) != cells ||
      static_cast<int>(cfg.power_budgets.size()) != cells) {
    throw std::invalid_argument("rate_coordinated: per-cell config size mismatch");
  }
  for (int k = 0; k < cells; ++k) {
    double power = cfg.common_precoders[k].squaredNorm() +
                   cfg.private_precoders[k].squaredNorm();
    if (power > cfg.power_budgets[k] + 1e-9) {
      throw std::invalid_argument("rate_coordinated: per-cell power budget exceeded");
    }
    if (cfg.common_precoders[k].rows() != ch.links[0][0].rows() ||
        cfg.private_precoders[k].rows() != ch.links[0][0].rows()) {
      throw std::invalid_argument("rate_coordinated: precoder row mismatch");
    }
  }
}

std::vector<int> order_for_user(const MultiCellChannelSet& ch,
                                const CoordConfig& cfg, int user) {
  if (!cfg.decoding_orders.empty()) {
    const auto& order = cfg.decoding_orders.at(user);
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < ch.cells; ++i) {
      if (sorted[i] != i) {
        throw std::invalid_argument("rate_coordinated: bad decoding order");
      }
    }
    return order;
  }
  // default: descending received common-stream power
  std::vector<int> order(ch.cells);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> power(ch.cells);
  for (int j = 0; j < ch.cells; ++j) {
    power[j] = (ch.links[user][j].adjoint() * cfg.common_precoders[j]).squaredNorm();
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return power[a] > power[b]; });
  return order;
}

}  // namespace

CoordRates rate_coordinated(const MultiCellChannelSet& ch, const CoordConfig& cfg) {
  validate(ch, cfg);
  const int cells = ch.cells;
  const int n = static_cast<int>(ch.links[0][0].cols());

  CoordRates out;
  out.common_decode.assign(cells, std::vector<double>(cells, 0.0));
  out.common_rate.assign(cells, std::numeric_limits<double>::infinity());
  out.private_rate.assign(cells, 0.0);
  out.user_total.assign(cells, 0.0);

  for (int k = 0; k < cells; ++k) {
    // All private streams interfere with every common-stream decode at user k.
    CMat private_cov = CMat::Zero(n, n);
    for (int j = 0; j < cells; ++j) {
      CMat e = ch.links[k][j].adjoint() * cfg.private_precoders[j];
      private_cov += e * e.adjoint();
    }
    const std::vector<int> order = order_for_user(ch, cfg, k);
    std::vector<CMat> tail(cells + 1);
    tail[cells] = CMat::Zero(n, n);
    for (int i = cells; i-- > 0;) {
      CMat e = ch.links[k][order[i]].adjoint() * cfg.common_precoders[order[i]];
      tail[i] = tail[i + 1] + e * e.adjoint();
    }
    for (int i = 0; i < cells; ++i) {
      int cell = order[i];
      CMat cov = CMat::Identity(n, n) + tail[i + 1] + private_cov;
      CMat e = ch.links[k][cell].adjoint() * cfg.common_precoders[cell];
      out.common_decode[cell][k] =
          clamp_rate(log2det_i_plus(e.adjoint() * cov.llt().solve(e)));
    }
    // Private stream of user k: all other privates interfere.
    CMat own = ch.links[k][k].adjoint() * cfg.private_precoders[k];
    CMat cov = CMat::Identity(n, n) + private_cov - own * own.adjoint();
    out.private_rate[k] =
        clamp_rate(log2det_i_plus(own.adjoint() * cov.llt().solve(own)));
  }

  for (int cell = 0; cell < cells; ++cell) {
    for (int k = 0; k < cells; ++k) {
      out.common_rate[cell] = std::min(out.common_rate[cell], out.common_decode[cell][k]);
    }
  }
  for (int k = 0; k < cells; ++k) {
    out.user_total[k] = out.common_rate[k] + out.private_rate[k];
  }
  return out;
}

}  // namespace rsma
