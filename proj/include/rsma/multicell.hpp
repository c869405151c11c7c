#pragma once

#include <vector>

#include "rsma/channel.hpp"
#include "rsma/types.hpp"

namespace rsma {

// Coordinated multi-cell configuration: each cell k sends one common and one
// private stream vector to its user; every user decodes all cells' common
// streams under its own order pi_k.
struct CoordConfig {
  std::vector<CMat> common_precoders;   // per cell, M x Qc
  std::vector<CMat> private_precoders;  // per cell, M x Qp
  std::vector<double> power_budgets;    // per cell
  // Per-user permutation of cells; empty = descending received common power.
  std::vector<std::vector<int>> decoding_orders;
};

struct CoordRates {
  std::vector<std::vector<double>> common_decode;  // [cell][user]
  std::vector<double> common_rate;                 // min over users
  std::vector<double> private_rate;                // at the served user
  std::vector<double> user_total;
};

CoordRates rate_coordinated(const MultiCellChannelSet& ch, const CoordConfig& cfg);

}  // namespace rsma
