#pragma once

#include <string>
#include <vector>

namespace rsma {

enum class SchemeKind { OneLayerRS, HRS, GRS, DPCRS, SDMA, NOMA, OMA, Multicast };

// One transmit stream vector: the set of users decoding it, its dimension,
// and the users whose split messages it carries.
struct Stream {
  std::vector<int> subset;        // sorted, 0-based user indices
  int dim = 1;
  std::vector<int> owner_shares;  // sorted, subset of `subset`

  bool decoded_by(int user) const;
  std::string subset_key() const;  // e.g. "123" (1-based, sorted)
};

struct StreamLayout {
  SchemeKind kind = SchemeKind::OneLayerRS;
  int num_users = 0;
  std::vector<Stream> streams;
  std::vector<std::vector<int>> groups;  // HRS (and grouped NOMA)
  std::vector<int> noma_order;           // NOMA: strongest user first
  std::vector<int> dpc_order;            // DPCRS encoding order

  // Streams decoded by `user`, largest subsets first (ties lexicographic),
  // ending with the user's own stream when present.
  std::vector<int> default_decode_order(int user) const;
  int private_stream_of(int user) const;  // -1 if none
};

struct LayoutOptions {
  std::vector<std::vector<int>> groups;              // HRS / grouped NOMA
  std::vector<int> noma_order;                       // NOMA
  std::vector<std::vector<int>> grs_active_subsets;  // GRS; empty = all 2^K - 1
  std::vector<int> dpc_order;                        // DPCRS
  int oma_user = 0;                                  // OMA scheduled user
};

StreamLayout build_layout(SchemeKind kind, int num_users,
                          const std::vector<int>& dims,
                          const LayoutOptions& options = {});

const char* scheme_name(SchemeKind kind);
SchemeKind scheme_from_name(const std::string& name);

}  // namespace rsma
