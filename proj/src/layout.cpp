#include "rsma/layout.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rsma {

bool Stream::decoded_by(int user) const {
  return std::binary_search(subset.begin(), subset.end(), user);
}

std::string Stream::subset_key() const {
  std::string key;
  for (int u : subset) key += std::to_string(u + 1);
  return key;
}

std::vector<int> StreamLayout::default_decode_order(int user) const {
  std::vector<int> order;
  for (int s = 0; s < static_cast<int>(streams.size()); ++s) {
    if (streams[s].decoded_by(user)) order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (streams[a].subset.size() != streams[b].subset.size()) {
      return streams[a].subset.size() > streams[b].subset.size();
    }
    return streams[a].subset < streams[b].subset;
  });
  return order;
}

int StreamLayout::private_stream_of(int user) const {
  for (int s = 0; s < static_cast<int>(streams.size()); ++s) {
    if (streams[s].subset.size() == 1 && streams[s].subset[0] == user) return s;
  }
  return -1;
}

namespace {

Stream make_stream(std::vector<int> subset, int dim, std::vector<int> owners) {
  std::sort(subset.begin(), subset.end());
  std::sort(owners.begin(), owners.end());
  Stream s;
  s.subset = std::move(subset);
  s.dim = dim;
  s.owner_shares = std::move(owners);
  return s;
}

std::vector<int> all_users(int k) {
  std::vector<int> v(k);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void check_permutation(const std::vector<int>& perm, int k, const char* what) {
  if (static_cast<int>(perm.size()) != k) {
    throw std::invalid_argument(std::string(what) + ": wrong length");
  }
  std::vector<bool> seen(k, false);
  for (int u : perm) {
    if (u < 0 || u >= k || seen[u]) {
      throw std::invalid_argument(std::string(what) + ": not a permutation");
    }
    seen[u] = true;
  }
}

void check_groups(const std::vector<std::vector<int>>& groups, int k) {
  std::vector<bool> seen(k, false);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("groups: empty group");
    for (int u : g) {
      if (u < 0 || u >= k || seen[u]) {
        throw std::invalid_argument("groups: not a partition of the users");
      }
      seen[u] = true;
    }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("groups: not a partition of the users");
  }
}

int min_dim(const std::vector<int>& dims, const std::vector<int>& subset) {
  int d = dims[subset.front()];
  for (int u : subset) d = std::min(d, dims[u]);
  return d;
}

// Chain for one NOMA group, strongest user first: the stream carrying user
// order[i]'s message is decoded by order[0..i].
void append_noma_chain(StreamLayout& layout, const std::vector<int>& order,
                       const std::vector<int>& dims) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::vector<int> subset(order.begin(), order.begin() + i + 1);
    layout.streams.push_back(make_stream(subset, dims[order[i]], {order[i]}));
  }
}

}  // namespace

StreamLayout build_layout(SchemeKind kind, int num_users,
                          const std::vector<int>& dims,
                          const LayoutOptions& options) {
  if (num_users < 1) throw std::invalid_argument("build_layout: num_users < 1");
  if (static_cast<int>(dims.size()) != num_users) {
    throw std::invalid_argument("build_layout: dims size mismatch");
  }
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("build_layout: stream dim < 1");
  }
  StreamLayout layout;
  layout.kind = kind;
  layout.num_users = num_users;
  const auto everyone = all_users(num_users);

  switch (kind) {
    case SchemeKind::OneLayerRS:
    case SchemeKind::DPCRS: {
      layout.streams.push_back(
          make_stream(everyone, min_dim(dims, everyone), everyone));
      for (int u = 0; u < num_users; ++u) {
        layout.streams.push_back(make_stream({u}, dims[u], {u}));
      }
      if (kind == SchemeKind::DPCRS) {
        layout.dpc_order = options.dpc_order.empty() ? everyone : options.dpc_order;
        check_permutation(layout.dpc_order, num_users, "dpc_order");
      }
      break;
    }
    case SchemeKind::SDMA: {
      for (int u = 0; u < num_users; ++u) {
        layout.streams.push_back(make_stream({u}, dims[u], {u}));
      }
      break;
    }
    case SchemeKind::NOMA: {
      layout.noma_order = options.noma_order.empty() ? everyone : options.noma_order;
      check_permutation(layout.noma_order, num_users, "noma_order");
      if (options.groups.empty()) {
        append_noma_chain(layout, layout.noma_order, dims);
      } else {
        check_groups(options.groups, num_users);
        layout.groups = options.groups;
        for (const auto& g : layout.groups) {
          // keep the global order within each group
          std::vector<int> order;
          for (int u : layout.noma_order) {
            if (std::find(g.begin(), g.end(), u) != g.end()) order.push_back(u);
          }
          append_noma_chain(layout, order, dims);
        }
      }
      break;
    }
    case SchemeKind::OMA: {
      if (options.oma_user < 0 || options.oma_user >= num_users) {
        throw std::invalid_argument("build_layout: oma_user out of range");
      }
      layout.streams.push_back(
          make_stream({options.oma_user}, dims[options.oma_user], {options.oma_user}));
      break;
    }
    case SchemeKind::Multicast: {
      layout.streams.push_back(
          make_stream(everyone, min_dim(dims, everyone), everyone));
      break;
    }
    case SchemeKind::HRS: {
      if (options.groups.empty()) {
        throw std::invalid_argument("build_layout: HRS requires groups");
      }
      check_groups(options.groups, num_users);
      layout.groups = options.groups;
      layout.streams.push_back(
          make_stream(everyone, min_dim(dims, everyone), everyone));
      for (const auto& g : layout.groups) {
        layout.streams.push_back(make_stream(g, min_dim(dims, g), g));
      }
      for (int u = 0; u < num_users; ++u) {
        layout.streams.push_back(make_stream({u}, dims[u], {u}));
      }
      break;
    }
    case SchemeKind::GRS: {
      std::vector<std::vector<int>> subsets = options.grs_active_subsets;
      if (subsets.empty()) {
        for (int mask = 1; mask < (1 << num_users); ++mask) {
          std::vector<int> subset;
          for (int u = 0; u < num_users; ++u) {
            if (mask & (1 << u)) subset.push_back(u);
          }
          subsets.push_back(subset);
        }
      }
      std::vector<std::vector<int>> seen;
      for (auto subset : subsets) {
        std::sort(subset.begin(), subset.end());
        if (subset.empty() ||
            std::find(seen.begin(), seen.end(), subset) != seen.end()) {
          throw std::invalid_argument("build_layout: bad GRS subset list");
        }
        for (int u : subset) {
          if (u < 0 || u >= num_users) {
            throw std::invalid_argument("build_layout: GRS subset out of range");
          }
        }
        seen.push_back(subset);
        layout.streams.push_back(make_stream(subset, min_dim(dims, subset), subset));
      }
      // largest subsets first, then lexicographic, for a stable stream order
      std::stable_sort(layout.streams.begin(), layout.streams.end(),
                       [](const Stream& a, const Stream& b) {
                         if (a.subset.size() != b.subset.size()) {
                           return a.subset.size() > b.subset.size();
                         }
                         return a.subset < b.subset;
                       });
      break;
    }
  }
  return layout;
}

const char* scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::OneLayerRS: return "1layer_rs";
    case SchemeKind::HRS: return "hrs";
    case SchemeKind::GRS: return "grs";
    case SchemeKind::DPCRS: return "dpcrs";
    case SchemeKind::SDMA: return "sdma";
    case SchemeKind::NOMA: return "noma";
    case SchemeKind::OMA: return "oma";
    case SchemeKind::Multicast: return "multicast";
  }
  return "unknown";
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "1layer_rs" || name == "rs") return SchemeKind::OneLayerRS;
  if (name == "hrs") return SchemeKind::HRS;
  if (name == "grs") return SchemeKind::GRS;
  if (name == "dpcrs") return SchemeKind::DPCRS;
  if (name == "sdma") return SchemeKind::SDMA;
  if (name == "noma") return SchemeKind::NOMA;
  if (name == "oma") return SchemeKind::OMA;
  if (name == "multicast") return SchemeKind::Multicast;
  throw std::invalid_argument("unknown scheme: " + name);
}

}  // namespace rsma
