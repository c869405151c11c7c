#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsma/types.hpp"

namespace rsma {

// Two-user symmetric interference channel: direct gain h_d, cross gain h_c,
// per-transmitter power budget P. Noise variance is 1 throughout.
struct IcChannel {
  Complex h_d;
  Complex h_c;
  double power = 0.0;

  double hd2() const { return std::norm(h_d); }
  double hc2() const { return std::norm(h_c); }
};

struct ChannelUser {
  int rx_antennas = 1;
  CMat true_channel;  // M x N, transmitter dimension as rows
  CMat estimate;      // M x N
  double error_variance = 0.0;  // per-entry variance of true - estimate
  double variance = 1.0;        // per-entry variance of the true channel
};

struct ChannelSet {
  int tx_antennas = 1;
  std::vector<ChannelUser> users;

  int num_users() const { return static_cast<int>(users.size()); }
};

// K x K grid of M x N links, links[k][j] = channel from transmitter j to user k.
struct MultiCellChannelSet {
  int cells = 0;
  std::vector<std::vector<CMat>> links;
};

struct CsitSample {
  int index = 0;
  std::uint64_t seed = 0;
  ChannelSet channels;
};

// i.i.d. circularly-symmetric complex Gaussian channels, per-user entry
// variance given by `variances`. Perfect CSIT: estimate == true channel.
ChannelSet gen_rayleigh(std::uint64_t seed, int tx,
                        const std::vector<int>& rx_list,
                        const std::vector<double>& variances);

// Split each user channel into estimate + error with per-entry error variance
// sigma_k^2 * power^alpha_exponent. Estimate and error are resampled jointly,
// so the sum reproduces the marginal statistics of the original channel.
ChannelSet apply_csit_error(const ChannelSet& ch, double alpha_exponent,
                            double power, std::uint64_t seed);

// Fixed two-user geometry: h1 = (1/sqrt 2)[1,1]^H, h2 = (g/sqrt 2)[1,e^{j theta}]^H
// with g = 10^(gamma_db/20). Perfect CSIT.
ChannelSet geometry_2user(double gamma_db, double theta, int tx = 2);

MultiCellChannelSet gen_multicell(std::uint64_t seed, int cells, int tx, int rx,
                                  double direct_variance, double cross_variance);

std::string channel_to_json(const ChannelSet& ch);
ChannelSet channel_from_json(const std::string& text);

}  // namespace rsma
