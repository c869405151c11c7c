#include "rsma/channel.hpp"

#include <json.hpp>
#include <stdexcept>

#include "rsma/rng.hpp"

namespace rsma {

namespace {

CMat sample_matrix(Rng& rng, int rows, int cols, double variance) {
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.cnormal(variance);
    }
  }
  return m;
}

}  // namespace

ChannelSet gen_rayleigh(std::uint64_t seed, int tx,
                        const std::vector<int>& rx_list,
                        const std::vector<double>& variances) {
  if (tx < 1) throw std::invalid_argument("gen_rayleigh: tx must be >= 1");
  if (rx_list.empty()) throw std::invalid_argument("gen_rayleigh: rx_list empty");
  if (variances.size() != rx_list.size()) {
    throw std::invalid_argument("gen_rayleigh: variances/rx_list length mismatch");
  }
  ChannelSet out;
  out.tx_antennas = tx;
  for (std::size_t k = 0; k < rx_list.size(); ++k) {
    if (rx_list[k] < 1) throw std::invalid_argument("gen_rayleigh: rx must be >= 1");
    if (!(variances[k] > 0.0)) {
      throw std::invalid_argument("gen_rayleigh: variance must be positive");
    }
    Rng rng = Rng::split(seed, k);
    ChannelUser u;
    u.rx_antennas = rx_list[k];
    u.variance = variances[k];
    u.true_channel = sample_matrix(rng, tx, rx_list[k], variances[k]);
    u.estimate = u.true_channel;
    u.error_variance = 0.0;
    out.users.push_back(std::move(u));
  }
  return out;
}

ChannelSet apply_csit_error(const ChannelSet& ch, double alpha_exponent,
                            double power, std::uint64_t seed) {
  if (!(power > 0.0)) throw std::invalid_argument("apply_csit_error: power must be > 0");
  for (const auto& u : ch.users) {
    if (u.error_variance != 0.0) {
      throw std::invalid_argument("apply_csit_error: input already has CSIT error");
    }
  }
  ChannelSet out;
  out.tx_antennas = ch.tx_antennas;
  for (std::size_t k = 0; k < ch.users.size(); ++k) {
    const auto& in = ch.users[k];
    double err_var = in.variance * std::pow(power, alpha_exponent);
    if (err_var > in.variance) {
      throw std::invalid_argument(
          "apply_csit_error: error variance exceeds channel variance");
    }
    Rng rng = Rng::split(Rng::derive(seed, 0xc0ffee), k);
    ChannelUser u;
    u.rx_antennas = in.rx_antennas;
    u.variance = in.variance;
    u.error_variance = err_var;
    u.estimate = sample_matrix(rng, ch.tx_antennas, in.rx_antennas,
                               in.variance - err_var);
    CMat err = sample_matrix(rng, ch.tx_antennas, in.rx_antennas, err_var);
    u.true_channel = u.estimate + err;
    out.users.push_back(std::move(u));
  }
  return out;
}

ChannelSet geometry_2user(double gamma_db, double theta, int tx) {
  if (tx != 2) throw std::invalid_argument("geometry_2user: tx must be 2");
  if (theta < 0.0) throw std::invalid_argument("geometry_2user: theta must be >= 0");
  double g = std::pow(10.0, gamma_db / 20.0);
  double s = 1.0 / std::sqrt(2.0);
  ChannelSet out;
  out.tx_antennas = 2;
  ChannelUser u1;
  u1.rx_antennas = 1;
  u1.true_channel = CMat(2, 1);
  u1.true_channel << Complex(s, 0.0), Complex(s, 0.0);
  u1.estimate = u1.true_channel;
  ChannelUser u2;
  u2.rx_antennas = 1;
  u2.true_channel = CMat(2, 1);
  u2.true_channel << Complex(g * s, 0.0), g * s * std::exp(Complex(0.0, -theta));
  u2.estimate = u2.true_channel;
  out.users = {u1, u2};
  return out;
}

MultiCellChannelSet gen_multicell(std::uint64_t seed, int cells, int tx, int rx,
                                  double direct_variance, double cross_variance) {
  if (cells < 1 || tx < 1 || rx < 1) {
    throw std::invalid_argument("gen_multicell: bad dimensions");
  }
  MultiCellChannelSet out;
  out.cells = cells;
  out.links.resize(cells);
  for (int k = 0; k < cells; ++k) {
    out.links[k].resize(cells);
    for (int j = 0; j < cells; ++j) {
      Rng rng = Rng::split(seed, static_cast<std::uint64_t>(k) * cells + j);
      double var = (k == j) ? direct_variance : cross_variance;
      out.links[k][j] = sample_matrix(rng, tx, rx, var);
    }
  }
  return out;
}

namespace {

nlohmann::json matrix_to_json(const CMat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back({{"re", m(r, c).real()}, {"im", m(r, c).imag()}});
    }
    rows.push_back(row);
  }
  return rows;
}

CMat matrix_from_json(const nlohmann::json& j) {
  int rows = static_cast<int>(j.size());
  int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = Complex(j[r][c]["re"].get<double>(), j[r][c]["im"].get<double>());
    }
  }
  return m;
}

}  // namespace

std::string channel_to_json(const ChannelSet& ch) {
  nlohmann::json j;
  j["tx"] = ch.tx_antennas;
  j["users"] = nlohmann::json::array();
  for (const auto& u : ch.users) {
    j["users"].push_back({{"rx", u.rx_antennas},
                          {"true", matrix_to_json(u.true_channel)},
                          {"estimate", matrix_to_json(u.estimate)},
                          {"err_var", u.error_variance},
                          {"var", u.variance}});
  }
  return j.dump();
}

ChannelSet channel_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ChannelSet ch;
  ch.tx_antennas = j.at("tx").get<int>();
  for (const auto& ju : j.at("users")) {
    ChannelUser u;
    u.rx_antennas = ju.at("rx").get<int>();
    u.true_channel = matrix_from_json(ju.at("true"));
    u.estimate = matrix_from_json(ju.at("estimate"));
    u.error_variance = ju.at("err_var").get<double>();
    u.variance = ju.value("var", 1.0);
    ch.users.push_back(std::move(u));
  }
  return ch;
}

}  // namespace rsma
