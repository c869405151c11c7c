#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "rsma/channel.hpp"
#include "rsma/rng.hpp"

using namespace rsma;

TEST_CASE("rng streams are deterministic and splittable") {
  CHECK(Rng::derive(42, 7) == Rng::derive(42, 7));
  CHECK(Rng::derive(42, 7) != Rng::derive(42, 8));
  CHECK(Rng::derive(42, 7) != Rng::derive(43, 7));

  Rng a = Rng::split(42, 3);
  Rng b = Rng::split(42, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // uniform stays in (0, 1]
  Rng u(123);
  for (int i = 0; i < 10000; ++i) {
    double x = u.uniform();
    CHECK(x > 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("complex normal samples have the requested variance") {
  Rng rng(7);
  const int n = 20000;
  double sum2 = 0.0;
  std::complex<double> mean = 0.0;
  for (int i = 0; i < n; ++i) {
    auto z = rng.cnormal(2.0);
    sum2 += std::norm(z);
    mean += z;
  }
  CHECK(sum2 / n == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::abs(mean) / n < 0.05);
}

TEST_CASE("gen_rayleigh is reproducible and seed-sensitive") {
  ChannelSet a = gen_rayleigh(42, 4, {1, 2}, {1.0, 0.5});
  ChannelSet b = gen_rayleigh(42, 4, {1, 2}, {1.0, 0.5});
  ChannelSet c = gen_rayleigh(43, 4, {1, 2}, {1.0, 0.5});

  REQUIRE(a.num_users() == 2);
  CHECK(a.tx_antennas == 4);
  CHECK(a.users[1].true_channel.rows() == 4);
  CHECK(a.users[1].true_channel.cols() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(a.users[k].true_channel == b.users[k].true_channel);
    CHECK(a.users[k].estimate == a.users[k].true_channel);  // perfect CSIT
    CHECK(a.users[k].error_variance == 0.0);
  }
  CHECK(a.users[0].true_channel != c.users[0].true_channel);
}

TEST_CASE("gen_rayleigh entries match the requested per-user variance") {
  const int samples = 2500;  // x4 entries = 10^4 scalar draws
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) {
    ChannelSet ch = gen_rayleigh(1000 + i, 4, {1}, {0.7});
    acc += ch.users[0].true_channel.squaredNorm();
  }
  double mean_entry = acc / (samples * 4.0);
  CHECK(mean_entry == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("csit error model: variances, decomposition, and guards") {
  const double power = 100.0;
  const double alpha = -0.6;
  const double expected_err = std::pow(power, alpha);  // variance 1 channels
  CHECK(expected_err == doctest::Approx(0.063095734448).epsilon(1e-9));

  ChannelSet perfect = gen_rayleigh(5, 3, {1, 1}, {1.0, 1.0});
  ChannelSet noisy = apply_csit_error(perfect, alpha, power, 11);
  for (const auto& u : noisy.users) {
    CHECK(u.error_variance == doctest::Approx(expected_err).epsilon(1e-12));
    CHECK(u.variance == 1.0);
    CHECK((u.true_channel - u.estimate).allFinite());
  }
  // reproducible
  ChannelSet again = apply_csit_error(perfect, alpha, power, 11);
  CHECK(noisy.users[0].estimate == again.users[0].estimate);
  CHECK(noisy.users[0].true_channel == again.users[0].true_channel);

  // statistics: estimate variance sigma^2 - sigma_e^2, error variance
  // sigma_e^2, true-channel variance sigma^2 (within 5% over 10^4 draws)
  const int samples = 1250;  // x 3 tx x 2 users ... ~7.5k entries per stat
  double est2 = 0.0, err2 = 0.0, true2 = 0.0;
  long n_entries = 0;
  for (int i = 0; i < samples; ++i) {
    ChannelSet base = gen_rayleigh(40000 + i, 3, {1, 1}, {1.0, 1.0});
    ChannelSet ch = apply_csit_error(base, alpha, power, 90000 + i);
    for (const auto& u : ch.users) {
      est2 += u.estimate.squaredNorm();
      err2 += (u.true_channel - u.estimate).squaredNorm();
      true2 += u.true_channel.squaredNorm();
      n_entries += u.estimate.size();
    }
  }
  CHECK(est2 / n_entries == doctest::Approx(1.0 - expected_err).epsilon(0.05));
  CHECK(err2 / n_entries == doctest::Approx(expected_err).epsilon(0.05));
  CHECK(true2 / n_entries == doctest::Approx(1.0).epsilon(0.05));

  // error variance above the channel variance is rejected
  CHECK_THROWS(apply_csit_error(perfect, +0.6, power, 1));
  // double application is rejected
  CHECK_THROWS(apply_csit_error(noisy, alpha, power, 1));
}

TEST_CASE("two-user geometry: alignment, orthogonality, gain scaling") {
  auto correlation = [](const ChannelSet& ch) {
    const CMat& h1 = ch.users[0].true_channel;
    const CMat& h2 = ch.users[1].true_channel;
    std::complex<double> ip = (h1.adjoint() * h2)(0, 0);
    return std::norm(ip) / (h1.squaredNorm() * h2.squaredNorm());
  };

  ChannelSet aligned = geometry_2user(0.0, 0.0);
  CHECK(correlation(aligned) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((aligned.users[0].true_channel - aligned.users[1].true_channel).norm() <
        1e-14);

  ChannelSet ortho = geometry_2user(0.0, M_PI);
  CHECK(correlation(ortho) < 1e-24);

  ChannelSet weak = geometry_2user(-20.0, 1.0);
  CHECK(weak.users[0].true_channel.squaredNorm() ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(weak.users[1].true_channel.squaredNorm() ==
        doctest::Approx(0.01).epsilon(1e-12));

  CHECK_THROWS(geometry_2user(0.0, 0.5, 3));
}

TEST_CASE("multicell grid: shape, variances, reproducibility") {
  MultiCellChannelSet mc = gen_multicell(9, 3, 4, 2, 1.0, 0.1);
  REQUIRE(mc.cells == 3);
  REQUIRE(mc.links.size() == 3);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(mc.links[k].size() == 3);
    for (int j = 0; j < 3; ++j) {
      CHECK(mc.links[k][j].rows() == 4);
      CHECK(mc.links[k][j].cols() == 2);
    }
  }
  MultiCellChannelSet again = gen_multicell(9, 3, 4, 2, 1.0, 0.1);
  CHECK(mc.links[1][2] == again.links[1][2]);

  // statistical check on direct vs cross variances
  double direct = 0.0, cross = 0.0;
  long nd = 0, nc = 0;
  for (int i = 0; i < 400; ++i) {
    MultiCellChannelSet m = gen_multicell(5000 + i, 2, 3, 1, 1.0, 0.1);
    for (int k = 0; k < 2; ++k) {
      for (int j = 0; j < 2; ++j) {
        double s = m.links[k][j].squaredNorm();
        if (k == j) {
          direct += s;
          nd += m.links[k][j].size();
        } else {
          cross += s;
          nc += m.links[k][j].size();
        }
      }
    }
  }
  CHECK(direct / nd == doctest::Approx(1.0).epsilon(0.05));
  CHECK(cross / nc == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("channel json round trip") {
  ChannelSet ch = apply_csit_error(gen_rayleigh(3, 3, {1, 2}, {1.0, 0.4}),
                                   -0.6, 50.0, 77);
  ChannelSet back = channel_from_json(channel_to_json(ch));
  REQUIRE(back.num_users() == ch.num_users());
  CHECK(back.tx_antennas == ch.tx_antennas);
  for (int k = 0; k < ch.num_users(); ++k) {
    CHECK((back.users[k].true_channel - ch.users[k].true_channel).norm() <
          1e-15);
    CHECK((back.users[k].estimate - ch.users[k].estimate).norm() < 1e-15);
    CHECK(back.users[k].error_variance ==
          doctest::Approx(ch.users[k].error_variance).epsilon(1e-15));
    CHECK(back.users[k].rx_antennas == ch.users[k].rx_antennas);
  }
}
