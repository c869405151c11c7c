#include "rsma/runner.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/ic2.hpp"
#include "rsma/multicell.hpp"
#include "rsma/optimize.hpp"
#include "rsma/rng.hpp"
#include "rsma/uplink.hpp"

namespace rsma {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

json parse_scalar(const std::string& raw) {
  std::string v = trim(raw);
  if (v.empty()) throw std::invalid_argument("config: empty value");
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') &&
      v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  // integer first, then double, else bare string
  {
    std::size_t pos = 0;
    try {
      long long i = std::stoll(v, &pos);
      if (pos == v.size()) return i;
    } catch (...) {
    }
  }
  {
    std::size_t pos = 0;
    try {
      double d = std::stod(v, &pos);
      if (pos == v.size()) return d;
    } catch (...) {
    }
  }
  return v;
}

json parse_value(const std::string& raw) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw std::invalid_argument("config: unterminated array");
    json arr = json::array();
    std::string body = v.substr(1, v.size() - 2);
    std::string item;
    std::istringstream in(body);
    while (std::getline(in, item, ',')) {
      if (trim(item).empty()) continue;
      arr.push_back(parse_scalar(item));
    }
    return arr;
  }
  return parse_scalar(v);
}

}  // namespace

json parse_config_text(const std::string& text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return json::parse(text);
  }
  json root = json::object();
  std::vector<json*> stack = {&root};
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "}") {
      if (stack.size() < 2) {
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unmatched '}'");
      }
      stack.pop_back();
      continue;
    }
    if (line.back() == '{') {
      std::string key = trim(line.substr(0, line.size() - 1));
      if (key.empty()) {
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": block without a name");
      }
      (*stack.back())[key] = json::object();
      stack.push_back(&(*stack.back())[key]);
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    }
    (*stack.back())[key] = parse_value(line.substr(eq + 1));
  }
  if (stack.size() != 1) {
    throw std::invalid_argument("config: unterminated block");
  }
  return root;
}

std::string config_hash_hex(const json& config) {
  std::string s = config.dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

std::string fmt12(double v) {
  if (!std::isfinite(v)) {
    throw std::runtime_error("non-finite value in output");
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CsvFile {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad type for '" + key + "'");
  }
}

std::vector<double> variances_or(const json& cfg, int users) {
  if (cfg.contains("variances")) {
    auto v = get_or<std::vector<double>>(cfg, "variances", {});
    if (static_cast<int>(v.size()) != users) {
      throw std::invalid_argument("config: variances length must equal users");
    }
    return v;
  }
  return std::vector<double>(users, 1.0);
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mtx;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double log_spaced(double lo, double hi, int i, int n) {
  if (n == 1) return std::sqrt(lo * hi);
  double x = static_cast<double>(i) / (n - 1);
  return lo * std::pow(hi / lo, x);
}

double lin_spaced(double lo, double hi, int i, int n) {
  if (n == 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * static_cast<double>(i) / (n - 1);
}

struct SchemeSpec {
  std::string label;
  SchemeKind kind = SchemeKind::OneLayerRS;
  LayoutOptions options;
};

SchemeSpec parse_scheme(const std::string& name, int users) {
  SchemeSpec spec;
  spec.label = name;
  if (name.rfind("noma_g", 0) == 0) {
    int groups = 0;
    try {
      groups = std::stoi(name.substr(6));
    } catch (...) {
      throw std::invalid_argument("config: bad scheme '" + name + "'");
    }
    if (groups < 1 || groups > users) {
      throw std::invalid_argument("config: scheme '" + name +
                                  "' group count out of range");
    }
    spec.kind = SchemeKind::NOMA;
    if (groups > 1) {
      spec.options.groups.assign(groups, {});
      for (int u = 0; u < users; ++u) {
        spec.options.groups[u % groups].push_back(u);
      }
    }
    return spec;
  }
  spec.kind = scheme_from_name(name);
  return spec;
}

OptimizerConfig optimizer_from(const json& cfg, std::uint64_t base_seed) {
  OptimizerConfig oc;
  oc.seed = base_seed;
  if (!cfg.contains("optimizer")) return oc;
  const json& o = cfg.at("optimizer");
  std::string tier = get_or<std::string>(o, "tier", "grid_refine");
  if (tier == "grid") {
    oc.tier = OptimizerConfig::Tier::Grid;
  } else if (tier == "grid_refine") {
    oc.tier = OptimizerConfig::Tier::GridRefine;
  } else {
    throw std::invalid_argument("config: unknown optimizer tier '" + tier + "'");
  }
  oc.grid_points = get_or<int>(o, "grid_points", oc.grid_points);
  oc.iters = get_or<int>(o, "iters", oc.iters);
  oc.tol = get_or<double>(o, "tol", oc.tol);
  oc.soft_min_temp0 = get_or<double>(o, "soft_min_temp0", oc.soft_min_temp0);
  oc.soft_min_temp_min =
      get_or<double>(o, "soft_min_temp_min", oc.soft_min_temp_min);
  oc.penalty0 = get_or<double>(o, "penalty0", oc.penalty0);
  oc.seed = get_or<std::uint64_t>(o, "seed", base_seed);
  return oc;
}

// ---------------------------------------------------------------------------
// Scenario builders
// ---------------------------------------------------------------------------

std::vector<CsvFile> build_ic2_sweep(const json& cfg, int jobs) {
  double snr_db = get_or<double>(cfg, "snr_db", 30.0);
  double ratio_min = get_or<double>(cfg, "ratio_min", 0.1);
  double ratio_max = get_or<double>(cfg, "ratio_max", 100.0);
  int points = get_or<int>(cfg, "points", 200);
  if (points < 1 || ratio_min <= 0.0 || ratio_max < ratio_min) {
    throw std::invalid_argument("config: bad ic2_sweep grid");
  }
  double power = db_to_linear(snr_db);  // P |h_d|^2 with h_d = 1

  CsvFile file;
  file.name = "ic2_sweep.csv";
  file.columns = {"inr_over_snr", "rs", "tin", "decode", "orthogonal", "regime"};
  file.rows.resize(points);
  parallel_for(points, jobs, [&](int i) {
    double ratio = log_spaced(ratio_min, ratio_max, i, points);
    IcChannel ch{Complex(1.0, 0.0), Complex(std::sqrt(ratio), 0.0), power};
    IcOptimum opt = optimize_t(ch);
    IcBaselines base = baseline_rates(ch);
    file.rows[i] = {fmt12(ratio),      fmt12(opt.rate),
                    fmt12(base.tin),   fmt12(base.decode),
                    fmt12(base.orthogonal),
                    regime_name(classify_regime(ch).tag)};
  });
  return {file};
}

DownlinkScenario scenario_base(const json& cfg, int tx, int users,
                               std::uint64_t base_seed) {
  DownlinkScenario s;
  s.tx = tx;
  s.variances = variances_or(cfg, users);
  s.power = db_to_linear(get_or<double>(cfg, "snr_db", 20.0));
  s.imperfect_csit = get_or<bool>(cfg, "imperfect_csit", false);
  s.alpha_exponent = get_or<double>(cfg, "alpha_exponent", -0.6);
  s.opt = optimizer_from(cfg, base_seed);
  return s;
}

std::vector<CsvFile> build_rate_region(const json& cfg, int jobs,
                                       std::uint64_t base_seed) {
  int tx = get_or<int>(cfg, "tx", 4);
  int n_weights = get_or<int>(cfg, "n_weights", 20);
  int samples = get_or<int>(cfg, "samples", 100);
  auto scheme_names = get_or<std::vector<std::string>>(
      cfg, "schemes", {"1layer_rs", "sdma", "noma"});
  if (n_weights < 1 || samples < 1) {
    throw std::invalid_argument("config: bad rate_region grid");
  }
  DownlinkScenario base = scenario_base(cfg, tx, 2, base_seed);
  if (base.variances.size() != 2) {
    throw std::invalid_argument("config: rate_region needs exactly two users");
  }

  std::vector<SchemeSpec> schemes;
  for (const auto& name : scheme_names) schemes.push_back(parse_scheme(name, 2));

  std::vector<CsvFile> files(schemes.size());
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    files[s].name = "rate_region_" + schemes[s].label + ".csv";
    files[s].columns = {"weight_ratio", "r1", "r2", "r1_stderr", "r2_stderr"};
    files[s].rows.resize(n_weights);
  }
  int total = static_cast<int>(schemes.size()) * n_weights;
  parallel_for(total, jobs, [&](int idx) {
    int s = idx / n_weights;
    int w = idx % n_weights;
    double ratio = log_spaced(1e-3, 1e3, w, n_weights);
    DownlinkScenario sc = base;
    sc.kind = schemes[s].kind;
    sc.layout_options = schemes[s].options;
    sc.metric = Metric::wsr({ratio, 1.0});
    ErgodicReport rep = ergodic_average(sc, samples, base_seed);
    files[s].rows[w] = {fmt12(ratio), fmt12(rep.mean_user_total[0]),
                        fmt12(rep.mean_user_total[1]),
                        fmt12(rep.stderr_user_total[0]),
                        fmt12(rep.stderr_user_total[1])};
  });
  return files;
}

std::vector<CsvFile> build_mmf_sweep(const json& cfg, int jobs,
                                     std::uint64_t base_seed) {
  int tx = get_or<int>(cfg, "tx", 5);
  int users = get_or<int>(cfg, "users", 6);
  double snr_min = get_or<double>(cfg, "snr_db_min", 0.0);
  double snr_max = get_or<double>(cfg, "snr_db_max", 30.0);
  int snr_points = get_or<int>(cfg, "snr_points", 7);
  int samples = get_or<int>(cfg, "samples", 100);
  auto scheme_names = get_or<std::vector<std::string>>(
      cfg, "schemes", {"1layer_rs", "sdma", "noma_g1", "noma_g3"});
  if (snr_points < 1 || samples < 1 || snr_max < snr_min) {
    throw std::invalid_argument("config: bad mmf_sweep grid");
  }
  DownlinkScenario base = scenario_base(cfg, tx, users, base_seed);
  base.metric = Metric::mmf();

  std::vector<SchemeSpec> schemes;
  for (const auto& name : scheme_names) {
    schemes.push_back(parse_scheme(name, users));
  }
  std::vector<CsvFile> files(schemes.size());
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    files[s].name = "mmf_sweep_" + schemes[s].label + ".csv";
    files[s].columns = {"snr_db", "mmf", "mmf_stderr"};
    files[s].rows.resize(snr_points);
  }
  int total = static_cast<int>(schemes.size()) * snr_points;
  parallel_for(total, jobs, [&](int idx) {
    int s = idx / snr_points;
    int i = idx % snr_points;
    double snr_db = lin_spaced(snr_min, snr_max, i, snr_points);
    DownlinkScenario sc = base;
    sc.power = db_to_linear(snr_db);
    sc.kind = schemes[s].kind;
    sc.layout_options = schemes[s].options;
    ErgodicReport rep = ergodic_average(sc, samples, base_seed);
    files[s].rows[i] = {fmt12(snr_db), fmt12(rep.mean_objective),
                        fmt12(rep.stderr_objective)};
  });
  return files;
}

std::vector<CsvFile> build_ee_sweep(const json& cfg, int jobs,
                                    std::uint64_t base_seed) {
  int tx = get_or<int>(cfg, "tx", 2);
  int users = get_or<int>(cfg, "users", 2);
  double power_min = get_or<double>(cfg, "power_min", 0.1);
  double power_max = get_or<double>(cfg, "power_max", 100.0);
  int points = get_or<int>(cfg, "points", 20);
  int samples = get_or<int>(cfg, "samples", 100);
  double eta = get_or<double>(cfg, "eta", 0.35);
  double p_dyn_dbm = get_or<double>(cfg, "p_dyn_dbm", 27.0);
  double p_sta_w = get_or<double>(cfg, "p_sta_w", 0.001);
  std::string scheme_name_str = get_or<std::string>(cfg, "scheme", "1layer_rs");
  if (points < 1 || samples < 1 || power_min <= 0.0 || power_max < power_min) {
    throw std::invalid_argument("config: bad ee_sweep grid");
  }
  SchemeSpec scheme = parse_scheme(scheme_name_str, users);
  DownlinkScenario base = scenario_base(cfg, tx, users, base_seed);
  base.kind = scheme.kind;
  base.layout_options = scheme.options;
  base.metric = Metric::ee(eta, dbm_to_watt(p_dyn_dbm), p_sta_w);

  CsvFile file;
  file.name = "ee_sweep_" + scheme.label + ".csv";
  file.columns = {"power", "ee", "ee_stderr", "sum_rate"};
  file.rows.resize(points);
  parallel_for(points, jobs, [&](int i) {
    DownlinkScenario sc = base;
    sc.power = log_spaced(power_min, power_max, i, points);
    ErgodicReport rep = ergodic_average(sc, samples, base_seed);
    double sum_rate = 0.0;
    for (double r : rep.mean_user_total) sum_rate += r;
    file.rows[i] = {fmt12(sc.power), fmt12(rep.mean_objective),
                    fmt12(rep.stderr_objective), fmt12(sum_rate)};
  });
  return {file};
}

std::vector<CsvFile> build_region_map(const json& cfg, int jobs,
                                      std::uint64_t base_seed) {
  double snr_db = get_or<double>(cfg, "snr_db", 20.0);
  double gamma_min = get_or<double>(cfg, "gamma_db_min", -30.0);
  double gamma_max = get_or<double>(cfg, "gamma_db_max", 0.0);
  int gamma_points = get_or<int>(cfg, "gamma_points", 7);
  int theta_points = get_or<int>(cfg, "theta_points", 7);
  if (gamma_points < 1 || theta_points < 1 || gamma_max < gamma_min) {
    throw std::invalid_argument("config: bad region_map grid");
  }
  double power = db_to_linear(snr_db);
  OptimizerConfig oc = optimizer_from(cfg, base_seed);
  oc.tier = OptimizerConfig::Tier::Grid;  // deterministic oracle tier
  Metric metric = Metric::wsr_unit(2);

  CsvFile file;
  file.name = "region_map.csv";
  file.columns = {"gamma_db", "theta", "rho", "common_fraction",
                  "rs", "sdma", "noma"};
  int total = gamma_points * theta_points;
  file.rows.resize(total);
  parallel_for(total, jobs, [&](int idx) {
    int gi = idx / theta_points;
    int ti = idx % theta_points;
    double gamma_db = lin_spaced(gamma_min, gamma_max, gi, gamma_points);
    double theta = lin_spaced(0.0, std::numbers::pi / 2.0, ti, theta_points);
    ChannelSet ch = geometry_2user(gamma_db, theta);
    CVec h1 = ch.users[0].true_channel.col(0);
    CVec h2 = ch.users[1].true_channel.col(0);
    double rho =
        1.0 - std::norm(h1.dot(h2)) / (h1.squaredNorm() * h2.squaredNorm());

    OptResult rs = optimize_scheme(ch, SchemeKind::OneLayerRS, {}, metric, power, oc);
    OptResult sdma = optimize_scheme(ch, SchemeKind::SDMA, {}, metric, power, oc);
    OptResult noma = optimize_scheme(ch, SchemeKind::NOMA, {}, metric, power, oc);
    double total_power = rs.precoders.transmit_power();
    double common_fraction =
        total_power > 0.0
            ? rs.precoders.precoders[0].squaredNorm() / total_power
            : 0.0;
    file.rows[idx] = {fmt12(gamma_db),        fmt12(theta),
                      fmt12(rho),             fmt12(common_fraction),
                      fmt12(rs.objective),    fmt12(sdma.objective),
                      fmt12(noma.objective)};
  });
  return {file};
}

std::vector<CsvFile> build_uplink_region(const json& cfg, int jobs) {
  double p1 = get_or<double>(cfg, "p1", 10.0);
  double p2 = get_or<double>(cfg, "p2", 10.0);
  double g1 = get_or<double>(cfg, "g1", 1.0);
  double g2 = get_or<double>(cfg, "g2", 1.0);
  int points = get_or<int>(cfg, "points", 100);
  if (points < 1 || p1 < 0 || p2 < 0 || g1 < 0 || g2 < 0) {
    throw std::invalid_argument("config: bad uplink_region parameters");
  }
  MacRegion2 region = mac_region_2user(p1, p2, g1, g2);
  double r1_lo = std::log2(1.0 + p1 * g1 / (1.0 + p2 * g2));

  ChannelSet ch;
  ch.tx_antennas = 1;
  ch.users.resize(2);
  for (int k = 0; k < 2; ++k) {
    double g = k == 0 ? g1 : g2;
    ch.users[k].rx_antennas = 1;
    ch.users[k].true_channel = CMat::Constant(1, 1, Complex(std::sqrt(g), 0.0));
    ch.users[k].estimate = ch.users[k].true_channel;
  }

  CsvFile file;
  file.name = "uplink_region.csv";
  file.columns = {"r1_target", "r2_target", "a", "order", "r1", "r2"};
  file.rows.resize(points);
  parallel_for(points, jobs, [&](int i) {
    // dominant face: r1 + r2 = r_sum with r1 in [r1 at full SIC, r1_max]
    double r1_target = lin_spaced(r1_lo, region.r1_max, i, points);
    double r2_target = region.r_sum - r1_target;
    auto sol = find_split_for_point(r1_target, r2_target, p1, p2, g1, g2);
    if (!sol) {
      throw std::runtime_error("uplink_region: dominant-face target infeasible");
    }
    UplinkConfig split = split_config_2user(*sol, p1, p2);
    UplinkRates rates = rate_uplink(ch, split);
    file.rows[i] = {fmt12(r1_target),          fmt12(r2_target),
                    fmt12(sol->a),             sol->order,
                    fmt12(rates.user_total[0]), fmt12(rates.user_total[1])};
  });
  return {file};
}

std::vector<CsvFile> build_multicell_eval(const json& cfg,
                                          std::uint64_t base_seed) {
  int cells = get_or<int>(cfg, "cells", 2);
  int tx = get_or<int>(cfg, "tx", 4);
  int rx = get_or<int>(cfg, "rx", 1);
  double direct_variance = get_or<double>(cfg, "direct_variance", 1.0);
  double cross_variance = get_or<double>(cfg, "cross_variance", 0.2);
  double power = db_to_linear(get_or<double>(cfg, "snr_db", 20.0));
  double common_fraction = get_or<double>(cfg, "common_fraction", 0.5);
  if (cells < 1 || tx < 1 || rx < 1 || common_fraction < 0.0 ||
      common_fraction > 1.0) {
    throw std::invalid_argument("config: bad multicell_eval parameters");
  }
  MultiCellChannelSet ch =
      gen_multicell(base_seed, cells, tx, rx, direct_variance, cross_variance);

  CoordConfig coord;
  for (int k = 0; k < cells; ++k) {
    CMat direct = ch.links[k][k];  // M x N
    CVec dir = direct.col(0);
    double n = dir.norm();
    if (n > 0.0) dir /= n;
    coord.common_precoders.push_back(std::sqrt(common_fraction * power) * dir);
    coord.private_precoders.push_back(
        std::sqrt((1.0 - common_fraction) * power) * dir);
    coord.power_budgets.push_back(power);
  }
  CoordRates rates = rate_coordinated(ch, coord);

  CsvFile file;
  file.name = "multicell_eval.csv";
  file.columns = {"cell", "common_rate", "private_rate", "user_total"};
  for (int k = 0; k < cells; ++k) {
    file.rows.push_back({std::to_string(k + 1), fmt12(rates.common_rate[k]),
                         fmt12(rates.private_rate[k]),
                         fmt12(rates.user_total[k])});
  }
  return {file};
}

std::vector<CsvFile> dispatch(const std::string& kind, const json& cfg,
                              int jobs, std::uint64_t base_seed) {
  if (kind == "ic2_sweep") return build_ic2_sweep(cfg, jobs);
  if (kind == "rate_region") return build_rate_region(cfg, jobs, base_seed);
  if (kind == "mmf_sweep") return build_mmf_sweep(cfg, jobs, base_seed);
  if (kind == "ee_sweep") return build_ee_sweep(cfg, jobs, base_seed);
  if (kind == "region_map") return build_region_map(cfg, jobs, base_seed);
  if (kind == "uplink_region") return build_uplink_region(cfg, jobs);
  if (kind == "multicell_eval") return build_multicell_eval(cfg, base_seed);
  throw std::invalid_argument("unknown scenario kind '" + kind + "'");
}

std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int run_scenario(const RunOptions& options, std::ostream& log) {
  auto t0 = std::chrono::steady_clock::now();

  json cfg;
  std::string kind;
  std::uint64_t base_seed = 0;
  try {
    std::ifstream in(options.config_path);
    if (!in) {
      throw std::invalid_argument("cannot read config '" + options.config_path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_config_text(buf.str());
    if (options.seed) cfg["base_seed"] = *options.seed;
    if (!cfg.contains("kind") || !cfg["kind"].is_string()) {
      throw std::invalid_argument("config: missing 'kind'");
    }
    kind = cfg["kind"].get<std::string>();
    base_seed = get_or<std::uint64_t>(cfg, "base_seed", 12345);
    cfg["base_seed"] = base_seed;
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  }

  std::vector<CsvFile> files;
  try {
    files = dispatch(kind, cfg, options.jobs, base_seed);
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 3;
  }

  // All results are in memory; write everything or clean up what was written.
  std::string hash = config_hash_hex(cfg);
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(options.out_dir);
    for (const auto& file : files) {
      std::filesystem::path path =
          std::filesystem::path(options.out_dir) / file.name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      written.push_back(path);
      out << "# config_hash=" << hash << "\n";
      for (std::size_t c = 0; c < file.columns.size(); ++c) {
        out << (c ? "," : "") << file.columns[c];
      }
      out << "\n";
      for (const auto& row : file.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          out << (c ? "," : "") << row[c];
        }
        out << "\n";
      }
      if (!out) throw std::runtime_error("write failed for " + path.string());
    }
    auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    json manifest;
    manifest["kind"] = kind;
    manifest["config"] = cfg;
    manifest["config_hash"] = hash;
    manifest["base_seed"] = base_seed;
    manifest["jobs"] = options.jobs;
    manifest["version"] = kVersion;
    manifest["wall_ms"] = wall_ms;
    manifest["generated_at"] = iso_now();
    manifest["files"] = json::array();
    for (const auto& file : files) manifest["files"].push_back(file.name);
    std::filesystem::path mpath =
        std::filesystem::path(options.out_dir) / "manifest.json";
    std::ofstream mout(mpath, std::ios::binary);
    if (!mout) throw std::runtime_error("cannot write " + mpath.string());
    written.push_back(mpath);
    mout << manifest.dump(2) << "\n";
    if (!mout) throw std::runtime_error("write failed for " + mpath.string());
  } catch (const std::exception& e) {
    for (const auto& path : written) {
      std::error_code ec;
      std::filesystem::remove(path, ec);
    }
    log << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

void list_scenarios(std::ostream& out) {
  out <<
      "Scenario kinds (config key: kind = <name>)\n"
      "\n"
      "ic2_sweep        Two-user symmetric interference channel sweep.\n"
      "                 Rate-splitting vs treat-as-noise / full decode /\n"
      "                 orthogonal baselines over an interference ratio grid.\n"
      "                 Params: snr_db=30, ratio_min=0.1, ratio_max=100, points=200.\n"
      "                 Columns: inr_over_snr,rs,tin,decode,orthogonal,regime.\n"
      "\n"
      "rate_region      Two-user MISO ergodic rate-region frontier via a\n"
      "                 weighted-sum-rate weight sweep (setup: 4 tx antennas,\n"
      "                 SNR 20 dB). Params: tx=4, snr_db=20, variances=[1,1],\n"
      "                 n_weights=20, samples=100, schemes=[1layer_rs,sdma,noma],\n"
      "                 imperfect_csit=false, alpha_exponent=-0.6.\n"
      "                 One CSV per scheme: weight_ratio,r1,r2,r1_stderr,r2_stderr.\n"
      "\n"
      "mmf_sweep        Max-min fairness rate vs SNR for several schemes.\n"
      "                 Params: tx=5, users=6, snr_db_min=0, snr_db_max=30,\n"
      "                 snr_points=7, samples=100, imperfect_csit=false,\n"
      "                 alpha_exponent=-0.6,\n"
      "                 schemes=[1layer_rs,sdma,noma_g1,noma_g3].\n"
      "                 One CSV per scheme: snr_db,mmf,mmf_stderr.\n"
      "\n"
      "ee_sweep         Energy efficiency vs transmit power budget.\n"
      "                 Params: tx=2, users=2, power_min=0.1, power_max=100,\n"
      "                 points=20, samples=100, eta=0.35, p_dyn_dbm=27,\n"
      "                 p_sta_w=0.001, scheme=1layer_rs.\n"
      "                 Columns: power,ee,ee_stderr,sum_rate.\n"
      "\n"
      "region_map       Two-user geometry map over channel disparity and\n"
      "                 alignment angle at SNR 20 dB (grid tier): common-power\n"
      "                 fraction and per-scheme sum rate.\n"
      "                 Params: snr_db=20, gamma_db_min=-30, gamma_db_max=0,\n"
      "                 gamma_points=7, theta_points=7.\n"
      "                 Columns: gamma_db,theta,rho,common_fraction,rs,sdma,noma.\n"
      "\n"
      "uplink_region    Two-user SISO multiple-access dominant face traced by\n"
      "                 rate splitting without time sharing.\n"
      "                 Params: p1=10, p2=10, g1=1, g2=1, points=100.\n"
      "                 Columns: r1_target,r2_target,a,order,r1,r2.\n"
      "\n"
      "multicell_eval   Coordinated two-cell rate-splitting evaluation with\n"
      "                 matched single-cell precoders.\n"
      "                 Params: cells=2, tx=4, rx=1, direct_variance=1,\n"
      "                 cross_variance=0.2, snr_db=20, common_fraction=0.5.\n"
      "                 Columns: cell,common_rate,private_rate,user_total.\n"
      "\n"
      "Common keys: base_seed=12345, optimizer { tier=grid_refine,\n"
      "grid_points=101, iters=300, tol=1e-9, soft_min_temp0=1.0,\n"
      "soft_min_temp_min=0.001, penalty0=10.0, seed=<base_seed> }.\n";
}

int selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](bool ok, const char* what) {
    out << (ok ? "ok" : "FAIL") << ": " << what << "\n";
    if (!ok) ++failures;
  };

  // deterministic splittable rng
  check(Rng::split(7, 3).next_u64() == Rng::split(7, 3).next_u64(),
        "rng streams are reproducible");

  // rate splitting dominates the baselines on the interference channel
  bool dominance = true;
  for (int i = 0; i < 10; ++i) {
    double ratio = log_spaced(0.1, 100.0, i, 10);
    IcChannel ch{Complex(1.0, 0.0), Complex(std::sqrt(ratio), 0.0), 100.0};
    IcOptimum opt = optimize_t(ch);
    IcBaselines base = baseline_rates(ch);
    double best = std::max({base.tin, base.decode, base.orthogonal});
    if (opt.rate < best - 1e-9) dominance = false;
  }
  check(dominance, "interference-channel rate splitting >= baselines");

  // scalar SINR oracle against the log-det evaluator
  bool scalar_ok = true;
  for (int i = 0; i < 5; ++i) {
    ChannelSet ch = gen_rayleigh(1000 + i, 2, {1, 1}, {1.0, 1.0});
    StreamLayout layout = build_layout(SchemeKind::SDMA, 2, {1, 1});
    Rng rng = Rng::split(2000, i);
    PrecoderSet pre;
    pre.power_budget = 10.0;
    for (int s = 0; s < 2; ++s) {
      CMat p(2, 1);
      p(0, 0) = rng.cnormal();
      p(1, 0) = rng.cnormal();
      pre.precoders.push_back(std::sqrt(5.0) * p / p.norm());
    }
    RateReport rep = evaluate_rates(ch, layout, pre, Metric::wsr_unit(2));
    for (int k = 0; k < 2; ++k) {
      Complex own = (ch.users[k].true_channel.adjoint() * pre.precoders[k])(0, 0);
      Complex other =
          (ch.users[k].true_channel.adjoint() * pre.precoders[1 - k])(0, 0);
      double sinr = std::norm(own) / (1.0 + std::norm(other));
      if (std::abs(rep.rate_of(k, k) - std::log2(1.0 + sinr)) > 1e-12) {
        scalar_ok = false;
      }
    }
  }
  check(scalar_ok, "log-det rates match scalar SINR rates");

  // uplink sum-rate conservation under splitting
  bool uplink_ok = true;
  for (int i = 0; i < 5; ++i) {
    double a = 0.1 + 0.2 * i;
    UplinkConfig split = split_config_2user({a, "split"}, 4.0, 2.0);
    ChannelSet ch;
    ch.tx_antennas = 1;
    ch.users.resize(2);
    for (int k = 0; k < 2; ++k) {
      ch.users[k].rx_antennas = 1;
      ch.users[k].true_channel = CMat::Constant(1, 1, Complex(1.0, 0.0));
      ch.users[k].estimate = ch.users[k].true_channel;
    }
    UplinkRates rates = rate_uplink(ch, split);
    double sum = rates.user_total[0] + rates.user_total[1];
    if (std::abs(sum - std::log2(1.0 + 4.0 + 2.0)) > 1e-10) uplink_ok = false;
  }
  check(uplink_ok, "uplink split conserves the sum rate");

  // config parsing is deterministic and hash-stable
  const char* text =
      "kind = ic2_sweep\npoints = 4\noptimizer {\n  tier = grid\n}\n";
  json a = parse_config_text(text);
  json b = parse_config_text(text);
  check(a == b && config_hash_hex(a) == config_hash_hex(b),
        "config parsing and hashing are deterministic");

  out << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace rsma
