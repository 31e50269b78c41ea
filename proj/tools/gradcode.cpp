#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gradcode/config.hpp"
#include "gradcode/delay.hpp"
#include "gradcode/errors.hpp"
#include "gradcode/mask.hpp"
#include "gradcode/rs_code.hpp"
#include "gradcode/simulate.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

Json load_json(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config " + path);
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": not valid JSON: " + e.what());
  }
}

// --set a.b.c=value ; the value is parsed as JSON, falling back to a string
void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("--set expects key.path=value, got \"" + assignment + "\"");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &config;
  std::size_t begin = 0;
  while (true) {
    const auto dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
    if (key.empty()) throw std::invalid_argument("--set: empty key in \"" + path + "\"");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

gradcode::ExperimentConfig build_config(const std::string& config_path,
                                        const std::vector<std::string>& sets) {
  Json j = load_json(config_path);
  for (const auto& s : sets) apply_override(j, s);
  return gradcode::config_from_json_text(j.dump());
}

void write_file(const std::string& path, const std::string& content,
                std::vector<std::string>* written = nullptr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << content;
  if (written) written->push_back(path);
}

int run_gen_code(int n, int k, int w, const std::string& out_dir) {
  const long long d_light = static_cast<long long>(n) * w / k;
  if (d_light < 2) {
    std::cerr << "gen-code: infeasible parameters (n=" << n << ", k=" << k << ", w=" << w
              << "): floor(w*n/k) = " << d_light
              << " < 2, so the straggler budget s = floor(w*n/k) - 1 = " << d_light - 1
              << " tolerates no stragglers\n";
    return 1;
  }
  const gradcode::CodeParams params = gradcode::straggler_budget(n, k, w);
  const gradcode::MaskMatrix mask = gradcode::mask_matrix(n, k, w);
  const gradcode::EncodingMatrix code = gradcode::encoding_matrix(params, mask);

  fs::create_directories(out_dir);
  write_file(out_dir + "/mask.txt", gradcode::to_text(mask));
  std::ostringstream enc;
  gradcode::write_encoding_matrix(enc, code);
  write_file(out_dir + "/encoding.txt", enc.str());

  std::ostringstream summary;
  summary << params.n << ' ' << params.k << ' ' << params.w << ' ' << params.s << ' ' << params.f;
  write_file(out_dir + "/summary.txt", summary.str() + "\n");
  std::cout << summary.str() << "\n";
  return 0;
}

int run_optimize(const std::string& config_path, const std::vector<std::string>& sets,
                 const std::string& out_override) {
  gradcode::ExperimentConfig cfg = build_config(config_path, sets);
  if (!out_override.empty()) cfg.out_dir = out_override;
  const gradcode::TrainTest data = gradcode::build_dataset(cfg.dataset, cfg.loss);
  if (cfg.calibrate) cfg.c_g = gradcode::calibrate_cg(data.train, cfg.loss).c_g;

  const gradcode::DelayParams dp{cfg.t0, cfg.xi, cfg.c_g, cfg.c_m, data.train.size(), cfg.code.n};
  const gradcode::OptimalAlpha opt = gradcode::optimal_alpha_offline(dp);
  if (!opt.valid) {
    std::cerr << "optimize: invalid regime: t0 >= c_g*N*xi (t0 = " << dp.t0
              << ", c_g*N*xi = " << dp.c_g * dp.N * dp.xi
              << "); the offline model has no interior minimizer\n";
    return 1;
  }
  const int f_offline = gradcode::optimal_f({gradcode::DecodeMode::offline, dp});
  const int f_online = gradcode::optimal_f({gradcode::DecodeMode::online, dp});

  std::cout << "n = " << dp.n << ", N = " << dp.N << ", t0 = " << dp.t0 << ", xi = " << dp.xi
            << ", c_g = " << dp.c_g << ", c_m = " << dp.c_m << "\n";
  std::cout << "alpha* = " << std::fixed << std::setprecision(4) << opt.alpha
            << std::defaultfloat << "\n";
  std::cout << "f* (offline) = " << f_offline << "\n";
  std::cout << "f* (online) = " << f_online << "\n";

  fs::create_directories(cfg.out_dir);
  const std::string sweep_path = cfg.out_dir + "/alpha_sweep.csv";
  std::ostringstream sweep;
  gradcode::write_time_sweep(sweep, dp, 1e-3);
  write_file(sweep_path, sweep.str());
  std::cout << "wrote " << sweep_path << "\n";
  return 0;
}

int run_simulate(const std::string& config_path, const std::vector<std::string>& sets,
                 const std::vector<std::uint64_t>& seed_override, const std::string& out_override) {
  gradcode::ExperimentConfig cfg = build_config(config_path, sets);
  if (!seed_override.empty()) cfg.seeds = seed_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  const gradcode::ExperimentConfig resolved = gradcode::resolve_config(cfg);

  fs::create_directories(resolved.out_dir);
  std::vector<std::string> written;
  try {
    write_file(resolved.out_dir + "/config_snapshot.json", gradcode::config_to_json_text(resolved),
               &written);

    std::map<std::string, std::pair<double, double>> totals;  // scheme -> (err sum, time sum)
    std::map<std::string, int> counts;
    std::cout << "scheme,seed,iters,final_test_error,mean_round_time,status\n";
    for (const std::string& scheme : resolved.schemes) {
      for (const std::uint64_t seed : resolved.seeds) {
        const gradcode::ExperimentTrace trace = gradcode::run_experiment(resolved, scheme, seed);
        std::ostringstream csv;
        gradcode::write_trace_csv(csv, trace);
        write_file(resolved.out_dir + "/trace_" + scheme + "_" + std::to_string(seed) + ".csv",
                   csv.str(), &written);

        std::cout << scheme << ',' << seed << ',' << trace.rows.size() << ',';
        if (trace.rows.empty()) {
          std::cout << "-,-";
        } else {
          const double final_err = trace.rows.back().test_error;
          const double mean_round = trace.rows.back().wall_clock / trace.rows.size();
          std::cout << std::setprecision(6) << final_err << ',' << mean_round;
          totals[scheme].first += final_err;
          totals[scheme].second += mean_round;
          counts[scheme] += 1;
        }
        std::cout << ',' << (trace.diverged ? "diverged" : "ok") << "\n";
      }
    }
    for (const auto& [scheme, sums] : totals) {
      const int m = counts[scheme];
      std::cout << "# " << scheme << ": mean final_test_error = " << sums.first / m
                << ", mean round_time = " << sums.second / m << " over " << m << " run(s)\n";
    }
  } catch (...) {
    for (const std::string& path : written) {
      std::error_code ec;
      fs::remove(path, ec);
    }
    throw;
  }
  return 0;
}

int run_calibrate(const std::string& config_path, const std::vector<std::string>& sets) {
  const gradcode::ExperimentConfig cfg = build_config(config_path, sets);
  const gradcode::TrainTest data = gradcode::build_dataset(cfg.dataset, cfg.loss);
  const gradcode::CalibrationResult result = gradcode::calibrate_cg(data.train, cfg.loss);
  std::cout << "c_g = " << std::setprecision(6) << result.c_g << " s/sample over "
            << data.train.size() << " samples\n";
  if (result.noisy)
    std::cerr << "warning: timing spread above 50% of the median; rerun on a quieter machine\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reed-Solomon coded distributed gradient descent toolkit"};
  app.require_subcommand(1);

  int n = 0, k = 0, w = 0;
  std::string gen_out = ".";
  CLI::App* gen = app.add_subcommand("gen-code", "construct a mask and encoding matrix");
  gen->add_option("n", n, "worker count")->required()->check(CLI::PositiveNumber);
  gen->add_option("k", k, "partition count")->required()->check(CLI::PositiveNumber);
  gen->add_option("w", w, "partitions per worker")->required()->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output directory");

  std::string config_path, out_override;
  std::vector<std::string> sets;
  std::vector<std::uint64_t> seed_override;

  CLI::App* opt = app.add_subcommand("optimize", "report alpha*, f* and the total-time sweep");
  opt->add_option("--config", config_path, "JSON config file");
  opt->add_option("--set", sets, "override a config key, e.g. --set delays.t0=0.002");
  opt->add_option("--out", out_override, "output directory override");

  CLI::App* sim = app.add_subcommand("simulate", "run scheme x seed experiments, one trace CSV each");
  sim->add_option("--config", config_path, "JSON config file")->required();
  sim->add_option("--set", sets, "override a config key");
  sim->add_option("--seed", seed_override, "replace the config seed list");
  sim->add_option("--out", out_override, "output directory override");

  CLI::App* cal = app.add_subcommand("calibrate", "measure c_g on this machine");
  cal->add_option("--config", config_path, "JSON config file");
  cal->add_option("--set", sets, "override a config key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(gen)) return run_gen_code(n, k, w, gen_out);
    if (app.got_subcommand(opt)) return run_optimize(config_path, sets, out_override);
    if (app.got_subcommand(sim)) return run_simulate(config_path, sets, seed_override, out_override);
    if (app.got_subcommand(cal)) return run_calibrate(config_path, sets);
  } catch (const gradcode::numerical_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
