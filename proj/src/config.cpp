#include "gradcode/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gradcode/mask.hpp"

namespace gradcode {

namespace {

using Json = nlohmann::ordered_json;

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& item : obj.items())
    if (!allowed.contains(item.key()))
      throw std::invalid_argument("config: unknown key \"" + item.key() + "\" in " + where);
}

template <class T>
void get_to(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) obj.at(key).get_to(out);
}

DatasetSpec dataset_from_json(const Json& j) {
  check_keys(j, {"type", "train_n", "test_n", "p", "classes", "noise", "test_fraction", "seed", "path"},
             "dataset");
  DatasetSpec spec;
  get_to(j, "type", spec.type);
  get_to(j, "train_n", spec.train_n);
  get_to(j, "test_n", spec.test_n);
  get_to(j, "p", spec.p);
  get_to(j, "classes", spec.classes);
  get_to(j, "noise", spec.noise);
  get_to(j, "test_fraction", spec.test_fraction);
  get_to(j, "seed", spec.seed);
  get_to(j, "path", spec.path);
  return spec;
}

CodeSpec code_from_json(const Json& j) {
  check_keys(j, {"n", "k", "w"}, "code");
  CodeSpec spec;
  get_to(j, "n", spec.n);
  get_to(j, "k", spec.k);
  if (j.contains("w")) {
    if (j.at("w").is_string()) {
      if (j.at("w").get<std::string>() != "auto")
        throw std::invalid_argument("config: code.w must be an integer or \"auto\"");
      spec.auto_w = true;
      spec.w = 0;
    } else {
      spec.auto_w = false;
      j.at("w").get_to(spec.w);
    }
  }
  return spec;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"code", "loss", "dataset", "delays", "training", "schemes", "time_budget", "seeds",
              "out_dir", "rescale_partial", "decode_timing"},
             "config");
  ExperimentConfig cfg;
  if (j.contains("code")) cfg.code = code_from_json(j.at("code"));
  if (j.contains("loss")) cfg.loss = loss_from_name(j.at("loss").get<std::string>());
  if (j.contains("dataset")) cfg.dataset = dataset_from_json(j.at("dataset"));
  if (j.contains("delays")) {
    const Json& d = j.at("delays");
    check_keys(d, {"t0", "xi", "c_g", "c_m", "calibrate"}, "delays");
    get_to(d, "t0", cfg.t0);
    get_to(d, "xi", cfg.xi);
    get_to(d, "c_g", cfg.c_g);
    get_to(d, "c_m", cfg.c_m);
    get_to(d, "calibrate", cfg.calibrate);
  }
  if (j.contains("training")) {
    const Json& t = j.at("training");
    check_keys(t, {"step_size", "momentum"}, "training");
    get_to(t, "step_size", cfg.step_size);
    get_to(t, "momentum", cfg.momentum);
  }
  get_to(j, "schemes", cfg.schemes);
  get_to(j, "time_budget", cfg.time_budget);
  get_to(j, "seeds", cfg.seeds);
  get_to(j, "out_dir", cfg.out_dir);
  get_to(j, "rescale_partial", cfg.rescale_partial);
  get_to(j, "decode_timing", cfg.decode_timing);
  validate(cfg);
  return cfg;
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  Json j;
  j["code"]["n"] = cfg.code.n;
  j["code"]["k"] = cfg.code.k;
  if (cfg.code.auto_w)
    j["code"]["w"] = "auto";
  else
    j["code"]["w"] = cfg.code.w;
  j["loss"] = std::string(loss_name(cfg.loss));
  j["dataset"]["type"] = cfg.dataset.type;
  j["dataset"]["train_n"] = cfg.dataset.train_n;
  j["dataset"]["test_n"] = cfg.dataset.test_n;
  j["dataset"]["p"] = cfg.dataset.p;
  j["dataset"]["classes"] = cfg.dataset.classes;
  j["dataset"]["noise"] = cfg.dataset.noise;
  j["dataset"]["test_fraction"] = cfg.dataset.test_fraction;
  j["dataset"]["seed"] = cfg.dataset.seed;
  j["dataset"]["path"] = cfg.dataset.path;
  j["delays"]["t0"] = cfg.t0;
  j["delays"]["xi"] = cfg.xi;
  j["delays"]["c_g"] = cfg.c_g;
  j["delays"]["c_m"] = cfg.c_m;
  j["delays"]["calibrate"] = cfg.calibrate;
  j["training"]["step_size"] = cfg.step_size;
  j["training"]["momentum"] = cfg.momentum;
  j["schemes"] = cfg.schemes;
  j["time_budget"] = cfg.time_budget;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  j["rescale_partial"] = cfg.rescale_partial;
  j["decode_timing"] = cfg.decode_timing;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return config_from_json_text(buffer.str());
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.code.n < 1 || cfg.code.k < 1)
    throw std::invalid_argument("config: code.n and code.k must be positive");
  if (!cfg.code.auto_w) straggler_budget(cfg.code.n, cfg.code.k, cfg.code.w);
  if (cfg.dataset.type != "classification" && cfg.dataset.type != "regression" &&
      cfg.dataset.type != "csv")
    throw std::invalid_argument("config: dataset.type must be classification, regression or csv");
  if (cfg.dataset.type == "csv" && cfg.dataset.path.empty())
    throw std::invalid_argument("config: dataset.path required for csv datasets");
  if (cfg.dataset.type == "csv" &&
      !(cfg.dataset.test_fraction > 0.0 && cfg.dataset.test_fraction < 1.0))
    throw std::invalid_argument("config: dataset.test_fraction must lie in (0, 1)");
  if (cfg.dataset.type != "csv" && (cfg.dataset.train_n < 1 || cfg.dataset.test_n < 1))
    throw std::invalid_argument("config: dataset sizes must be positive");
  if (!(cfg.t0 > 0) || !(cfg.xi > 0))
    throw std::invalid_argument("config: delays.t0 and delays.xi must be positive");
  if (cfg.c_g < 0 || cfg.c_m < 0)
    throw std::invalid_argument("config: cost constants must be nonnegative");
  if (!cfg.calibrate && !(cfg.c_g > 0))
    throw std::invalid_argument("config: delays.c_g must be positive unless calibrating");
  if (!(cfg.step_size > 0)) throw std::invalid_argument("config: training.step_size must be positive");
  if (cfg.momentum < 0 || cfg.momentum >= 1)
    throw std::invalid_argument("config: training.momentum must lie in [0, 1)");
  if (cfg.schemes.empty()) throw std::invalid_argument("config: no schemes");
  for (const auto& s : cfg.schemes)
    if (s != "coded-rs" && s != "uncoded-wait-all" && s != "uncoded-fastest-f")
      throw std::invalid_argument("config: unknown scheme \"" + s + "\"");
  if (cfg.time_budget < 0) throw std::invalid_argument("config: time_budget must be nonnegative");
  if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  if (cfg.out_dir.empty()) throw std::invalid_argument("config: out_dir must be nonempty");
  if (cfg.decode_timing != "modeled" && cfg.decode_timing != "measured")
    throw std::invalid_argument("config: decode_timing must be modeled or measured");
}

}  // namespace gradcode
