#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradcode/training.hpp"

namespace gradcode {

struct DatasetSpec {
  std::string type = "classification";  // classification | regression | csv
  int train_n = 2000;
  int test_n = 500;
  int p = 20;
  int classes = 3;
  double noise = 1.0;
  double test_fraction = 0.25;  // csv only
  std::uint64_t seed = 1;
  std::string path;  // csv only

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct CodeSpec {
  int n = 40;
  int k = 20;
  int w = 0;           // ignored while auto_w is set
  bool auto_w = true;  // pick w from the time-optimal f

  friend bool operator==(const CodeSpec&, const CodeSpec&) = default;
};

struct ExperimentConfig {
  CodeSpec code;
  LossKind loss = LossKind::softmax;
  DatasetSpec dataset;

  double t0 = 0.001;
  double xi = 1.1;
  double c_g = 3e-6;
  double c_m = 1e-9;
  bool calibrate = false;  // measure c_g on this machine before running

  double step_size = 5e-5;
  double momentum = 0.9;

  std::vector<std::string> schemes = {"coded-rs", "uncoded-wait-all"};
  double time_budget = 2.0;  // simulated seconds per run
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "out";

  bool rescale_partial = true;          // uncoded-fastest-f: scale sum by k/|received|
  std::string decode_timing = "modeled";  // modeled | measured

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Strict JSON (un)parsing: unknown keys are rejected, missing keys fall back
// to the defaults above.  parse(serialize(parse(text))) == parse(text).
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

void validate(const ExperimentConfig& config);

}  // namespace gradcode
