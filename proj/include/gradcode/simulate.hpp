#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gradcode/config.hpp"
#include "gradcode/delay.hpp"
#include "gradcode/rs_code.hpp"
#include "gradcode/training.hpp"

namespace gradcode {

enum class SchemeKind { coded_rs, uncoded_wait_all, uncoded_fastest_f };

SchemeKind scheme_from_name(std::string_view name);
std::string_view scheme_name(SchemeKind kind);

struct Scheme {
  SchemeKind kind = SchemeKind::coded_rs;
  int wait_count = 0;            // f for subset-waiting schemes, n for wait-all
  bool rescale = true;           // uncoded-fastest-f: scale sum by k/|received|
  bool measured_decode = false;  // time the actual decode instead of modeling it
};

// Per-worker sample counts: how many data points each worker touches per round.
Eigen::VectorXi coded_worker_samples(const MaskMatrix& mask, const Partition& part);
Eigen::VectorXi uncoded_worker_samples(const Partition& part);

struct RoundTiming {
  Eigen::VectorXd worker_finish;  // delay + c_g * samples, per worker
  std::vector<int> survivors;     // ascending indices of the earliest finishers
  double decode_time = 0.0;
  double master_time = 0.0;       // wait_count-th finish + decode_time
};

// Timing-only round: sample delays, pick the wait_count earliest finishers
// (ties to the lower index), charge the modeled decode for coded schemes.
RoundTiming simulate_round_timing(const Scheme& scheme, const Eigen::VectorXi& worker_samples,
                                  const DelayParams& delays, std::mt19937_64& rng);

struct RoundResult {
  Eigen::VectorXd worker_finish;
  std::vector<int> survivors;
  double decode_time = 0.0;
  double master_time = 0.0;
  Eigen::VectorXd gradient;  // flattened p*c
};

// One training round at the state's lookahead point.  coded-rs decodes the
// survivors' coded rows; uncoded-wait-all sums every chunk; uncoded-fastest-f
// sums the received chunks, rescaled by k/|received| when scheme.rescale.
RoundResult simulate_round(const Scheme& scheme, const EncodingMatrix* code,
                           const InverseTable* table, const ModelState& state,
                           const Dataset& train, const Partition& part, LossKind loss,
                           const DelayParams& delays, std::mt19937_64& rng);

struct TraceRow {
  int iter = 0;
  double wall_clock = 0.0;
  double train_loss = 0.0;
  double test_error = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct ExperimentTrace {
  std::string scheme;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
  bool diverged = false;

  friend bool operator==(const ExperimentTrace&, const ExperimentTrace&) = default;
};

// Fixed header "iter,wall_clock,train_loss,test_error,scheme,seed".
void write_trace_csv(std::ostream& os, const ExperimentTrace& trace);

struct TrainTest {
  Dataset train;
  Dataset test;
};

TrainTest build_dataset(const DatasetSpec& spec, LossKind loss);

// Calibrates c_g where requested and pins auto w from the time-optimal f.
// The result is concrete: every downstream run is deterministic in the seed.
ExperimentConfig resolve_config(const ExperimentConfig& config);

// One (scheme, seed) run: rounds + master steps until the simulated clock
// exhausts the budget, recording train loss and held-out test error per
// iteration.  Fully reproducible from the seed.
ExperimentTrace run_experiment(const ExperimentConfig& config, const std::string& scheme,
                               std::uint64_t seed);

struct CalibrationResult {
  double c_g = 0.0;
  bool noisy = false;  // spread across repeats exceeded 50% of the median
};

// Median per-sample gradient wall time over repeated timed passes.
CalibrationResult calibrate_cg(const Dataset& data, LossKind loss, int repeats = 7);

}  // namespace gradcode
