#include "gradcode/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "gradcode/errors.hpp"

namespace gradcode {

SchemeKind scheme_from_name(std::string_view name) {
  if (name == "coded-rs") return SchemeKind::coded_rs;
  if (name == "uncoded-wait-all") return SchemeKind::uncoded_wait_all;
  if (name == "uncoded-fastest-f") return SchemeKind::uncoded_fastest_f;
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::coded_rs: return "coded-rs";
    case SchemeKind::uncoded_wait_all: return "uncoded-wait-all";
    case SchemeKind::uncoded_fastest_f: return "uncoded-fastest-f";
  }
  throw std::logic_error("scheme_name: bad kind");
}

Eigen::VectorXi coded_worker_samples(const MaskMatrix& mask, const Partition& part) {
  if (mask.cols() != part.count())
    throw std::invalid_argument("coded_worker_samples: mask columns must match chunk count");
  Eigen::VectorXi samples = Eigen::VectorXi::Zero(mask.rows());
  for (int i = 0; i < mask.rows(); ++i)
    for (int j = 0; j < mask.cols(); ++j)
      if (mask.entries(i, j)) samples(i) += part.chunks[j].size();
  return samples;
}

Eigen::VectorXi uncoded_worker_samples(const Partition& part) {
  Eigen::VectorXi samples(part.count());
  for (int j = 0; j < part.count(); ++j) samples(j) = part.chunks[j].size();
  return samples;
}

RoundTiming simulate_round_timing(const Scheme& scheme, const Eigen::VectorXi& worker_samples,
                                  const DelayParams& delays, std::mt19937_64& rng) {
  const int n = static_cast<int>(worker_samples.size());
  if (n < 1) throw std::invalid_argument("simulate_round_timing: no workers");
  if (scheme.wait_count < 1 || scheme.wait_count > n)
    throw std::invalid_argument("simulate_round_timing: wait_count must lie in [1, n]");

  RoundTiming round;
  round.worker_finish.resize(n);
  for (int i = 0; i < n; ++i)
    round.worker_finish(i) = sample_delay(delays, rng) + delays.c_g * worker_samples(i);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return round.worker_finish(a) < round.worker_finish(b); });

  round.survivors.assign(order.begin(), order.begin() + scheme.wait_count);
  const double waited = round.worker_finish(round.survivors.back());
  std::sort(round.survivors.begin(), round.survivors.end());

  if (scheme.kind == SchemeKind::coded_rs) {
    const double f = scheme.wait_count;
    round.decode_time = delays.c_m * f * (f - 1.0);
  }
  round.master_time = waited + round.decode_time;
  return round;
}

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

// Chunk gradients are identical across workers, so one shared evaluation per
// chunk stands in for every worker that holds it.
struct ChunkGradients {
  const Dataset& data;
  const Partition& part;
  LossKind loss;
  const Eigen::MatrixXd& beta;
  std::vector<Eigen::VectorXd> cache;
  std::vector<char> ready;

  ChunkGradients(const Dataset& d, const Partition& pt, LossKind l, const Eigen::MatrixXd& b)
      : data(d), part(pt), loss(l), beta(b), cache(pt.count()), ready(pt.count(), 0) {}

  const Eigen::VectorXd& get(int j) {
    if (!ready[j]) {
      cache[j] = flatten(partial_gradient(loss, data, part.chunks[j], beta));
      ready[j] = 1;
    }
    return cache[j];
  }
};

}  // namespace

RoundResult simulate_round(const Scheme& scheme, const EncodingMatrix* code,
                           const InverseTable* table, const ModelState& state,
                           const Dataset& train, const Partition& part, LossKind loss,
                           const DelayParams& delays, std::mt19937_64& rng) {
  const int k = part.count();
  Eigen::VectorXi samples;
  if (scheme.kind == SchemeKind::coded_rs) {
    if (code == nullptr || table == nullptr)
      throw std::invalid_argument("simulate_round: coded-rs needs an encoding matrix and table");
    if (table->n != code->params.n)
      throw std::invalid_argument("simulate_round: table size does not match the code");
    if (scheme.wait_count != code->params.f)
      throw std::invalid_argument("simulate_round: coded-rs must wait for exactly f workers");
    samples = coded_worker_samples(code->mask, part);
  } else {
    samples = uncoded_worker_samples(part);
  }

  RoundTiming timing = simulate_round_timing(scheme, samples, delays, rng);
  RoundResult round;
  round.worker_finish = std::move(timing.worker_finish);
  round.survivors = std::move(timing.survivors);
  round.decode_time = timing.decode_time;
  round.master_time = timing.master_time;

  const Eigen::MatrixXd eval_beta = lookahead_point(state);
  ChunkGradients grads(train, part, loss, eval_beta);
  const int width = static_cast<int>(eval_beta.size());

  switch (scheme.kind) {
    case SchemeKind::coded_rs: {
      const int f = scheme.wait_count;
      Eigen::MatrixXcd coded_rows(f, width);
      std::vector<int> support;
      for (int t = 0; t < f; ++t) {
        const int worker = round.survivors[t];
        support = code->mask.row_support(worker);
        Eigen::MatrixXd partials(static_cast<int>(support.size()), width);
        for (std::size_t s = 0; s < support.size(); ++s)
          partials.row(static_cast<Eigen::Index>(s)) = grads.get(support[s]);
        coded_rows.row(t) = worker_output(code->entries.row(worker), support, partials);
      }
      if (scheme.measured_decode) {
        const auto start = std::chrono::steady_clock::now();
        const DecodingVector dec = decoding_vector(round.survivors, *table);
        round.gradient = recover_gradient(coded_rows, dec);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        round.master_time += elapsed.count() - round.decode_time;
        round.decode_time = elapsed.count();
      } else {
        const DecodingVector dec = decoding_vector(round.survivors, *table);
        round.gradient = recover_gradient(coded_rows, dec);
      }
      break;
    }
    case SchemeKind::uncoded_wait_all: {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(width);
      for (int j = 0; j < k; ++j) sum += grads.get(j);
      round.gradient = sum;
      break;
    }
    case SchemeKind::uncoded_fastest_f: {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(width);
      for (int worker : round.survivors) sum += grads.get(worker);
      const double scale = scheme.rescale ? static_cast<double>(k) / scheme.wait_count : 1.0;
      round.gradient = scale * sum;
      break;
    }
  }
  return round;
}

void write_trace_csv(std::ostream& os, const ExperimentTrace& trace) {
  os << "iter,wall_clock,train_loss,test_error,scheme,seed\n" << std::setprecision(17);
  for (const TraceRow& row : trace.rows)
    os << row.iter << ',' << row.wall_clock << ',' << row.train_loss << ',' << row.test_error
       << ',' << trace.scheme << ',' << trace.seed << '\n';
}

namespace {

Dataset slice(const Dataset& data, const std::vector<int>& rows) {
  Dataset out;
  out.features.resize(static_cast<int>(rows.size()), data.dim());
  out.labels.resize(static_cast<int>(rows.size()));
  out.num_classes = data.num_classes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    out.labels(static_cast<Eigen::Index>(i)) = data.labels(rows[i]);
  }
  return out;
}

}  // namespace

TrainTest build_dataset(const DatasetSpec& spec, LossKind loss) {
  TrainTest out;
  if (spec.type == "classification" || spec.type == "regression") {
    const int total = spec.train_n + spec.test_n;
    Dataset all = spec.type == "classification"
                      ? make_classification(total, spec.p, spec.classes, spec.noise, spec.seed)
                      : make_regression(total, spec.p, spec.noise, spec.seed);
    std::vector<int> head(spec.train_n), tail(spec.test_n);
    std::iota(head.begin(), head.end(), 0);
    std::iota(tail.begin(), tail.end(), spec.train_n);
    out.train = slice(all, head);
    out.test = slice(all, tail);
  } else if (spec.type == "csv") {
    Dataset all = read_csv(spec.path);
    const int N = all.size();
    int test_n = static_cast<int>(std::lround(N * spec.test_fraction));
    test_n = std::min(std::max(test_n, 1), N - 1);
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
    const std::vector<int> train_rows(order.begin(), order.end() - test_n);
    const std::vector<int> test_rows(order.end() - test_n, order.end());
    out.train = slice(all, train_rows);
    out.test = slice(all, test_rows);
  } else {
    throw std::invalid_argument("build_dataset: unknown dataset type " + spec.type);
  }

  if (loss == LossKind::softmax && out.train.num_classes < 2)
    throw std::invalid_argument("build_dataset: softmax needs a dataset with class labels");
  if (loss == LossKind::squared_error) {
    out.train.num_classes = 1;
    out.test.num_classes = 1;
  }
  return out;
}

ExperimentConfig resolve_config(const ExperimentConfig& input) {
  validate(input);
  ExperimentConfig cfg = input;
  const TrainTest data = build_dataset(cfg.dataset, cfg.loss);
  if (cfg.calibrate) {
    cfg.c_g = calibrate_cg(data.train, cfg.loss).c_g;
    cfg.calibrate = false;
  }
  if (cfg.code.auto_w) {
    DelayParams dp{cfg.t0, cfg.xi, cfg.c_g, cfg.c_m, data.train.size(), cfg.code.n};
    const int f_star = optimal_f({DecodeMode::online, dp});
    // smallest w whose straggler budget still decodes from f_star workers
    const long long numerator = static_cast<long long>(cfg.code.n - f_star + 1) * cfg.code.k;
    cfg.code.w = static_cast<int>((numerator + cfg.code.n - 1) / cfg.code.n);
    cfg.code.w = std::min(std::max(cfg.code.w, 1), cfg.code.k);
    cfg.code.auto_w = false;
  }
  validate(cfg);
  return cfg;
}

ExperimentTrace run_experiment(const ExperimentConfig& cfg, const std::string& scheme_label,
                               std::uint64_t seed) {
  validate(cfg);
  if (cfg.calibrate || cfg.code.auto_w)
    throw std::invalid_argument("run_experiment: resolve_config the configuration first");

  const TrainTest data = build_dataset(cfg.dataset, cfg.loss);
  const int N = data.train.size();
  const int n = cfg.code.n;
  const int classes = cfg.loss == LossKind::softmax ? data.train.num_classes : 1;

  const SchemeKind kind = scheme_from_name(scheme_label);
  const CodeParams params = straggler_budget(n, cfg.code.k, cfg.code.w);

  Scheme scheme;
  scheme.kind = kind;
  scheme.rescale = cfg.rescale_partial;
  scheme.measured_decode = cfg.decode_timing == "measured";

  EncodingMatrix code;
  InverseTable table;
  Partition part;
  const EncodingMatrix* code_ptr = nullptr;
  const InverseTable* table_ptr = nullptr;
  if (kind == SchemeKind::coded_rs) {
    code = encoding_matrix(params, mask_matrix(n, cfg.code.k, cfg.code.w));
    table = inverse_table(n);
    part = partition(N, cfg.code.k);
    scheme.wait_count = params.f;
    code_ptr = &code;
    table_ptr = &table;
  } else {
    part = partition(N, n);  // one chunk per worker
    scheme.wait_count = kind == SchemeKind::uncoded_wait_all ? n : params.f;
  }

  DelayParams delays{cfg.t0, cfg.xi, cfg.c_g, cfg.c_m, N, n};
  validate(delays);

  ModelState state = initial_state(data.train.dim(), classes, cfg.step_size, cfg.momentum);
  std::mt19937_64 rng(seed);

  ExperimentTrace trace;
  trace.scheme = scheme_label;
  trace.seed = seed;

  double wall = 0.0;
  int iter = 0;
  while (wall < cfg.time_budget) {
    const RoundResult round =
        simulate_round(scheme, code_ptr, table_ptr, state, data.train, part, cfg.loss, delays, rng);
    wall += round.master_time;
    if (!round.gradient.allFinite()) {
      trace.diverged = true;
      break;
    }
    const Eigen::MatrixXd grad =
        Eigen::Map<const Eigen::MatrixXd>(round.gradient.data(), state.beta.rows(), state.beta.cols());
    try {
      state = master_step(state, grad);
    } catch (const numerical_error&) {
      trace.diverged = true;
      break;
    }
    ++iter;
    const double train_loss = mean_loss(cfg.loss, data.train, state.beta);
    const double test_err = test_error(cfg.loss, data.test, state.beta);
    if (!std::isfinite(train_loss) || !std::isfinite(test_err)) {
      trace.diverged = true;
      break;
    }
    trace.rows.push_back({iter, wall, train_loss, test_err});
  }
  return trace;
}

CalibrationResult calibrate_cg(const Dataset& data, LossKind loss, int repeats) {
  if (data.size() < 1) throw std::invalid_argument("calibrate_cg: empty dataset");
  if (repeats < 3) throw std::invalid_argument("calibrate_cg: need at least 3 repeats");
  const int classes = loss == LossKind::softmax ? data.num_classes : 1;
  const Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(data.dim(), classes);
  const ChunkRange whole{0, data.size()};

  double sink = 0.0;
  sink += partial_gradient(loss, data, whole, beta).norm();  // warmup

  std::vector<double> per_sample;
  per_sample.reserve(repeats);
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    sink += partial_gradient(loss, data, whole, beta).norm();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    per_sample.push_back(elapsed.count() / data.size());
  }
  if (!std::isfinite(sink)) throw numerical_error("calibrate_cg: gradient blew up");

  std::sort(per_sample.begin(), per_sample.end());
  CalibrationResult result;
  result.c_g = per_sample[per_sample.size() / 2];
  result.noisy = (per_sample.back() - per_sample.front()) > 0.5 * result.c_g;
  return result;
}

}  // namespace gradcode
