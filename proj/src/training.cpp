#include "gradcode/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gradcode/errors.hpp"

namespace gradcode {

LossKind loss_from_name(std::string_view name) {
  if (name == "squared_error") return LossKind::squared_error;
  if (name == "softmax") return LossKind::softmax;
  throw std::invalid_argument("unknown loss kind: " + std::string(name));
}

std::string_view loss_name(LossKind kind) {
  return kind == LossKind::squared_error ? "squared_error" : "softmax";
}

Partition partition(int N, int k) {
  if (k < 1 || k > N) throw std::invalid_argument("partition: k must satisfy 1 <= k <= N");
  Partition part;
  part.chunks.reserve(k);
  const int base = N / k;
  const int extra = N % k;
  int begin = 0;
  for (int j = 0; j < k; ++j) {
    const int size = base + (j < extra ? 1 : 0);
    part.chunks.push_back({begin, begin + size});
    begin += size;
  }
  return part;
}

ModelState initial_state(int p, int classes, double step_size, double momentum) {
  if (p < 1 || classes < 1) throw std::invalid_argument("initial_state: bad dimensions");
  if (!(step_size > 0)) throw std::invalid_argument("initial_state: step size must be positive");
  if (momentum < 0 || momentum >= 1)
    throw std::invalid_argument("initial_state: momentum must lie in [0, 1)");
  ModelState state;
  state.beta = Eigen::MatrixXd::Zero(p, classes);
  state.velocity = Eigen::MatrixXd::Zero(p, classes);
  state.step_size = step_size;
  state.momentum = momentum;
  return state;
}

namespace {

void check_chunk(const Dataset& data, ChunkRange chunk, const Eigen::MatrixXd& beta) {
  if (chunk.begin < 0 || chunk.end > data.size() || chunk.size() < 1)
    throw std::invalid_argument("chunk out of range or empty");
  if (beta.rows() != data.dim()) throw std::invalid_argument("beta rows must match feature dim");
}

// Row-wise softmax probabilities with max subtraction.
Eigen::MatrixXd softmax_probs(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd z = logits;
  z.colwise() -= z.rowwise().maxCoeff();
  Eigen::MatrixXd probs = z.array().exp();
  probs.array().colwise() /= probs.rowwise().sum().array();
  return probs;
}

int class_label(const Dataset& data, int row) {
  const double label = data.labels(row);
  const int c = static_cast<int>(std::lround(label));
  if (c < 0 || c >= data.num_classes || std::abs(label - c) > 1e-9)
    throw std::invalid_argument("softmax: labels must be class indices in [0, classes)");
  return c;
}

}  // namespace

Eigen::MatrixXd partial_gradient(LossKind kind, const Dataset& data, ChunkRange chunk,
                                 const Eigen::MatrixXd& beta) {
  check_chunk(data, chunk, beta);
  const auto X = data.features.middleRows(chunk.begin, chunk.size());
  if (kind == LossKind::squared_error) {
    if (beta.cols() != 1) throw std::invalid_argument("squared_error: beta must be a column");
    const Eigen::VectorXd residual = X * beta.col(0) - data.labels.segment(chunk.begin, chunk.size());
    return 2.0 * (X.transpose() * residual);
  }
  if (beta.cols() != data.num_classes || data.num_classes < 2)
    throw std::invalid_argument("softmax: beta needs one column per class");
  Eigen::MatrixXd probs = softmax_probs(X * beta);
  for (int i = 0; i < chunk.size(); ++i) probs(i, class_label(data, chunk.begin + i)) -= 1.0;
  return X.transpose() * probs;
}

double chunk_loss(LossKind kind, const Dataset& data, ChunkRange chunk,
                  const Eigen::MatrixXd& beta) {
  check_chunk(data, chunk, beta);
  const auto X = data.features.middleRows(chunk.begin, chunk.size());
  if (kind == LossKind::squared_error) {
    if (beta.cols() != 1) throw std::invalid_argument("squared_error: beta must be a column");
    return (X * beta.col(0) - data.labels.segment(chunk.begin, chunk.size())).squaredNorm();
  }
  if (beta.cols() != data.num_classes || data.num_classes < 2)
    throw std::invalid_argument("softmax: beta needs one column per class");
  const Eigen::MatrixXd logits = X * beta;
  double loss = 0.0;
  for (int i = 0; i < chunk.size(); ++i) {
    const auto row = logits.row(i);
    const double zmax = row.maxCoeff();
    const double lse = zmax + std::log((row.array() - zmax).exp().sum());
    loss += lse - row(class_label(data, chunk.begin + i));
  }
  return loss;
}

double mean_loss(LossKind kind, const Dataset& data, const Eigen::MatrixXd& beta) {
  if (data.size() < 1) throw std::invalid_argument("mean_loss: empty dataset");
  return chunk_loss(kind, data, {0, data.size()}, beta) / data.size();
}

double test_error(LossKind kind, const Dataset& data, const Eigen::MatrixXd& beta) {
  if (data.size() < 1) throw std::invalid_argument("test_error: empty dataset");
  if (kind == LossKind::squared_error)
    return (data.features * beta.col(0) - data.labels).squaredNorm() / data.size();
  const Eigen::MatrixXd logits = data.features * beta;
  int wrong = 0;
  for (int i = 0; i < data.size(); ++i) {
    Eigen::Index predicted;
    logits.row(i).maxCoeff(&predicted);
    if (static_cast<int>(predicted) != class_label(data, i)) ++wrong;
  }
  return static_cast<double>(wrong) / data.size();
}

Eigen::MatrixXd lookahead_point(const ModelState& state) {
  return state.beta + state.momentum * state.velocity;
}

ModelState master_step(ModelState state, const Eigen::MatrixXd& gradient) {
  if (gradient.rows() != state.beta.rows() || gradient.cols() != state.beta.cols())
    throw std::invalid_argument("master_step: gradient shape does not match parameters");
  if (!gradient.allFinite()) throw numerical_error("master_step: non-finite gradient");
  state.velocity = state.momentum * state.velocity - state.step_size * gradient;
  state.beta += state.velocity;
  if (!state.beta.allFinite()) throw numerical_error("master_step: parameters diverged");
  return state;
}

Dataset make_classification(int N, int p, int classes, double noise, std::uint64_t seed) {
  if (N < 1 || p < 1 || classes < 2)
    throw std::invalid_argument("make_classification: need N >= 1, p >= 1, classes >= 2");
  if (noise < 0) throw std::invalid_argument("make_classification: noise must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd means(classes, p);
  for (int c = 0; c < classes; ++c)
    for (int j = 0; j < p; ++j) means(c, j) = 2.0 * gauss(rng);
  Dataset data;
  data.features.resize(N, p);
  data.labels.resize(N);
  data.num_classes = classes;
  for (int i = 0; i < N; ++i) {
    const int c = i % classes;
    data.labels(i) = c;
    for (int j = 0; j < p; ++j) data.features(i, j) = means(c, j) + noise * gauss(rng);
  }
  return data;
}

Dataset make_regression(int N, int p, double noise, std::uint64_t seed) {
  if (N < 1 || p < 1) throw std::invalid_argument("make_regression: need N >= 1, p >= 1");
  if (noise < 0) throw std::invalid_argument("make_regression: noise must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd truth(p);
  for (int j = 0; j < p; ++j) truth(j) = gauss(rng);
  Dataset data;
  data.features.resize(N, p);
  data.labels.resize(N);
  data.num_classes = 1;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < p; ++j) data.features(i, j) = gauss(rng);
    data.labels(i) = data.features.row(i).dot(truth) + noise * gauss(rng);
  }
  return data;
}

namespace {

bool integral_labels(const Eigen::VectorXd& labels) {
  for (int i = 0; i < labels.size(); ++i) {
    const double rounded = std::round(labels(i));
    if (labels(i) < -0.5 || std::abs(labels(i) - rounded) > 1e-9) return false;
  }
  return true;
}

}  // namespace

Dataset read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("read_csv: missing header");
  const auto columns = 1 + std::count(line.begin(), line.end(), ',');
  if (columns < 2) throw std::invalid_argument("read_csv: need at least one feature and a label");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
    if (static_cast<long>(row.size()) != columns)
      throw std::invalid_argument("read_csv: row with wrong column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_csv: no data rows");

  Dataset data;
  const int N = static_cast<int>(rows.size());
  const int p = static_cast<int>(columns) - 1;
  data.features.resize(N, p);
  data.labels.resize(N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < p; ++j) data.features(i, j) = rows[i][j];
    data.labels(i) = rows[i][p];
  }
  if (integral_labels(data.labels)) {
    const int top = static_cast<int>(std::lround(data.labels.maxCoeff()));
    if (top >= 1) data.num_classes = top + 1;
  }
  return data;
}

void write_csv(std::ostream& os, const Dataset& data) {
  os << std::setprecision(17);
  for (int j = 0; j < data.dim(); ++j) os << 'x' << j << ',';
  os << "label\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.dim(); ++j) os << data.features(i, j) << ',';
    os << data.labels(i) << '\n';
  }
}

}  // namespace gradcode
