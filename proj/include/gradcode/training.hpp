#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gradcode/rs_code.hpp"

namespace gradcode {

enum class LossKind { squared_error, softmax };

LossKind loss_from_name(std::string_view name);
std::string_view loss_name(LossKind kind);

struct Dataset {
  Eigen::MatrixXd features;  // N x p
  Eigen::VectorXd labels;    // regression target, or class index for softmax
  int num_classes = 1;       // 1 for regression-style labels

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

struct ChunkRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
};

// k contiguous chunks covering [0, N); the first N mod k chunks take the
// extra point.
struct Partition {
  std::vector<ChunkRange> chunks;
  int count() const { return static_cast<int>(chunks.size()); }
};

Partition partition(int N, int k);

struct ModelState {
  Eigen::MatrixXd beta;      // p x c (c = 1 for regression)
  Eigen::MatrixXd velocity;  // same shape
  double step_size = 0.01;
  double momentum = 0.9;
};

ModelState initial_state(int p, int classes, double step_size, double momentum);

// Gradient of the summed loss over one chunk, same shape as beta.
Eigen::MatrixXd partial_gradient(LossKind kind, const Dataset& data, ChunkRange chunk,
                                 const Eigen::MatrixXd& beta);

double chunk_loss(LossKind kind, const Dataset& data, ChunkRange chunk, const Eigen::MatrixXd& beta);
double mean_loss(LossKind kind, const Dataset& data, const Eigen::MatrixXd& beta);

// Misclassification rate for softmax, mean squared error otherwise.
double test_error(LossKind kind, const Dataset& data, const Eigen::MatrixXd& beta);

// Gradients are evaluated at beta + momentum * velocity, then master_step
// applies velocity <- momentum * velocity - step_size * gradient and
// beta <- beta + velocity.
Eigen::MatrixXd lookahead_point(const ModelState& state);
ModelState master_step(ModelState state, const Eigen::MatrixXd& gradient);

/// Coded worker output c_i = sum_j B_{i,j} g_j over the row's support.
/// `partials` carries one row per support entry, in support order; entries of
/// the row outside the declared support must be structural zeros.
template <class RowT, class PartialsT>
Eigen::RowVectorXcd worker_output(const Eigen::MatrixBase<RowT>& row, std::span<const int> support,
                                  const Eigen::MatrixBase<PartialsT>& partials) {
  if (static_cast<Eigen::Index>(support.size()) != partials.rows())
    throw std::invalid_argument("worker_output: one partial gradient per support entry required");
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (std::abs(row(j)) <= kSupportTol) continue;
    if (std::find(support.begin(), support.end(), static_cast<int>(j)) == support.end())
      throw std::invalid_argument("worker_output: row support does not match the mask support");
  }
  Eigen::RowVectorXcd out = Eigen::RowVectorXcd::Zero(partials.cols());
  for (std::size_t t = 0; t < support.size(); ++t) {
    if (support[t] < 0 || support[t] >= row.size())
      throw std::invalid_argument("worker_output: support index out of range");
    out += Complex(row(support[t])) * partials.row(static_cast<Eigen::Index>(t)).template cast<Complex>();
  }
  return out;
}

// Seeded synthetic data.  Classification: Gaussian clusters with unit-ish
// class means scaled by 2, within-class std `noise`, labels round-robin.
// Regression: y = x . beta_true + noise * N(0,1).
Dataset make_classification(int N, int p, int classes, double noise, std::uint64_t seed);
Dataset make_regression(int N, int p, double noise, std::uint64_t seed);

// CSV with a header line; every column but the last is a feature, the last
// is the label.  Integer-valued labels starting at 0 are treated as classes.
Dataset read_csv(const std::string& path);
void write_csv(std::ostream& os, const Dataset& data);

}  // namespace gradcode
