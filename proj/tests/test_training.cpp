#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "gradcode/errors.hpp"
#include "gradcode/training.hpp"

using namespace gradcode;

namespace {

// Central finite differences of the summed chunk loss.
Eigen::MatrixXd fd_gradient(LossKind kind, const Dataset& data, ChunkRange chunk,
                            const Eigen::MatrixXd& beta, double h = 1e-6) {
  Eigen::MatrixXd grad(beta.rows(), beta.cols());
  Eigen::MatrixXd probe = beta;
  for (int i = 0; i < beta.rows(); ++i)
    for (int j = 0; j < beta.cols(); ++j) {
      probe(i, j) = beta(i, j) + h;
      const double up = chunk_loss(kind, data, chunk, probe);
      probe(i, j) = beta(i, j) - h;
      const double down = chunk_loss(kind, data, chunk, probe);
      probe(i, j) = beta(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  return grad;
}

}  // namespace

TEST_CASE("partition balances chunk sizes") {
  const Partition p1 = partition(8, 4);
  for (const auto& c : p1.chunks) CHECK(c.size() == 2);

  const Partition p2 = partition(10, 4);
  CHECK(p2.chunks[0].size() == 3);
  CHECK(p2.chunks[1].size() == 3);
  CHECK(p2.chunks[2].size() == 2);
  CHECK(p2.chunks[3].size() == 2);

  const Partition p3 = partition(5, 5);
  for (const auto& c : p3.chunks) CHECK(c.size() == 1);

  CHECK_THROWS_AS(partition(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(partition(4, 0), std::invalid_argument);

  // disjoint cover in order, sizes within 1 of each other
  for (int N : {17, 23, 64})
    for (int k = 1; k <= N; k += 3) {
      const Partition part = partition(N, k);
      int cursor = 0, lo = N, hi = 0;
      for (const auto& c : part.chunks) {
        CHECK(c.begin == cursor);
        cursor = c.end;
        lo = std::min(lo, c.size());
        hi = std::max(hi, c.size());
      }
      CHECK(cursor == N);
      CHECK(hi - lo <= 1);
    }
}

TEST_CASE("squared-error gradients at hand-checked points") {
  Dataset data;
  data.features.resize(2, 2);
  data.features << 1, 0,
                   0, 1;
  data.labels.resize(2);
  data.labels << 0, 0;
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(2, 1);

  // x = e1, y = 0, beta = 0: gradient vanishes
  CHECK(partial_gradient(LossKind::squared_error, data, {0, 1}, beta).cwiseAbs().maxCoeff() == 0.0);

  // x = (1,0), y = 1, beta = 0: gradient 2(0 - 1)x = (-2, 0)
  data.labels(0) = 1;
  const Eigen::MatrixXd g = partial_gradient(LossKind::squared_error, data, {0, 1}, beta);
  CHECK(g(0, 0) == -2.0);
  CHECK(g(1, 0) == 0.0);
}

TEST_CASE("gradients match central finite differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SUBCASE("softmax") {
    Dataset data = make_classification(12, 4, 3, 1.0, 5);
    Eigen::MatrixXd beta(4, 3);
    for (int i = 0; i < beta.size(); ++i) beta(i % 4, i / 4) = 0.3 * gauss(rng);
    const ChunkRange chunk{2, 9};
    const Eigen::MatrixXd g = partial_gradient(LossKind::softmax, data, chunk, beta);
    const Eigen::MatrixXd fd = fd_gradient(LossKind::softmax, data, chunk, beta);
    CHECK((g - fd).norm() < 1e-5 * std::max(1.0, fd.norm()));
  }
  SUBCASE("squared error") {
    Dataset data = make_regression(10, 5, 0.5, 6);
    Eigen::MatrixXd beta(5, 1);
    for (int i = 0; i < 5; ++i) beta(i, 0) = 0.5 * gauss(rng);
    const ChunkRange chunk{0, 10};
    const Eigen::MatrixXd g = partial_gradient(LossKind::squared_error, data, chunk, beta);
    const Eigen::MatrixXd fd = fd_gradient(LossKind::squared_error, data, chunk, beta);
    CHECK((g - fd).norm() < 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("partial gradients add up to the full gradient") {
  Dataset data = make_classification(37, 6, 3, 1.0, 9);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(6, 3, 0.1);
  const Eigen::MatrixXd whole = partial_gradient(LossKind::softmax, data, {0, 37}, beta);
  const Partition part = partition(37, 5);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(6, 3);
  for (const auto& chunk : part.chunks)
    sum += partial_gradient(LossKind::softmax, data, chunk, beta);
  CHECK((sum - whole).norm() < 1e-10 * std::max(1.0, whole.norm()));
}

TEST_CASE("partial gradient argument checks") {
  Dataset data = make_regression(6, 2, 0.1, 4);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(2, 1);
  CHECK_THROWS_AS(partial_gradient(LossKind::squared_error, data, {3, 3}, beta),
                  std::invalid_argument);
  CHECK_THROWS_AS(partial_gradient(LossKind::squared_error, data, {0, 7}, beta),
                  std::invalid_argument);
  Eigen::MatrixXd wide = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(partial_gradient(LossKind::squared_error, data, {0, 6}, wide),
                  std::invalid_argument);
  CHECK_THROWS_AS(partial_gradient(LossKind::softmax, data, {0, 6}, beta), std::invalid_argument);
}

TEST_CASE("worker_output combines partials along the mask row") {
  const EncodingMatrix code = encoding_matrix(8, 4, 3);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int p = 5;
  Eigen::MatrixXd g(4, p);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = gauss(rng);

  SUBCASE("stacking worker outputs reproduces C = B g") {
    Eigen::MatrixXcd stacked(8, p);
    for (int i = 0; i < 8; ++i) {
      const std::vector<int> support = code.mask.row_support(i);
      Eigen::MatrixXd partials(static_cast<int>(support.size()), p);
      for (std::size_t s = 0; s < support.size(); ++s)
        partials.row(static_cast<Eigen::Index>(s)) = g.row(support[s]);
      stacked.row(i) = worker_output(code.entries.row(i), support, partials);
    }
    const Eigen::MatrixXcd dense = code.entries * g.cast<Complex>();
    CHECK((stacked - dense).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("all-ones row sums every partial") {
    const Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Ones(4);
    const std::vector<int> support{0, 1, 2, 3};
    const Eigen::RowVectorXcd out = worker_output(row, support, g);
    CHECK((out.real() - g.colwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(out.imag().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("one-hot row with unit coefficient returns that partial") {
    Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(4);
    row(2) = 1.0;
    const std::vector<int> support{2};
    const Eigen::RowVectorXcd out = worker_output(row, support, g.row(2));
    CHECK((out.real() - g.row(2)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("support mismatch is rejected") {
    const Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Ones(4);
    const std::vector<int> support{0, 1};  // row is nonzero at 2, 3 as well
    Eigen::MatrixXd partials(2, p);
    partials << g.row(0), g.row(1);
    CHECK_THROWS_AS(worker_output(row, support, partials), std::invalid_argument);
    const std::vector<int> full{0, 1, 2, 3};
    CHECK_THROWS_AS(worker_output(row, full, partials), std::invalid_argument);
  }
}

TEST_CASE("master_step mechanics") {
  SUBCASE("zero momentum reduces to plain gradient descent") {
    ModelState state = initial_state(2, 1, 0.1, 0.0);
    Eigen::MatrixXd g(2, 1);
    g << 1.0, -2.0;
    state = master_step(state, g);
    CHECK(state.beta(0, 0) == doctest::Approx(-0.1));
    CHECK(state.beta(1, 0) == doctest::Approx(0.2));
  }
  SUBCASE("zero gradient with zero velocity leaves the state unchanged") {
    ModelState state = initial_state(3, 2, 0.1, 0.9);
    const ModelState next = master_step(state, Eigen::MatrixXd::Zero(3, 2));
    CHECK((next.beta - state.beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK((next.velocity - state.velocity).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("non-finite gradient aborts") {
    ModelState state = initial_state(1, 1, 0.1, 0.9);
    Eigen::MatrixXd g(1, 1);
    g << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(master_step(state, g), numerical_error);
  }
  SUBCASE("1-D quadratic converges to the minimizer") {
    // loss (beta - 3)^2 via a single point x = 1, y = 3
    Dataset data;
    data.features = Eigen::MatrixXd::Ones(1, 1);
    data.labels = Eigen::VectorXd::Constant(1, 3.0);
    ModelState state = initial_state(1, 1, 0.05, 0.9);
    for (int it = 0; it < 1000; ++it) {
      const Eigen::MatrixXd g =
          partial_gradient(LossKind::squared_error, data, {0, 1}, lookahead_point(state));
      state = master_step(state, g);
    }
    CHECK(std::abs(state.beta(0, 0) - 3.0) < 1e-6);
  }
}

TEST_CASE("synthetic datasets are seeded and shaped as requested") {
  const Dataset a = make_classification(30, 4, 3, 1.0, 42);
  const Dataset b = make_classification(30, 4, 3, 1.0, 42);
  const Dataset c = make_classification(30, 4, 3, 1.0, 43);
  CHECK(a.size() == 30);
  CHECK(a.dim() == 4);
  CHECK(a.num_classes == 3);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 0.0);
  for (int i = 0; i < a.size(); ++i) CHECK(a.labels(i) == i % 3);

  const Dataset r = make_regression(20, 3, 0.1, 7);
  CHECK(r.num_classes == 1);
  CHECK(r.size() == 20);
  CHECK_THROWS_AS(make_classification(10, 2, 1, 1.0, 0), std::invalid_argument);
}

TEST_CASE("csv round trip preserves data and infers classes") {
  const Dataset data = make_classification(15, 3, 3, 1.0, 8);
  std::ostringstream os;
  write_csv(os, data);
  const std::string path = "test_training_tmp.csv";
  {
    std::ofstream file(path);
    file << os.str();
  }
  const Dataset back = read_csv(path);
  std::remove(path.c_str());
  CHECK(back.size() == data.size());
  CHECK(back.dim() == data.dim());
  CHECK(back.num_classes == 3);
  CHECK((back.features - data.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.labels - data.labels).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(read_csv("does_not_exist.csv"), std::invalid_argument);
}
