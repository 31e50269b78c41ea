#include <doctest.h>

#include <set>

#include "gradcode/mask.hpp"

using namespace gradcode;

namespace {

// Row weights predicted for row_balanced_mask: rows in the cyclic window
// {t, ..., (t + kd - 1) mod n} carry ceil(kd/n), the rest floor(kd/n).
int expected_row_weight(int n, int k, int d, int t, int row) {
  const long long kd = static_cast<long long>(k) * d;
  const long long floor_w = kd / n;
  const long long heavy = kd % n;  // size of the wrap window
  if (heavy == 0) return static_cast<int>(floor_w);
  const int offset = static_cast<int>(((row - t) % n + n) % n);
  return static_cast<int>(offset < heavy ? floor_w + 1 : floor_w);
}

bool same(const Eigen::MatrixXi& a, const Eigen::MatrixXi& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("straggler_budget arithmetic") {
  const CodeParams p = straggler_budget(8, 4, 3);
  CHECK(p.s == 5);
  CHECK(p.f == 3);

  const CodeParams q = straggler_budget(10, 5, 3);
  CHECK(q.s == 5);
  CHECK(q.f == 5);

  // w = k: every worker holds all chunks, a single returner decodes
  for (int n : {1, 3, 7, 12}) {
    const CodeParams r = straggler_budget(n, 4, 4);
    CHECK(r.s == n - 1);
    CHECK(r.f == 1);
  }

  CHECK_THROWS_AS(straggler_budget(3, 4, 1), std::invalid_argument);  // floor(3/4) = 0
  CHECK_THROWS_AS(straggler_budget(8, 4, 5), std::invalid_argument);  // w > k
  CHECK_THROWS_AS(straggler_budget(8, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(straggler_budget(0, 4, 2), std::invalid_argument);
}

TEST_CASE("row_balanced_mask reproduces the 8x4 weight-6 pattern") {
  const MaskMatrix m = row_balanced_mask(8, 4, 6, 0);
  Eigen::MatrixXi expected(8, 4);
  expected << 1, 1, 1, 0,
              1, 1, 1, 0,
              1, 1, 0, 1,
              1, 1, 0, 1,
              1, 0, 1, 1,
              1, 0, 1, 1,
              0, 1, 1, 1,
              0, 1, 1, 1;
  CHECK(same(m.entries, expected));
  CHECK((m.col_weights().array() == 6).all());
}

TEST_CASE("row_balanced_mask corner cases") {
  SUBCASE("d = n forces a full column") {
    for (int n : {1, 2, 5, 9}) {
      const MaskMatrix m = row_balanced_mask(n, 1, n, 0);
      CHECK((m.entries.array() == 1).all());
    }
  }
  SUBCASE("(5,2,2,1): supports {1,2} and {3,4}, row weights (0,1,1,1,1)") {
    const MaskMatrix m = row_balanced_mask(5, 2, 2, 1);
    Eigen::MatrixXi expected(5, 2);
    expected << 0, 0,
                1, 0,
                1, 0,
                0, 1,
                0, 1;
    CHECK(same(m.entries, expected));
  }
  SUBCASE("rejects bad arguments") {
    CHECK_THROWS_AS(row_balanced_mask(4, 2, 5, 0), std::invalid_argument);  // d > n
    CHECK_THROWS_AS(row_balanced_mask(4, 2, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(row_balanced_mask(0, 2, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(row_balanced_mask(4, 0, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(row_balanced_mask(4, 2, 2, 4), std::invalid_argument);  // t out of range
    CHECK_THROWS_AS(row_balanced_mask(4, 2, 2, -1), std::invalid_argument);
  }
}

TEST_CASE("row_balanced_mask row weights match the shift-window formula exhaustively") {
  for (int n = 1; n <= 24; ++n)
    for (int k = 1; k <= n; ++k)
      for (int d = 1; d <= n; ++d)
        for (int t : {0, 1, n / 2, n - 1}) {
          if (t >= n) continue;
          const MaskMatrix m = row_balanced_mask(n, k, d, t);
          const Eigen::VectorXi weights = m.row_weights();
          for (int i = 0; i < n; ++i) {
            INFO("n=", n, " k=", k, " d=", d, " t=", t, " row=", i);
            CHECK(weights(i) == expected_row_weight(n, k, d, t, i));
          }
        }
}

TEST_CASE("mask_matrix equals row_balanced_mask when k divides nw") {
  const MaskMatrix general = mask_matrix(8, 4, 3);
  const MaskMatrix direct = row_balanced_mask(8, 4, 6, 0);
  CHECK(same(general.entries, direct.entries));

  const MaskMatrix g2 = mask_matrix(12, 6, 4);
  const MaskMatrix d2 = row_balanced_mask(12, 6, 8, 0);
  CHECK(same(g2.entries, d2.entries));
}

TEST_CASE("mask_matrix (5,3,2): hand-run of the two-block construction") {
  // k_h = 1, d_h = 4, k_l = 2, d_l = 3, t = 4
  const MaskMatrix m = mask_matrix(5, 3, 2);
  Eigen::MatrixXi expected(5, 3);
  expected << 1, 1, 0,
              1, 1, 0,
              1, 0, 1,
              1, 0, 1,
              0, 1, 1;
  CHECK(same(m.entries, expected));
  CHECK((m.row_weights().array() == 2).all());
  CHECK(m.col_weights()(0) == 4);
  CHECK(m.col_weights()(1) == 3);
  CHECK(m.col_weights()(2) == 3);
}

TEST_CASE("mask_matrix (n,n,1) is a permutation pattern") {
  for (int n : {2, 5, 8}) {
    const MaskMatrix m = mask_matrix(n, n, 1);
    CHECK((m.row_weights().array() == 1).all());
    CHECK((m.col_weights().array() == 1).all());
  }
}

TEST_CASE("mask_matrix balance holds across the parameter grid") {
  for (int n = 2; n <= 20; ++n)
    for (int k = 1; k <= n + 2; ++k)
      for (int w = 1; w <= k; ++w) {
        if (static_cast<long long>(n) * w / k < 1) continue;
        const MaskMatrix m = mask_matrix(n, k, w);
        const int d_floor = static_cast<int>(static_cast<long long>(n) * w / k);
        const int d_ceil = static_cast<int>((static_cast<long long>(n) * w + k - 1) / k);
        INFO("n=", n, " k=", k, " w=", w);
        CHECK((m.row_weights().array() == w).all());
        CHECK((m.col_weights().array() >= d_floor).all());
        CHECK((m.col_weights().array() <= d_ceil).all());
      }
}

TEST_CASE("heavy/light block alignment: light rows of M_h match heavy rows of M_l") {
  for (int n = 3; n <= 20; ++n)
    for (int k = 2; k <= n; ++k)
      for (int w = 1; w <= k; ++w) {
        const long long nw = static_cast<long long>(n) * w;
        const int k_heavy = static_cast<int>(nw % k);
        const int d_light = static_cast<int>(nw / k);
        if (k_heavy == 0 || d_light < 1) continue;
        const int d_heavy = d_light + 1;
        const int k_light = k - k_heavy;
        const int t = static_cast<int>(static_cast<long long>(k_heavy) * d_heavy % n);
        const MaskMatrix heavy = row_balanced_mask(n, k_heavy, d_heavy, 0);
        const MaskMatrix light = row_balanced_mask(n, k_light, d_light, t);

        const long long hw = static_cast<long long>(k_heavy) * d_heavy;
        if (hw % n == 0) continue;  // degenerate: both blocks uniform
        int light_rows_of_heavy = 0, heavy_rows_of_light = 0;
        const Eigen::VectorXi wh = heavy.row_weights();
        const Eigen::VectorXi wl = light.row_weights();
        for (int i = 0; i < n; ++i) {
          if (wh(i) == hw / n) ++light_rows_of_heavy;
          if (wl(i) == static_cast<long long>(k_light) * d_light / n + 1) ++heavy_rows_of_light;
        }
        INFO("n=", n, " k=", k, " w=", w);
        CHECK(light_rows_of_heavy == heavy_rows_of_light);
      }
}

TEST_CASE("mask_matrix rejects bad arguments") {
  CHECK_THROWS_AS(mask_matrix(8, 4, 5), std::invalid_argument);  // w > k
  CHECK_THROWS_AS(mask_matrix(8, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(mask_matrix(8, 4, -1), std::invalid_argument);
  CHECK_THROWS_AS(mask_matrix(3, 4, 1), std::invalid_argument);  // floor(nw/k) = 0
}

TEST_CASE("mask text grid round-trips and matches the frozen golden") {
  const MaskMatrix m = row_balanced_mask(8, 4, 6, 0);
  const std::string text = to_text(m);
  CHECK(text ==
        "1110\n"
        "1110\n"
        "1101\n"
        "1101\n"
        "1011\n"
        "1011\n"
        "0111\n"
        "0111\n");
  const MaskMatrix back = mask_from_text(text);
  CHECK(same(back.entries, m.entries));

  CHECK_THROWS_AS(mask_from_text(""), std::invalid_argument);
  CHECK_THROWS_AS(mask_from_text("10\n1\n"), std::invalid_argument);
  CHECK_THROWS_AS(mask_from_text("1x\n10\n"), std::invalid_argument);
}
