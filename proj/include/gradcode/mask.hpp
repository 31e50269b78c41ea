#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gradcode {

// Scheme parameters: n workers, k data partitions, w partitions per worker.
// The construction tolerates s = floor(w*n/k) - 1 stragglers, so the master
// decodes from the fastest f = n - s workers.
struct CodeParams {
  int n = 0;
  int k = 0;
  int w = 0;
  int s = 0;
  int f = 0;

  friend bool operator==(const CodeParams&, const CodeParams&) = default;
};

CodeParams straggler_budget(int n, int k, int w);

// Binary assignment pattern: row i lists the chunks computed by worker i,
// column j lists the workers holding chunk j.
struct MaskMatrix {
  Eigen::MatrixXi entries;  // n x k over {0,1}

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
  Eigen::VectorXi row_weights() const { return entries.rowwise().sum(); }
  Eigen::VectorXi col_weights() const { return entries.colwise().sum().transpose(); }
  std::vector<int> row_support(int i) const;
};

/// Cyclic-shift mask: column j gets support {jd + t, ..., (j+1)d - 1 + t}
/// mod n.  Rows inside the wrap window {t, ..., (t + kd - 1) mod n} come out
/// with weight ceil(kd/n), the remaining rows with floor(kd/n); when n | kd
/// all rows share the weight kd/n.
MaskMatrix row_balanced_mask(int n, int k, int d, int t);

/// General construction for any 1 <= w <= k: k_h = (nw) mod k heavy columns
/// of weight ceil(nw/k) at offset 0, then k - k_h light columns of weight
/// floor(nw/k) at offset (k_h * d_h) mod n.  The offset aligns heavy rows of
/// one block with light rows of the other, so every row has weight exactly w.
MaskMatrix mask_matrix(int n, int k, int w);

// Plain text grid of '0'/'1' characters, one row per line.
std::string to_text(const MaskMatrix& mask);
MaskMatrix mask_from_text(const std::string& text);

}  // namespace gradcode
