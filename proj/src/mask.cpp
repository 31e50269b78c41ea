#include "gradcode/mask.hpp"

#include <sstream>
#include <stdexcept>

namespace gradcode {

CodeParams straggler_budget(int n, int k, int w) {
  if (n < 1) throw std::invalid_argument("straggler_budget: n must be positive");
  if (k < 1) throw std::invalid_argument("straggler_budget: k must be positive");
  if (w < 1 || w > k) throw std::invalid_argument("straggler_budget: w must satisfy 1 <= w <= k");
  const int s = static_cast<int>(static_cast<long long>(w) * n / k) - 1;
  if (s < 0)
    throw std::invalid_argument(
        "straggler_budget: floor(w*n/k) = 0, so s = floor(w*n/k) - 1 < 0 and no scheme exists");
  CodeParams p;
  p.n = n;
  p.k = k;
  p.w = w;
  p.s = s;
  p.f = n - s;
  return p;
}

std::vector<int> MaskMatrix::row_support(int i) const {
  std::vector<int> support;
  for (int j = 0; j < cols(); ++j)
    if (entries(i, j) != 0) support.push_back(j);
  return support;
}

MaskMatrix row_balanced_mask(int n, int k, int d, int t) {
  if (n < 1 || k < 1)
    throw std::invalid_argument("row_balanced_mask: dimensions must be positive");
  if (d < 1 || d > n)
    throw std::invalid_argument("row_balanced_mask: column weight d must satisfy 1 <= d <= n");
  if (t < 0 || t >= n)
    throw std::invalid_argument("row_balanced_mask: offset t must lie in [0, n)");
  MaskMatrix m;
  m.entries = Eigen::MatrixXi::Zero(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < d; ++i) {
      const int r = static_cast<int>((static_cast<long long>(j) * d + i + t) % n);
      m.entries(r, j) = 1;
    }
  return m;
}

MaskMatrix mask_matrix(int n, int k, int w) {
  if (n < 1 || k < 1) throw std::invalid_argument("mask_matrix: dimensions must be positive");
  if (w < 1) throw std::invalid_argument("mask_matrix: w must be positive");
  if (w > k) throw std::invalid_argument("mask_matrix: w cannot exceed k");
  const long long nw = static_cast<long long>(n) * w;
  const int d_light = static_cast<int>(nw / k);
  if (d_light < 1)
    throw std::invalid_argument("mask_matrix: floor(n*w/k) = 0 would leave a chunk unassigned");

  MaskMatrix m;
  const int k_heavy = static_cast<int>(nw % k);
  if (k_heavy == 0) {
    m = row_balanced_mask(n, k, d_light, 0);
  } else {
    const int d_heavy = d_light + 1;
    const int k_light = k - k_heavy;
    // k_heavy = (nw) mod k < k, so a light block always remains
    if (k_light < 1) throw std::logic_error("mask_matrix: internal: empty light block");
    const int t = static_cast<int>(static_cast<long long>(k_heavy) * d_heavy % n);
    const MaskMatrix heavy = row_balanced_mask(n, k_heavy, d_heavy, 0);
    const MaskMatrix light = row_balanced_mask(n, k_light, d_light, t);
    m.entries.resize(n, k);
    m.entries << heavy.entries, light.entries;
  }

  if ((m.row_weights().array() != w).any())
    throw std::logic_error("mask_matrix: internal: row weights did not balance to w");
  return m;
}

std::string to_text(const MaskMatrix& mask) {
  std::string out;
  out.reserve(static_cast<std::size_t>(mask.rows()) * (mask.cols() + 1));
  for (int i = 0; i < mask.rows(); ++i) {
    for (int j = 0; j < mask.cols(); ++j) out.push_back(mask.entries(i, j) ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

MaskMatrix mask_from_text(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);)
    if (!line.empty()) lines.push_back(line);
  if (lines.empty()) throw std::invalid_argument("mask_from_text: empty grid");
  const int n = static_cast<int>(lines.size());
  const int k = static_cast<int>(lines.front().size());
  MaskMatrix m;
  m.entries.resize(n, k);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(lines[i].size()) != k)
      throw std::invalid_argument("mask_from_text: ragged grid");
    for (int j = 0; j < k; ++j) {
      const char c = lines[i][j];
      if (c != '0' && c != '1') throw std::invalid_argument("mask_from_text: entries must be 0 or 1");
      m.entries(i, j) = c - '0';
    }
  }
  return m;
}

}  // namespace gradcode
