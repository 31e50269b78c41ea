#include "gradcode/rs_code.hpp"

#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace gradcode {

namespace {

Complex unit_power(int exponent, int n) {
  // angle reduced mod n before the trig keeps high powers accurate
  return std::polar(1.0, 2.0 * std::numbers::pi * (exponent % n) / n);
}

}  // namespace

Complex primitive_root(int n) {
  if (n < 1) throw std::invalid_argument("primitive_root: n must be positive");
  return unit_power(1, n);
}

Eigen::VectorXcd root_powers(int n) {
  if (n < 1) throw std::invalid_argument("root_powers: n must be positive");
  Eigen::VectorXcd powers(n);
  for (int i = 0; i < n; ++i) powers(i) = unit_power(i, n);
  return powers;
}

Eigen::MatrixXcd vandermonde(int n, int f) {
  if (n < 1 || f < 1) throw std::invalid_argument("vandermonde: dimensions must be positive");
  Eigen::MatrixXcd g(n, f);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < f; ++m)
      g(i, m) = unit_power(static_cast<int>(static_cast<long long>(i) * m % n), n);
  return g;
}

InverseTable inverse_table(int n) {
  if (n < 1) throw std::invalid_argument("inverse_table: n must be positive");
  InverseTable table;
  table.n = n;
  table.values.resize(n > 1 ? n - 1 : 0);
  for (int i = 1; i < n; ++i) table.values(i - 1) = 1.0 / (1.0 - unit_power(i, n));
  return table;
}

EncodingMatrix encoding_matrix(const CodeParams& params, const MaskMatrix& mask) {
  const int n = params.n;
  const int k = params.k;
  const int f = params.f;
  if (mask.rows() != n || mask.cols() != k)
    throw std::invalid_argument("encoding_matrix: mask dimensions do not match params");
  for (int j = 0; j < k; ++j) {
    const int zeros = n - mask.entries.col(j).sum();
    if (zeros >= f)
      throw std::invalid_argument("encoding_matrix: column " + std::to_string(j) + " has " +
                                  std::to_string(zeros) +
                                  " zeros; at most f-1 = " + std::to_string(f - 1) +
                                  " are decodable");
  }

  EncodingMatrix code;
  code.params = params;
  code.mask = mask;
  code.alpha = primitive_root(n);
  const Eigen::VectorXcd powers = root_powers(n);
  code.entries.resize(n, k);
  code.poly_coeffs = Eigen::MatrixXcd::Zero(f, k);

  for (int j = 0; j < k; ++j) {
    std::vector<int> zero_rows;
    for (int r = 0; r < n; ++r)
      if (mask.entries(r, j) == 0) zero_rows.push_back(r);

    // t_j(x) = prod_r (x - alpha^r) / (-alpha^r) over the mask zeros.
    // Evaluating the product directly keeps the entries at the roots exact
    // zeros; with |alpha^r| = 1 each factor is (alpha^r - x) * conj(alpha^r).
    for (int i = 0; i < n; ++i) {
      Complex value = 1.0;
      for (int r : zero_rows) value *= (powers(r) - powers(i)) * std::conj(powers(r));
      code.entries(i, j) = value;
    }

    // Coefficients via (1 - conj(alpha^r) x) convolution; the constant term
    // stays exactly 1 through the recursion, so T's first row is all ones.
    std::vector<Complex> coeffs{1.0};
    for (int r : zero_rows) {
      std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
      const Complex inv_root = std::conj(powers(r));
      for (std::size_t m = 0; m < coeffs.size(); ++m) {
        next[m] += coeffs[m];
        next[m + 1] -= coeffs[m] * inv_root;
      }
      coeffs = std::move(next);
    }
    for (std::size_t m = 0; m < coeffs.size(); ++m)
      code.poly_coeffs(static_cast<Eigen::Index>(m), j) = coeffs[m];
  }
  return code;
}

EncodingMatrix encoding_matrix(int n, int k, int w) {
  const CodeParams params = straggler_budget(n, k, w);
  return encoding_matrix(params, mask_matrix(n, k, w));
}

DecodingVector decoding_vector(std::span<const int> survivors, const InverseTable& table,
                               DecodeCounters* counters) {
  const int f = static_cast<int>(survivors.size());
  if (f < 1) throw std::invalid_argument("decoding_vector: survivor set is empty");
  for (int l = 0; l < f; ++l) {
    if (survivors[l] < 0 || survivors[l] >= table.n)
      throw std::invalid_argument("decoding_vector: survivor index out of range");
    if (l > 0 && survivors[l] <= survivors[l - 1])
      throw std::invalid_argument("decoding_vector: survivor indices must be strictly increasing");
  }

  DecodingVector dec;
  dec.survivors.assign(survivors.begin(), survivors.end());
  dec.coeffs.resize(f);
  const int n = table.n;
  for (int l = 0; l < f; ++l) {
    Complex acc = 1.0;
    for (int j = 0; j < f; ++j) {
      if (j == l) continue;
      int e = (survivors[l] - survivors[j]) % n;
      if (e < 0) e += n;
      const Complex& factor = table.at(e);
      if (counters) ++counters->lookups;
      acc *= factor;
      if (counters) ++counters->multiplications;
    }
    dec.coeffs(l) = acc;
  }
  return dec;
}

void write_encoding_matrix(std::ostream& os, const EncodingMatrix& code) {
  os << code.params.n << ' ' << code.params.k << ' ' << code.params.w << '\n';
  os << std::setprecision(17);
  for (int i = 0; i < code.params.n; ++i) {
    for (int j = 0; j < code.params.k; ++j) {
      if (j) os << ' ';
      os << code.entries(i, j).real() << ',' << code.entries(i, j).imag();
    }
    os << '\n';
  }
}

EncodingMatrix read_encoding_matrix(std::istream& is) {
  int n = 0, k = 0, w = 0;
  if (!(is >> n >> k >> w)) throw std::invalid_argument("read_encoding_matrix: bad header");
  const CodeParams params = straggler_budget(n, k, w);
  Eigen::MatrixXcd entries(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      std::string token;
      if (!(is >> token)) throw std::invalid_argument("read_encoding_matrix: truncated file");
      const auto comma = token.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("read_encoding_matrix: entries must be re,im pairs");
      entries(i, j) = Complex(std::stod(token.substr(0, comma)), std::stod(token.substr(comma + 1)));
    }

  MaskMatrix mask;
  mask.entries = (entries.cwiseAbs().array() > kSupportTol).cast<int>().matrix();
  // rebuild the polynomial view from the support; the stored entries stay
  // authoritative for golden comparisons
  EncodingMatrix code = encoding_matrix(params, mask);
  code.entries = std::move(entries);
  return code;
}

}  // namespace gradcode
