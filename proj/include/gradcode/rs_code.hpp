#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "gradcode/errors.hpp"
#include "gradcode/mask.hpp"

namespace gradcode {

using Complex = std::complex<double>;

// Entries below this magnitude count as structural zeros of the code.
inline constexpr double kSupportTol = 1e-12;

// e^{2*pi*i/n}; the generator of the n evaluation points.
Complex primitive_root(int n);

// alpha^0 .. alpha^{n-1}, each computed from its reduced angle.
Eigen::VectorXcd root_powers(int n);

// G(i, m) = alpha^{i*m}: the n x f evaluation matrix of monomials on the
// roots of unity.  Any f of its rows are invertible.
Eigen::MatrixXcd vandermonde(int n, int f);

// Precomputed (1 - alpha^i)^{-1} for i = 1..n-1; the whole decode works off
// lookups into this table.
struct InverseTable {
  int n = 0;
  Eigen::VectorXcd values;  // values[i-1] = 1 / (1 - alpha^i)

  const Complex& at(int i) const {
    if (i < 1 || i >= n) throw std::out_of_range("InverseTable::at: index must lie in [1, n-1]");
    return values(i - 1);
  }
};

InverseTable inverse_table(int n);

// Complex n x k matrix B realizing a mask: column j holds the evaluations of
// a polynomial t_j of degree <= f-1 with t_j(0) = 1 that vanishes exactly on
// the mask zeros of column j.  Each row prescribes one worker's linear
// combination of partial gradients.
struct EncodingMatrix {
  CodeParams params;
  MaskMatrix mask;
  Complex alpha;
  Eigen::MatrixXcd entries;      // B, n x k
  Eigen::MatrixXcd poly_coeffs;  // T, f x k; B = G * T and T's first row is all ones
};

EncodingMatrix encoding_matrix(const CodeParams& params, const MaskMatrix& mask);
EncodingMatrix encoding_matrix(int n, int k, int w);

struct DecodeCounters {
  std::int64_t lookups = 0;
  std::int64_t multiplications = 0;
};

// Coefficients a_F combining the survivors' coded rows back into the plain
// sum: a_F * B_F = 1_{1 x k}.
struct DecodingVector {
  std::vector<int> survivors;  // strictly increasing worker indices
  Eigen::VectorXcd coeffs;     // a_F
};

/// a_F[l] = prod_{j != l} (1 - alpha^{i_l - i_j})^{-1}, every factor fetched
/// from the table at exponent (i_l - i_j) mod n.  Exactly f(f-1) lookups and
/// f(f-1) complex multiplications; pass counters to audit that contract.
DecodingVector decoding_vector(std::span<const int> survivors, const InverseTable& table,
                               DecodeCounters* counters = nullptr);

/// Re(a_F * C_F), where C_F stacks the survivors' coded outputs in the order
/// of decoding.survivors.  The imaginary part must stay below tol relative to
/// the cancellation scale sum_l |a_l| |C_lj| of each column; more than that
/// cannot come from roundoff and signals a numerical breakdown of the decode.
template <class Derived>
Eigen::VectorXd recover_gradient(const Eigen::MatrixBase<Derived>& coded_rows,
                                 const DecodingVector& decoding, double tol = 1e-8) {
  const auto f = static_cast<Eigen::Index>(decoding.survivors.size());
  if (coded_rows.rows() != f)
    throw std::invalid_argument("recover_gradient: row count does not match the survivor set");
  Eigen::RowVectorXcd combined = decoding.coeffs.transpose() * coded_rows;
  if (combined.size() == 0) return Eigen::VectorXd();
  const Eigen::RowVectorXd scale =
      decoding.coeffs.cwiseAbs().transpose() * coded_rows.cwiseAbs();
  for (Eigen::Index j = 0; j < combined.size(); ++j)
    if (std::abs(combined(j).imag()) > tol * std::max(scale(j), 1e-300))
      throw numerical_error("recover_gradient: imaginary residual above tolerance");
  return combined.real().transpose();
}

// Text format for golden files: one "n k w" header line, then the entries of
// B row-major as "re,im" pairs at full precision.
void write_encoding_matrix(std::ostream& os, const EncodingMatrix& code);
EncodingMatrix read_encoding_matrix(std::istream& is);

}  // namespace gradcode
