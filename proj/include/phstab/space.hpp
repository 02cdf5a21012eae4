#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <utility>

namespace phstab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Finite-dimensional model of an orthogonally decomposed state space
/// H = H0 (+) H1, with coordinates laid out as (x0-block, x1-block).
struct SpaceDecomposition {
  int n0 = 1;
  int n1 = 1;

  SpaceDecomposition(int n0_, int n1_) : n0(n0_), n1(n1_) {
    if (n0 < 1 || n1 < 1) {
      throw std::invalid_argument("SpaceDecomposition: n0 and n1 must be >= 1");
    }
  }

  int dim() const { return n0 + n1; }

  bool operator==(const SpaceDecomposition& o) const {
    return n0 == o.n0 && n1 == o.n1;
  }
};

/// Orthogonal projection onto block 0 or block 1, returned as a full-length
/// vector with the complementary block zeroed.
inline Vector project(const SpaceDecomposition& space, const Vector& x,
                      int block) {
  if (x.size() != space.dim()) {
    throw std::invalid_argument(
        "project: state has length " + std::to_string(x.size()) +
        ", decomposition expects " + std::to_string(space.dim()));
  }
  if (block != 0 && block != 1) {
    throw std::invalid_argument("project: block index must be 0 or 1");
  }
  Vector out = Vector::Zero(x.size());
  if (block == 0) {
    out.head(space.n0) = x.head(space.n0);
  } else {
    out.tail(space.n1) = x.tail(space.n1);
  }
  return out;
}

/// The four blocks of A = D - R acting on H0 (+) H1:
///
///   A = [ -R0  D0 ]
///       [  D1 -R1 ]
///
/// R is block diagonal (resistance), D purely off-diagonal (coupling).
class BlockOperator {
 public:
  BlockOperator(Matrix R0, Matrix R1, Matrix D0, Matrix D1)
      : r0_(std::move(R0)),
        r1_(std::move(R1)),
        d0_(std::move(D0)),
        d1_(std::move(D1)) {
    if (r0_.rows() != r0_.cols() || r1_.rows() != r1_.cols()) {
      throw std::invalid_argument("BlockOperator: R0 and R1 must be square");
    }
    const auto n0 = r0_.rows();
    const auto n1 = r1_.rows();
    if (d0_.rows() != n0 || d0_.cols() != n1 || d1_.rows() != n1 ||
        d1_.cols() != n0) {
      throw std::invalid_argument(
          "BlockOperator: D0 must be n0 x n1 and D1 must be n1 x n0");
    }
  }

  const Matrix& r0() const { return r0_; }
  const Matrix& r1() const { return r1_; }
  const Matrix& d0() const { return d0_; }
  const Matrix& d1() const { return d1_; }

  SpaceDecomposition space() const {
    return SpaceDecomposition(static_cast<int>(r0_.rows()),
                              static_cast<int>(r1_.rows()));
  }

  /// Dense A = D - R.
  Matrix assemble() const {
    const auto n0 = r0_.rows();
    const auto n1 = r1_.rows();
    Matrix a(n0 + n1, n0 + n1);
    a.topLeftCorner(n0, n0) = -r0_;
    a.topRightCorner(n0, n1) = d0_;
    a.bottomLeftCorner(n1, n0) = d1_;
    a.bottomRightCorner(n1, n1) = -r1_;
    return a;
  }

  /// Off-diagonal part D as a dense matrix.
  Matrix d_part() const {
    const auto n0 = r0_.rows();
    const auto n1 = r1_.rows();
    Matrix d = Matrix::Zero(n0 + n1, n0 + n1);
    d.topRightCorner(n0, n1) = d0_;
    d.bottomLeftCorner(n1, n0) = d1_;
    return d;
  }

  /// Block-diagonal resistance part R.
  Matrix r_part() const {
    const auto n0 = r0_.rows();
    const auto n1 = r1_.rows();
    Matrix r = Matrix::Zero(n0 + n1, n0 + n1);
    r.topLeftCorner(n0, n0) = r0_;
    r.bottomRightCorner(n1, n1) = r1_;
    return r;
  }

  /// True iff D1 == -D0^T exactly (the skew-coupled port-Hamiltonian case).
  bool skew_coupled() const { return d1_ == (-d0_.transpose()).eval(); }

 private:
  Matrix r0_, r1_, d0_, d1_;
};

/// Inverse of assemble(): recover the four blocks from a dense matrix.
inline BlockOperator split_blocks(const Matrix& a,
                                  const SpaceDecomposition& space) {
  if (a.rows() != space.dim() || a.cols() != space.dim()) {
    throw std::invalid_argument("split_blocks: matrix does not match space");
  }
  const int n0 = space.n0;
  const int n1 = space.n1;
  return BlockOperator(-a.topLeftCorner(n0, n0), -a.bottomRightCorner(n1, n1),
                       a.topRightCorner(n0, n1), a.bottomLeftCorner(n1, n0));
}

/// e^{tA} by scaling-and-squaring on the dense matrix.
inline Matrix semigroup(const Matrix& a, double t) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("semigroup: matrix must be square");
  }
  if (t < 0.0) {
    throw std::invalid_argument("semigroup: t must be >= 0");
  }
  return (t * a).exp();
}

/// S(t) x = e^{tA} x.
inline Vector semigroup_apply(const Matrix& a, double t, const Vector& x) {
  if (a.cols() != x.size()) {
    throw std::invalid_argument("semigroup_apply: dimension mismatch");
  }
  return semigroup(a, t) * x;
}

/// Damped wave chain of length m: skew coupling D1 = -D0^T through the
/// bidiagonal difference matrix K (1 on the diagonal, -1 on the subdiagonal)
/// with diagonal resistance on both blocks.
inline BlockOperator build_damped_wave_chain(int m, double r_q, double r_p,
                                             double k) {
  if (m < 1) {
    throw std::invalid_argument("build_damped_wave_chain: m must be >= 1");
  }
  Matrix kmat = Matrix::Identity(m, m);
  for (int i = 1; i < m; ++i) {
    kmat(i, i - 1) = -1.0;
  }
  Matrix d0 = k * kmat;
  return BlockOperator(r_q * Matrix::Identity(m, m),
                       r_p * Matrix::Identity(m, m), d0, -d0.transpose());
}

}  // namespace phstab
