#pragma once

#include "cclab/grid.hpp"

namespace cclab {

/// LU factorisation (Thomas algorithm) of a tridiagonal matrix with constant
/// sub-, main and super-diagonals. Factor once, then solve many right-hand
/// sides in O(n); that is the inner loop of every Crank-Nicolson solver here.
template <typename Scalar>
class ConstantTridiagonal {
 public:
  ConstantTridiagonal(Index n, Scalar sub, Scalar diag, Scalar super)
      : sub_(sub), c_prime_(n), inv_denom_(n) {
    if (n < 1) throw ArgumentError("tridiagonal system needs at least one unknown");
    Scalar denom = diag;
    for (Index i = 0; i < n; ++i) {
      if (i > 0) denom = diag - sub * c_prime_[i - 1];
      if (std::abs(denom) < 1e-300) throw ArgumentError("singular tridiagonal system");
      inv_denom_[i] = Scalar(1) / denom;
      c_prime_[i] = super * inv_denom_[i];
    }
  }

  Index size() const { return c_prime_.size(); }

  /// Solves in place: on return `rhs` holds the solution.
  void solve_in_place(Vector<Scalar>& rhs) const {
    const Index n = size();
    rhs[0] *= inv_denom_[0];
    for (Index i = 1; i < n; ++i) rhs[i] = (rhs[i] - sub_ * rhs[i - 1]) * inv_denom_[i];
    for (Index i = n - 2; i >= 0; --i) rhs[i] -= c_prime_[i] * rhs[i + 1];
  }

 private:
  Scalar sub_;
  Vector<Scalar> c_prime_;
  Vector<Scalar> inv_denom_;
};

/// y = sub*x[i-1] + diag*x[i] + super*x[i+1] with zero beyond the ends.
template <typename Scalar>
void tridiagonal_apply(const Vector<Scalar>& x, Scalar sub, Scalar diag, Scalar super,
                       Vector<Scalar>& y) {
  const Index n = x.size();
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    Scalar v = diag * x[i];
    if (i > 0) v += sub * x[i - 1];
    if (i + 1 < n) v += super * x[i + 1];
    y[i] = v;
  }
}

}  // namespace cclab
