#pragma once

#include <Eigen/Dense>

#include "yamabe/errors.hpp"

namespace yamabe {

// Tridiagonal matrix stored by diagonals. lower(i) multiplies x(i-1) in row i,
// upper(i) multiplies x(i+1); lower(0) and upper(n-1) are ignored.
struct Tridiagonal {
  Eigen::VectorXd lower;
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;

  Tridiagonal() = default;
  explicit Tridiagonal(Eigen::Index n)
      : lower(Eigen::VectorXd::Zero(n)),
        diag(Eigen::VectorXd::Zero(n)),
        upper(Eigen::VectorXd::Zero(n)) {}

  Eigen::Index size() const { return diag.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const Eigen::Index n = size();
    Eigen::VectorXd y = diag.cwiseProduct(x);
    if (n > 1) {
      y.head(n - 1) += upper.head(n - 1).cwiseProduct(x.tail(n - 1));
      y.tail(n - 1) += lower.tail(n - 1).cwiseProduct(x.head(n - 1));
    }
    return y;
  }

  // Thomas algorithm without pivoting; intended for the diagonally dominant
  // M-matrices produced by the radial stencils.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const Eigen::Index n = size();
    Eigen::VectorXd c(n), d(n);
    double denom = diag(0);
    if (denom == 0.0) throw NoConvergence("tridiagonal solve: zero pivot");
    c(0) = n > 1 ? upper(0) / denom : 0.0;
    d(0) = rhs(0) / denom;
    for (Eigen::Index i = 1; i < n; ++i) {
      denom = diag(i) - lower(i) * c(i - 1);
      if (denom == 0.0) throw NoConvergence("tridiagonal solve: zero pivot");
      c(i) = i + 1 < n ? upper(i) / denom : 0.0;
      d(i) = (rhs(i) - lower(i) * d(i - 1)) / denom;
    }
    Eigen::VectorXd x(n);
    x(n - 1) = d(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
    return x;
  }
};

}  // namespace yamabe
