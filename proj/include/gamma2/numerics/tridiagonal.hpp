#pragma once

#include <cmath>
#include <vector>

#include "gamma2/error.hpp"

namespace gamma2 {

struct Tridiagonal {
  std::vector<double> lower;  // size n-1, entry (i+1, i)
  std::vector<double> diag;   // size n
  std::vector<double> upper;  // size n-1, entry (i, i+1)

  std::size_t size() const { return diag.size(); }

  std::vector<double> multiply(const std::vector<double>& x) const {
    const std::size_t n = diag.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += lower[i - 1] * x[i - 1];
      if (i + 1 < n) s += upper[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }
};

// Gaussian elimination with partial pivoting (the LAPACK gtsv scheme). The
// matrix may be indefinite.
inline std::vector<double> solve(Tridiagonal m, std::vector<double> b) {
  const std::size_t n = m.diag.size();
  if (n == 0) return b;
  if (n == 1) {
    if (m.diag[0] == 0.0) throw NoConvergence("singular 1x1 system");
    b[0] /= m.diag[0];
    return b;
  }
  auto& dl = m.lower;
  auto& d = m.diag;
  auto& du = m.upper;
  std::vector<double> du2(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) throw NoConvergence("singular tridiagonal system");
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
      du2[i] = 0.0;
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double tmp = d[i + 1];
      d[i + 1] = du[i] - fact * tmp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du2[i];
      }
      du[i] = tmp;
      const double tb = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tb - fact * b[i + 1];
    }
  }
  if (d[n - 1] == 0.0) throw NoConvergence("singular tridiagonal system");
  b[n - 1] /= d[n - 1];
  b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) b[k] = (b[k] - du[k] * b[k + 1] - du2[k] * b[k + 2]) / d[k];
  return b;
}

}  // namespace gamma2
