#include "eclat/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eclat::numeric {

Minimum golden_section(const std::function<double(double)>& f, double lo,
                       double hi, double rel_tol, double abs_floor,
                       int max_iter) {
  if (!(lo < hi)) throw std::invalid_argument("golden_section: empty bracket");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iter; ++it) {
    const double scale = std::max({std::abs(c), std::abs(d), abs_floor});
    if (b - a <= rel_tol * scale) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc <= fd) return {c, fc, it};
  return {d, fd, it};
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double* error_estimate) {
  if (a == b) {
    if (error_estimate) *error_estimate = 0.0;
    return 0.0;
  }
  double err = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          f, a, b, 20, rel_tol, &err);
  if (error_estimate) *error_estimate = err;
  return value;
}

double binomial(int n, int j) {
  if (j < 0 || j > n) return 0.0;
  j = std::min(j, n - j);
  double c = 1.0;
  for (int i = 1; i <= j; ++i) {
    c = c * static_cast<double>(n - j + i) / static_cast<double>(i);
  }
  return c;
}

}  // namespace eclat::numeric
