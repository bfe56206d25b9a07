#include "mppi/smoothing.hpp"

namespace mppi {

SGFilter sg_coefficients(int window, int degree) {
  if (window < 3 || window % 2 == 0) {
    throw std::invalid_argument("sg_coefficients: window must be odd and >= 3");
  }
  if (degree < 0 || degree >= window) {
    throw std::invalid_argument("sg_coefficients: need 0 <= degree < window");
  }

  const int half = window / 2;
  Mat design(window, degree + 1);
  for (int i = 0; i < window; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      design(i, j) = p;
      p *= static_cast<double>(i - half);
    }
  }
  // kernel = e0^T (X^T X)^{-1} X^T; the fitted polynomial evaluated at the
  // window centre is a fixed linear functional of the window samples.
  Vec e0 = Vec::Zero(degree + 1);
  e0[0] = 1.0;
  Vec z = (design.transpose() * design).ldlt().solve(e0);

  SGFilter f;
  f.window = window;
  f.degree = degree;
  f.coeffs = design * z;
  return f;
}

namespace {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

Mat sg_smooth(const Mat& seq, const SGFilter& filter) {
  const int n = static_cast<int>(seq.rows());
  const int m = static_cast<int>(seq.cols());
  if (n < 1) throw std::invalid_argument("sg_smooth: empty sequence");
  const int half = filter.window / 2;

  Mat out(n, m);
  for (int c = 0; c < m; ++c) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = -half; j <= half; ++j) {
        acc += filter.coeffs[j + half] * seq(reflect_index(i + j, n), c);
      }
      out(i, c) = acc;
    }
  }
  return out;
}

}  // namespace mppi
