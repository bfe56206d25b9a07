#pragma once

#include "mppi/types.hpp"

namespace mppi {

/// Savitzky-Golay smoothing kernel: the centre-point evaluation weights of
/// a least-squares polynomial fit over a symmetric window.
struct SGFilter {
  int window{9};
  int degree{3};
  Vec coeffs;  // window entries, symmetric, sum to 1
};

/// Builds the convolution kernel for the given window/degree. window must
/// be odd and > degree.
SGFilter sg_coefficients(int window, int degree);

/// Convolves each column of `seq` with the kernel, mirror-padding the
/// sequence ends. Output length equals input length.
Mat sg_smooth(const Mat& seq, const SGFilter& filter);

}  // namespace mppi
