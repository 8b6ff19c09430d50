// Central finite-difference gradient oracle used to cross-check the tape's
// analytic backward pass. Deliberately independent of the tape internals:
// it only needs a closure that maps parameter values to a scalar loss.
#pragma once

#include <cmath>
#include <vector>

#include "mgb/tensor.hpp"

namespace mgb_test {

// f rebuilds the computation from scratch for the given parameter values and
// returns the scalar loss.
template <class BuildFn>
std::vector<mgb::Tensor2> fd_gradients(const BuildFn& f,
                                       std::vector<mgb::Tensor2> params,
                                       double h = 1e-5) {
  std::vector<mgb::Tensor2> grads;
  grads.reserve(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    mgb::Tensor2 g(params[p].rows, params[p].cols);
    for (std::size_t k = 0; k < params[p].data.size(); ++k) {
      const double saved = params[p].data[k];
      params[p].data[k] = saved + h;
      const double up = f(params);
      params[p].data[k] = saved - h;
      const double down = f(params);
      params[p].data[k] = saved;
      g.data[k] = (up - down) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({1e-6, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) / scale;
}

inline double max_rel_err(const std::vector<mgb::Tensor2>& a,
                          const std::vector<mgb::Tensor2>& b) {
  double worst = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t k = 0; k < a[p].data.size(); ++k) {
      worst = std::max(worst, rel_err(a[p].data[k], b[p].data[k]));
    }
  }
  return worst;
}

}  // namespace mgb_test
