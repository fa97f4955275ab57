#pragma once

#include <span>
#include <vector>

namespace tapestry {

/// Lagrange basis weights for interpolating at x through the given nodes.
/// When x equals a node exactly the weights are exactly one-hot.
inline std::vector<double> lagrange_weights(std::span<const double> nodes, double x) {
  std::vector<double> w(nodes.size(), 1.0);
  for (std::size_t j = 0; j < nodes.size(); ++j)
    for (std::size_t m = 0; m < nodes.size(); ++m)
      if (m != j) w[j] *= (x - nodes[m]) / (nodes[j] - nodes[m]);
  return w;
}

/// Weights for `order`+1 consecutive integer nodes starting at `first`.
inline std::vector<double> lagrange_weights_uniform(int first, int order, double x) {
  std::vector<double> nodes(static_cast<std::size_t>(order) + 1);
  for (int i = 0; i <= order; ++i) nodes[static_cast<std::size_t>(i)] = first + i;
  return lagrange_weights(nodes, x);
}

}  // namespace tapestry
