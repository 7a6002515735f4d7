// Global minimisation of a Chebyshev proxy over its interval.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "chebcon/cheb.hpp"

namespace chebcon {

// p' in the Chebyshev basis, chain-rule factor included. A constant proxy
// yields the zero polynomial.
ChebProxy cheb_derivative(const ChebProxy& proxy);

// Real roots in the proxy's interval, sorted, from the colleague matrix of
// the trimmed coefficients. nullopt when the polynomial is identically zero.
std::optional<std::vector<double>> cheb_roots(const ChebProxy& proxy);

struct OptResult {
  double f_e_star = 0.0;
  double x_p_star = 0.0;
  double certified_gap = 0.0;  // f_e_star minus a proven lower bound
  bool grid_fallback = false;  // root finding failed; certified by subdivision only
  std::size_t cells = 0;       // subdivision cells examined
};

OptResult minimize_proxy(const ChebProxy& proxy, double eps3);

}  // namespace chebcon
