// Chebyshev interpolants of univariate functions on a closed interval.
//
// A proxy stores coefficients c_0..c_m of
//
//     p(x) = sum_j c_j T_j((2x - (a+b)) / (b-a)),   x in [a, b],
//
// with the end coefficients already halved, so p matches f exactly at the
// m+1 Chebyshev-Lobatto nodes it was built from.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chebcon {

// Closed interval [lo, hi] with lo < hi, both finite.
class Interval {
 public:
  Interval() : lo_(-1.0), hi_(1.0) {}
  Interval(double lo, double hi);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  double mid() const noexcept { return 0.5 * (lo_ + hi_); }

  // Affine map onto / from the reference interval [-1, 1].
  double to_unit(double x) const noexcept { return (2.0 * x - (lo_ + hi_)) / (hi_ - lo_); }
  double from_unit(double s) const noexcept { return 0.5 * (hi_ - lo_) * s + 0.5 * (lo_ + hi_); }

  bool contains(double x, double tol = 0.0) const noexcept { return x >= lo_ - tol && x <= hi_ + tol; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_;
  double hi_;
};

class ChebProxy {
 public:
  ChebProxy(Interval interval, std::vector<double> coeffs);

  const Interval& interval() const noexcept { return interval_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  std::size_t degree() const noexcept { return coeffs_.size() - 1; }

  double operator()(double x) const;

 private:
  Interval interval_;
  std::vector<double> coeffs_;
};

// A real function on its domain, counting how often it is evaluated.
class ObjectiveFn {
 public:
  ObjectiveFn(std::function<double(double)> fn, Interval domain)
      : fn_(std::move(fn)), domain_(domain) {}

  double operator()(double x) {
    ++evaluations_;
    return fn_(x);
  }

  const Interval& domain() const noexcept { return domain_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  std::function<double(double)> fn_;
  Interval domain_;
  std::size_t evaluations_ = 0;
};

// Tolerance for accepting evaluation points that round-off pushed just
// outside the interval.
inline constexpr double kEndpointTolerance = 1e-12;

// m+1 Chebyshev-Lobatto points x_k = (b-a)/2 cos(k pi/m) + (a+b)/2, k = 0..m
// (decreasing order).
std::vector<double> cheb_nodes(std::size_t m, const Interval& interval);

// Coefficients of the degree-m interpolant through values taken at
// cheb_nodes(m, .) in node order.
std::vector<double> cheb_coeffs(std::span<const double> values);

// Clenshaw evaluation. Throws DomainError when x is outside the interval.
double cheb_eval(const ChebProxy& proxy, double x);

struct AdaptiveOptions {
  std::size_t start_degree = 2;
  std::size_t max_degree = std::size_t{1} << 16;
};

// Doubles the degree from start_degree until the interpolant matches f to
// eps1 on the nodes that the next doubling would add. Every node value is
// evaluated once: the nodes of degree m are a subset of those of degree 2m.
ChebProxy adaptive_interpolate(ObjectiveFn& f, const Interval& interval, double eps1,
                               const AdaptiveOptions& options = {});

// Coefficient-wise mean, shorter vectors padded with zeros.
ChebProxy proxy_average(std::span<const ChebProxy> proxies);

// Returns v zero-padded (or unchanged) to length n.
std::vector<double> pad_to(std::span<const double> v, std::size_t n);

}  // namespace chebcon
