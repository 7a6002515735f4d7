#include "chebcon/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chebcon/errors.hpp"

namespace chebcon {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw InvalidInterval("invalid interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

ChebProxy::ChebProxy(Interval interval, std::vector<double> coeffs)
    : interval_(interval), coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw InvalidDegree("a proxy needs at least one coefficient");
}

double ChebProxy::operator()(double x) const { return cheb_eval(*this, x); }

namespace {

// cos(k pi / m) written as a sine of a symmetric argument so that mirrored
// nodes are exact negatives and the midpoint is exactly zero.
double lobatto_unit(std::size_t k, std::size_t m) {
  const double num = static_cast<double>(m) - 2.0 * static_cast<double>(k);
  return std::sin(std::numbers::pi * num / (2.0 * static_cast<double>(m)));
}

}  // namespace

std::vector<double> cheb_nodes(std::size_t m, const Interval& interval) {
  if (m < 1) throw InvalidDegree("cheb_nodes requires degree >= 1");
  std::vector<double> nodes(m + 1);
  for (std::size_t k = 0; k <= m; ++k) nodes[k] = interval.from_unit(lobatto_unit(k, m));
  // Pin the endpoints against round-off in the affine map.
  nodes.front() = interval.hi();
  nodes.back() = interval.lo();
  return nodes;
}

std::vector<double> cheb_coeffs(std::span<const double> values) {
  if (values.size() < 2) throw InvalidDegree("cheb_coeffs needs at least two node values");
  const std::size_t m = values.size() - 1;
  const double md = static_cast<double>(m);

  // cos(q pi / m) for q in [0, 2m); j*k is reduced modulo 2m.
  std::vector<double> cosines(2 * m);
  for (std::size_t q = 0; q < 2 * m; ++q) cosines[q] = std::cos(std::numbers::pi * static_cast<double>(q) / md);

  std::vector<double> c(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const double sign_m = (j % 2 == 0) ? 1.0 : -1.0;
    double sum = 0.0;
    for (std::size_t k = 1; k < m; ++k) sum += values[k] * cosines[(j * k) % (2 * m)];
    c[j] = (values[0] + values[m] * sign_m) / md + 2.0 * sum / md;
  }
  c.front() *= 0.5;
  c.back() *= 0.5;
  return c;
}

double cheb_eval(const ChebProxy& proxy, double x) {
  const Interval& iv = proxy.interval();
  const double tol = kEndpointTolerance * (1.0 + std::max(std::abs(iv.lo()), std::abs(iv.hi())));
  if (!iv.contains(x, tol)) {
    throw DomainError("evaluation point " + std::to_string(x) + " outside [" + std::to_string(iv.lo()) + ", " +
                      std::to_string(iv.hi()) + "]");
  }
  const double s = std::clamp(iv.to_unit(x), -1.0, 1.0);
  const auto& c = proxy.coeffs();
  double b1 = 0.0;
  double b2 = 0.0;
  for (std::size_t j = c.size() - 1; j >= 1; --j) {
    const double b0 = c[j] + 2.0 * s * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return c[0] + s * b1 - b2;
}

ChebProxy adaptive_interpolate(ObjectiveFn& f, const Interval& interval, double eps1,
                               const AdaptiveOptions& options) {
  if (!(eps1 > 0.0)) throw Error("adaptive_interpolate requires eps1 > 0");
  if (options.start_degree < 1) throw InvalidDegree("start degree must be >= 1");
  const double tol = kEndpointTolerance * (1.0 + std::max(std::abs(interval.lo()), std::abs(interval.hi())));
  if (!f.domain().contains(interval.lo(), tol) || !f.domain().contains(interval.hi(), tol)) {
    throw DomainError("interpolation interval is not inside the objective's domain");
  }

  std::size_t m = options.start_degree;
  std::vector<double> values;
  values.reserve(m + 1);
  for (double x : cheb_nodes(m, interval)) values.push_back(f(x));

  for (;;) {
    ChebProxy proxy(interval, cheb_coeffs(values));

    // Odd-indexed nodes of degree 2m are the ones degree m does not have.
    std::vector<double> fresh(m);
    double residual = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double x = interval.from_unit(lobatto_unit(2 * k + 1, 2 * m));
      fresh[k] = f(x);
      residual = std::max(residual, std::abs(fresh[k] - cheb_eval(proxy, x)));
    }
    if (residual <= eps1) return proxy;

    if (2 * m > options.max_degree) {
      throw NonConvergence("adaptive interpolation exceeded degree cap " + std::to_string(options.max_degree) +
                               " (last residual " + std::to_string(residual) + ")",
                           residual, m);
    }
    std::vector<double> merged(2 * m + 1);
    for (std::size_t k = 0; k <= m; ++k) merged[2 * k] = values[k];
    for (std::size_t k = 0; k < m; ++k) merged[2 * k + 1] = fresh[k];
    values = std::move(merged);
    m *= 2;
  }
}

std::vector<double> pad_to(std::span<const double> v, std::size_t n) {
  std::vector<double> out(std::max(n, v.size()), 0.0);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

ChebProxy proxy_average(std::span<const ChebProxy> proxies) {
  if (proxies.empty()) throw Error("proxy_average of an empty set");
  const Interval iv = proxies.front().interval();
  const double tol = 1e-12 * (1.0 + std::max(std::abs(iv.lo()), std::abs(iv.hi())));
  std::size_t len = 0;
  for (const auto& p : proxies) {
    if (std::abs(p.interval().lo() - iv.lo()) > tol || std::abs(p.interval().hi() - iv.hi()) > tol) {
      throw Error("proxy_average: proxies are defined on different intervals");
    }
    len = std::max(len, p.coeffs().size());
  }
  std::vector<double> sum(len, 0.0);
  for (const auto& p : proxies) {
    for (std::size_t j = 0; j < p.coeffs().size(); ++j) sum[j] += p.coeffs()[j];
  }
  const double n = static_cast<double>(proxies.size());
  for (double& c : sum) c /= n;
  return ChebProxy(iv, std::move(sum));
}

}  // namespace chebcon
