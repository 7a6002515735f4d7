#include "chebcon/polyopt.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "chebcon/errors.hpp"

namespace chebcon {

namespace {

constexpr double kTrim = 1e-13;
constexpr double kRealTol = 1e-7;
constexpr double kRangeTol = 1e-8;
constexpr double kDedupTol = 1e-10;
constexpr std::size_t kMaxCells = 20'000'000;

double inf_norm(const std::vector<double>& c) {
  double n = 0.0;
  for (double v : c) n = std::max(n, std::abs(v));
  return n;
}

double l1_norm(const std::vector<double>& c) {
  double n = 0.0;
  for (double v : c) n += std::abs(v);
  return n;
}

// Roots in [-1, 1] of sum_j c_j T_j(s) with nonzero c_n.
std::vector<double> unit_roots(const std::vector<double>& c) {
  const std::size_t n = c.size() - 1;
  std::vector<double> roots;
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
  } else {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    A(0, 1) = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 0.5;
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = 0.5;
    }
    const auto last = static_cast<Eigen::Index>(n - 1);
    A(last, last - 1) += 0.5;
    for (std::size_t j = 0; j < n; ++j) A(last, static_cast<Eigen::Index>(j)) -= c[j] / (2.0 * c[n]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw Error("colleague matrix eigensolve failed");
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const auto z = es.eigenvalues()[k];
      if (std::abs(z.imag()) <= kRealTol) roots.push_back(z.real());
    }
  }
  std::vector<double> inside;
  for (double r : roots) {
    if (r >= -1.0 - kRangeTol && r <= 1.0 + kRangeTol) inside.push_back(std::clamp(r, -1.0, 1.0));
  }
  return inside;
}

}  // namespace

ChebProxy cheb_derivative(const ChebProxy& proxy) {
  const auto& c = proxy.coeffs();
  const std::size_t m = c.size() - 1;
  if (m == 0) return ChebProxy(proxy.interval(), {0.0});
  std::vector<double> d(m + 2, 0.0);
  for (std::size_t j = m; j >= 1; --j) d[j - 1] = d[j + 1] + 2.0 * static_cast<double>(j) * c[j];
  d[0] *= 0.5;
  d.resize(m);
  const double scale = 2.0 / proxy.interval().width();
  for (double& v : d) v *= scale;
  return ChebProxy(proxy.interval(), std::move(d));
}

std::optional<std::vector<double>> cheb_roots(const ChebProxy& proxy) {
  std::vector<double> c = proxy.coeffs();
  const double norm = inf_norm(c);
  if (norm == 0.0) return std::nullopt;
  while (c.size() > 1 && std::abs(c.back()) < kTrim * norm) c.pop_back();

  const Interval& iv = proxy.interval();
  const ChebProxy trimmed(iv, c);
  const ChebProxy slope = cheb_derivative(trimmed);
  std::vector<double> roots;
  for (double s : unit_roots(c)) {
    // Eigenvalues lose accuracy when the leading coefficient is small.
    double x = iv.from_unit(s);
    for (int it = 0; it < 8; ++it) {
      const double f = trimmed(x);
      const double g = slope(x);
      if (f == 0.0 || g == 0.0) break;
      const double nx = std::clamp(x - f / g, iv.lo(), iv.hi());
      if (!(std::abs(trimmed(nx)) < std::abs(f))) break;
      x = nx;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (out.empty() || r - out.back() > kDedupTol * std::max(1.0, iv.width())) out.push_back(r);
  }
  return out;
}

OptResult minimize_proxy(const ChebProxy& proxy, double eps3) {
  if (!(eps3 > 0.0)) throw Error("minimize_proxy requires eps3 > 0");
  const Interval& iv = proxy.interval();
  const ChebProxy d1 = cheb_derivative(proxy);
  const ChebProxy d2 = cheb_derivative(d1);

  OptResult res;
  if (inf_norm(d1.coeffs()) == 0.0) {
    res.f_e_star = proxy.coeffs().front();
    res.x_p_star = iv.mid();
    return res;
  }

  std::vector<double> candidates{iv.lo(), iv.hi()};
  try {
    if (auto roots = cheb_roots(d1)) {
      for (double x : *roots) {
        // Bounded Newton polish on p'.
        for (int it = 0; it < 8; ++it) {
          const double g = d1(x);
          const double h = d2(x);
          if (h == 0.0) break;
          const double nx = std::clamp(x - g / h, iv.lo(), iv.hi());
          if (!(std::abs(d1(nx)) < std::abs(g))) break;
          x = nx;
        }
        candidates.push_back(x);
      }
    }
  } catch (const Error&) {
    res.grid_fallback = true;
  }

  std::sort(candidates.begin(), candidates.end());
  res.x_p_star = candidates.front();
  res.f_e_star = proxy(res.x_p_star);
  auto consider = [&](double x, double v) {
    if (v < res.f_e_star || (v == res.f_e_star && x < res.x_p_star)) {
      res.f_e_star = v;
      res.x_p_star = x;
    }
  };
  for (double x : candidates) consider(x, proxy(x));

  // Certify by subdivision: on a cell of width h, p >= min(endpoints) - M2 h^2 / 8.
  const double m2 = l1_norm(d2.coeffs());
  struct Cell {
    double u, v, pu, pv;
  };
  const std::size_t start = std::max<std::size_t>(64, 4 * proxy.coeffs().size());
  std::vector<Cell> stack;
  std::vector<double> grid(start + 1);
  for (std::size_t k = 0; k <= start; ++k) {
    grid[k] = k == start ? iv.hi() : iv.lo() + iv.width() * static_cast<double>(k) / static_cast<double>(start);
  }
  std::vector<double> vals(start + 1);
  for (std::size_t k = 0; k <= start; ++k) {
    vals[k] = proxy(grid[k]);
    consider(grid[k], vals[k]);
  }
  for (std::size_t k = start; k-- > 0;) stack.push_back({grid[k], grid[k + 1], vals[k], vals[k + 1]});

  double lower = res.f_e_star;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    ++res.cells;
    const double h = c.v - c.u;
    const double lb = std::min(c.pu, c.pv) - m2 * h * h / 8.0;
    const double mid = 0.5 * (c.u + c.v);
    if (lb >= res.f_e_star - eps3 || !(mid > c.u && mid < c.v) || res.cells > kMaxCells) {
      lower = std::min(lower, lb);
      continue;
    }
    const double pm = proxy(mid);
    consider(mid, pm);
    stack.push_back({mid, c.v, pm, c.pv});
    stack.push_back({c.u, mid, c.pu, pm});
  }
  res.certified_gap = std::max(0.0, res.f_e_star - lower);
  return res;
}

}  // namespace chebcon
