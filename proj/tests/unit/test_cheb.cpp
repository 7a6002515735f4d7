#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "chebcon/cheb.hpp"
#include "chebcon/errors.hpp"
#include "chebcon/runner.hpp"
#include "doctest.h"
#include "gen.hpp"

using namespace chebcon;

namespace {

double T(std::size_t j, double s) { return std::cos(static_cast<double>(j) * std::acos(std::clamp(s, -1.0, 1.0))); }

// Coefficients from solving the collocation system sum_j c_j T_j(s_k) = v_k.
std::vector<double> vandermonde_coeffs(const std::vector<double>& nodes_unit, const std::vector<double>& values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) A(k, j) = T(static_cast<std::size_t>(j), nodes_unit[static_cast<std::size_t>(k)]);
    b(k) = values[static_cast<std::size_t>(k)];
  }
  const Eigen::VectorXd c = A.partialPivLu().solve(b);
  return {c.data(), c.data() + n};
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

double dense_error(const std::function<double(double)>& f, const ChebProxy& p, std::size_t points) {
  const Interval& iv = p.interval();
  double err = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double x = iv.lo() + iv.width() * static_cast<double>(k) / static_cast<double>(points - 1);
    err = std::max(err, std::abs(f(x) - p(std::min(x, iv.hi()))));
  }
  return err;
}

}  // namespace

TEST_CASE("intervals reject degenerate or non-finite bounds") {
  CHECK_THROWS_AS(Interval(1.0, 1.0), InvalidInterval);
  CHECK_THROWS_AS(Interval(2.0, 1.0), InvalidInterval);
  CHECK_THROWS_AS(Interval(0.0, INFINITY), InvalidInterval);
  CHECK_THROWS_AS(Interval(NAN, 1.0), InvalidInterval);
  const Interval iv(0.0, 2.0);
  CHECK(iv.to_unit(0.0) == -1.0);
  CHECK(iv.to_unit(2.0) == 1.0);
  CHECK(iv.from_unit(0.0) == 1.0);
}

TEST_CASE("lobatto nodes") {
  CHECK(max_abs_diff(cheb_nodes(2, Interval(-1, 1)), {1, 0, -1}) <= 1e-15);
  CHECK(max_abs_diff(cheb_nodes(2, Interval(0, 2)), {2, 1, 0}) <= 1e-15);
  const double r = std::sqrt(2.0) / 2.0;
  CHECK(max_abs_diff(cheb_nodes(4, Interval(-1, 1)), {1, r, 0, -r, -1}) <= 1e-15);
  CHECK_THROWS_AS(cheb_nodes(0, Interval()), InvalidDegree);

  SUBCASE("nodes follow the cosine formula and keep exact endpoints") {
    auto rng = gen::engine(1);
    for (int trial = 0; trial < 50; ++trial) {
      const Interval iv = gen::interval(rng);
      const std::size_t m = gen::index(rng, 1, 80);
      const auto nodes = cheb_nodes(m, iv);
      REQUIRE(nodes.size() == m + 1);
      CHECK(nodes.front() == iv.hi());
      CHECK(nodes.back() == iv.lo());
      for (std::size_t k = 0; k <= m; ++k) {
        const double want = iv.width() / 2 * std::cos(k * std::numbers::pi / m) + iv.mid();
        CHECK(std::abs(nodes[k] - want) <= 1e-13 * (1 + std::abs(want)));
        if (k > 0) CHECK(nodes[k] < nodes[k - 1]);
      }
    }
  }
}

TEST_CASE("coefficients of low-degree fixtures") {
  CHECK(max_abs_diff(cheb_coeffs(std::vector<double>{1, 1, 1}), {1, 0, 0}) <= 1e-15);
  CHECK(max_abs_diff(cheb_coeffs(std::vector<double>{1, 0, -1}), {0, 1, 0}) <= 1e-15);
  CHECK(max_abs_diff(cheb_coeffs(std::vector<double>{1, 0, 1}), {0.5, 0, 0.5}) <= 1e-15);
  CHECK_THROWS_AS(cheb_coeffs(std::vector<double>{1}), InvalidDegree);
  CHECK_THROWS_AS(cheb_coeffs(std::vector<double>{}), InvalidDegree);
}

TEST_CASE("coefficients agree with a collocation solve") {
  auto rng = gen::engine(2);
  for (std::size_t m = 1; m <= 24; ++m) {
    std::vector<double> unit(m + 1), values(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
      unit[k] = std::cos(k * std::numbers::pi / m);
      values[k] = gen::uniform(rng, -3, 3);
    }
    const auto want = vandermonde_coeffs(unit, values);
    CHECK(max_abs_diff(cheb_coeffs(values), want) <= 1e-11);
  }
}

TEST_CASE("clenshaw evaluation") {
  CHECK(ChebProxy(Interval(), {0, 1, 0})(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(ChebProxy(Interval(), {0.5, 0, 0.5})(0.3) - 0.09) <= 1e-15);

  const ChebProxy p(Interval(-3, 1), {1.5, -2, 0.75, 4, -0.125, 3});
  CHECK(std::abs(p(-1.0) - (1.5 - 0.75 - 0.125)) <= 1e-14);
  CHECK_THROWS_AS(p(1.001), DomainError);
  CHECK_THROWS_AS(p(-3.5), DomainError);
  CHECK_NOTHROW(p(1.0 + 1e-15));
  CHECK_THROWS_AS(ChebProxy(Interval(), {}), InvalidDegree);

  SUBCASE("matches the trigonometric definition") {
    auto rng = gen::engine(3);
    for (int trial = 0; trial < 200; ++trial) {
      const ChebProxy q = gen::proxy(rng, 40);
      const double x = gen::uniform(rng, q.interval().lo(), q.interval().hi());
      const double s = q.interval().to_unit(x);
      double want = 0.0;
      for (std::size_t j = 0; j < q.coeffs().size(); ++j) want += q.coeffs()[j] * T(j, s);
      CHECK(std::abs(q(x) - want) <= 1e-12);
    }
  }
}

TEST_CASE("adaptive interpolation") {
  SUBCASE("quadratic stops at degree two") {
    ObjectiveFn f([](double x) { return x * x; }, Interval());
    const auto p = adaptive_interpolate(f, Interval(), 1e-10);
    CHECK(p.degree() == 2);
    CHECK(max_abs_diff(p.coeffs(), {0.5, 0, 0.5}) <= 1e-12);
    CHECK(f.evaluations() == 5);
  }
  SUBCASE("degree-two fixtures are exact") {
    for (auto fn : std::vector<std::function<double(double)>>{
             [](double) { return 3.25; }, [](double x) { return x; }, [](double x) { return x * x; }}) {
      ObjectiveFn f(fn, Interval(-2, 3));
      const auto p = adaptive_interpolate(f, Interval(-2, 3), 1e-12);
      CHECK(p.degree() == 2);
      CHECK(dense_error(fn, p, 1001) <= 1e-12);
    }
  }
  SUBCASE("T5 first appears exactly at degree eight") {
    ObjectiveFn f([](double x) { return T(5, x); }, Interval());
    const auto p = adaptive_interpolate(f, Interval(), 1e-10);
    REQUIRE(p.degree() == 8);
    for (std::size_t j = 0; j <= 8; ++j) CHECK(std::abs(p.coeffs()[j] - (j == 5 ? 1.0 : 0.0)) <= 1e-12);
  }
  SUBCASE("objective of the experiments at a tight tolerance") {
    const Objective obj{10.0, 5.0};
    const double eps1 = 1e-10 / 3;
    ObjectiveFn f(obj, Interval());
    const auto p = adaptive_interpolate(f, Interval(), eps1);
    CHECK(p.degree() >= 16);
    CHECK(p.degree() <= 64);
    CHECK(dense_error(obj, p, 100001) <= 10 * eps1);
    CHECK(f.evaluations() == 2 * p.degree() + 1);
  }
  SUBCASE("non-smooth input hits the degree cap") {
    ObjectiveFn f([](double x) { return std::abs(x - 0.1); }, Interval());
    try {
      adaptive_interpolate(f, Interval(), 1e-14, {2, 64});
      FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
      CHECK(e.residual() > 1e-14);
      CHECK(e.degree() == 64);
    }
  }
  SUBCASE("argument checks") {
    ObjectiveFn f([](double x) { return x; }, Interval(0, 1));
    CHECK_THROWS_AS(adaptive_interpolate(f, Interval(0, 1), 0.0), Error);
    CHECK_THROWS_AS(adaptive_interpolate(f, Interval(-1, 1), 1e-6), DomainError);
  }
}

TEST_CASE("interpolation properties") {
  auto rng = gen::engine(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Objective obj{gen::uniform(rng, 5, 15), gen::uniform(rng, 2, 8)};
    const Interval iv = gen::interval(rng);
    const double eps1 = std::pow(10.0, -gen::uniform(rng, 3, 10));
    ObjectiveFn f(obj, iv);
    const auto p = adaptive_interpolate(f, iv, eps1);

    // Matches f at its own nodes.
    for (double x : cheb_nodes(p.degree(), iv)) CHECK(std::abs(p(x) - obj(x)) <= 1e-9 * (1 + std::abs(obj(x))));

    // Uniform error with the safety factor of ten.
    CHECK(dense_error(obj, p, 20001) <= 10 * eps1);

    // Evaluations are reused across doublings.
    CHECK(f.evaluations() == 2 * p.degree() + 1);

    // Affine invariance: interpolating f o l on [-1, 1] gives the same coefficients.
    ObjectiveFn g([&](double s) { return obj(iv.from_unit(s)); }, Interval());
    const auto q = adaptive_interpolate(g, Interval(), eps1);
    REQUIRE(q.degree() == p.degree());
    CHECK(max_abs_diff(p.coeffs(), q.coeffs()) <= 1e-12 * (1 + std::abs(p.coeffs()[0])));
  }
}

TEST_CASE("coefficients of an analytic objective decay geometrically") {
  ObjectiveFn f(Objective{10.0, 5.0}, Interval());
  const auto p = adaptive_interpolate(f, Interval(), 1e-12);
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < p.coeffs().size(); ++j) {
    if (std::abs(p.coeffs()[j]) < 1e-15) continue;
    xs.push_back(static_cast<double>(j));
    ys.push_back(std::log(std::abs(p.coeffs()[j])));
  }
  CHECK(linear_fit(xs, ys).slope < 0.0);
}

TEST_CASE("l1 coefficient distance bounds the sup distance") {
  auto rng = gen::engine(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Interval iv = gen::interval(rng);
    const std::size_t m = gen::index(rng, 0, 30);
    const ChebProxy p(iv, gen::coeffs(rng, m));
    const ChebProxy q(iv, gen::coeffs(rng, gen::index(rng, 0, 30)));
    const std::size_t n = std::max(p.coeffs().size(), q.coeffs().size());
    const auto a = pad_to(p.coeffs(), n);
    const auto b = pad_to(q.coeffs(), n);
    double l1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) l1 += std::abs(a[k] - b[k]);
    for (int s = 0; s <= 500; ++s) {
      const double x = iv.lo() + iv.width() * s / 500.0;
      CHECK(std::abs(p(std::min(x, iv.hi())) - q(std::min(x, iv.hi()))) <= l1 + 1e-12);
    }
  }
}

TEST_CASE("proxy averaging") {
  const std::vector<ChebProxy> same{ChebProxy(Interval(), {1, 2, 3}), ChebProxy(Interval(), {1, 2, 3})};
  CHECK(proxy_average(same).coeffs() == std::vector<double>{1, 2, 3});
  const std::vector<ChebProxy> ragged{ChebProxy(Interval(), {1, 0}), ChebProxy(Interval(), {0, 0, 3})};
  CHECK(max_abs_diff(proxy_average(ragged).coeffs(), {0.5, 0, 1.5}) <= 1e-15);
  const std::vector<ChebProxy> mixed{ChebProxy(Interval(), {1}), ChebProxy(Interval(0, 1), {1})};
  CHECK_THROWS_AS(proxy_average(mixed), Error);
  CHECK_THROWS_AS(proxy_average(std::span<const ChebProxy>()), Error);

  SUBCASE("average proxy tracks the average objective") {
    const auto objs = draw_objectives(20, 0);
    const double eps1 = 1e-8;
    std::vector<ChebProxy> ps;
    for (const auto& o : objs) {
      ObjectiveFn f(o, Interval());
      ps.push_back(adaptive_interpolate(f, Interval(), eps1));
    }
    const auto avg = proxy_average(ps);
    const auto mean = [&](double x) {
      double s = 0.0;
      for (const auto& o : objs) s += o(x);
      return s / 20.0;
    };
    CHECK(dense_error(mean, avg, 100001) <= eps1);
  }
}
