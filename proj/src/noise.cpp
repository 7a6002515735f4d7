#include "chebcon/noise.hpp"

#include <cmath>
#include <numbers>

#include "chebcon/errors.hpp"

namespace chebcon {

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "uniform") return NoiseFamily::Uniform;
  if (name == "normal" || name == "gaussian") return NoiseFamily::Normal;
  if (name == "laplace") return NoiseFamily::Laplace;
  throw UnsupportedFamily("unsupported noise family '" + name + "'");
}

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Uniform: return "uniform";
    case NoiseFamily::Normal: return "normal";
    case NoiseFamily::Laplace: return "laplace";
  }
  return "unknown";
}

NoiseSpec NoiseSpec::uniform(double half_width, double location) {
  return {NoiseFamily::Uniform, location, half_width};
}

NoiseSpec NoiseSpec::normal(double sigma, double location) { return {NoiseFamily::Normal, location, sigma}; }

NoiseSpec NoiseSpec::laplace(double b, double location) { return {NoiseFamily::Laplace, location, b}; }

NoiseSpec NoiseSpec::unit_variance(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Uniform: return uniform(std::sqrt(3.0));
    case NoiseFamily::Normal: return normal(1.0);
    case NoiseFamily::Laplace: return laplace(1.0 / std::sqrt(2.0));
  }
  throw UnsupportedFamily("unsupported noise family");
}

void NoiseSpec::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("noise scale must be positive and finite");
  if (!std::isfinite(location)) throw ConfigError("noise location must be finite");
}

double NoiseSpec::sample(std::mt19937_64& rng) const {
  switch (family) {
    case NoiseFamily::Uniform: {
      std::uniform_real_distribution<double> u(location - scale, location + scale);
      return u(rng);
    }
    case NoiseFamily::Normal: {
      std::normal_distribution<double> g(location, scale);
      return g(rng);
    }
    case NoiseFamily::Laplace: {
      // Inverse CDF on u in (-1/2, 1/2).
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      double v = u(rng);
      while (v == -0.5) v = u(rng);
      const double sgn = v < 0.0 ? -1.0 : 1.0;
      return location - scale * sgn * std::log1p(-2.0 * std::abs(v));
    }
  }
  throw UnsupportedFamily("unsupported noise family");
}

double NoiseSpec::variance() const {
  switch (family) {
    case NoiseFamily::Uniform: return scale * scale / 3.0;
    case NoiseFamily::Normal: return scale * scale;
    case NoiseFamily::Laplace: return 2.0 * scale * scale;
  }
  throw UnsupportedFamily("unsupported noise family");
}

double NoiseSpec::density(double y) const {
  const double z = y - location;
  switch (family) {
    case NoiseFamily::Uniform: return std::abs(z) <= scale ? 0.5 / scale : 0.0;
    case NoiseFamily::Normal: return std::exp(-0.5 * z * z / (scale * scale)) / (scale * std::sqrt(2.0 * std::numbers::pi));
    case NoiseFamily::Laplace: return std::exp(-std::abs(z) / scale) / (2.0 * scale);
  }
  throw UnsupportedFamily("unsupported noise family");
}

std::optional<Interval> NoiseSpec::support() const {
  if (family == NoiseFamily::Uniform) return Interval(location - scale, location + scale);
  return std::nullopt;
}

double NoiseSpec::max_window_mass(double alpha) const {
  if (alpha < 0.0) throw Error("window half-width must be nonnegative");
  // All three densities are symmetric and unimodal, so the window centred
  // at the location carries the most mass.
  switch (family) {
    case NoiseFamily::Uniform: return std::min(2.0 * alpha, 2.0 * scale) / (2.0 * scale);
    case NoiseFamily::Normal: return std::erf(alpha / (scale * std::sqrt(2.0)));
    case NoiseFamily::Laplace: return 1.0 - std::exp(-alpha / scale);
  }
  throw UnsupportedFamily("unsupported noise family");
}

}  // namespace chebcon
