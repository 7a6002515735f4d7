#pragma once

#include <optional>
#include <random>
#include <string>

#include "chebcon/cheb.hpp"

namespace chebcon {

enum class NoiseFamily { Uniform, Normal, Laplace };

NoiseFamily parse_noise_family(const std::string& name);
std::string to_string(NoiseFamily family);

// Distribution of the masking noise theta_i(k).
//   Uniform: location +- scale (scale is the half-width)
//   Normal:  standard deviation `scale`
//   Laplace: diversity `scale`
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Uniform;
  double location = 0.0;
  double scale = 1.0;

  static NoiseSpec uniform(double half_width, double location = 0.0);
  static NoiseSpec normal(double sigma, double location = 0.0);
  static NoiseSpec laplace(double b, double location = 0.0);
  // Zero-mean, unit-variance member of the family.
  static NoiseSpec unit_variance(NoiseFamily family);

  void validate() const;
  double sample(std::mt19937_64& rng) const;
  double variance() const;
  double density(double y) const;
  // Bounded support for the uniform family, none otherwise.
  std::optional<Interval> support() const;
  // max over nu of the probability mass in [nu - alpha, nu + alpha].
  double max_window_mass(double alpha) const;
};

}  // namespace chebcon
