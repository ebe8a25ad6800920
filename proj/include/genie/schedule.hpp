#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace genie {

// DDPM coefficients for T diffusion iterations; index t runs 1..T, slot 0 is
// the identity sentinel (alpha_bar[0] = 1) used by the t=1 reverse step.
struct NoiseSchedule {
  std::size_t T = 0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  std::vector<double> beta;       // beta[0] unused
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product, alpha_bar[0] = 1
};

inline NoiseSchedule build_schedule(std::size_t T, double beta_min, double beta_max) {
  if (T < 2) throw std::invalid_argument("build_schedule: T must be >= 2");
  if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0))
    throw std::invalid_argument("build_schedule: need 0 < beta_min <= beta_max < 1");

  NoiseSchedule s;
  s.T = T;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.beta.assign(T + 1, 0.0);
  s.alpha.assign(T + 1, 1.0);
  s.alpha_bar.assign(T + 1, 1.0);
  for (std::size_t t = 1; t <= T; ++t) {
    s.beta[t] = beta_min + static_cast<double>(t - 1) / static_cast<double>(T - 1) *
                               (beta_max - beta_min);
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
  }
  return s;
}

inline NoiseSchedule default_schedule() { return build_schedule(1000, 1e-4, 0.02); }

// n = floor(r * T), clamped to [0, T]. The small nudge absorbs the binary
// rounding of decimal literals (0.999 * 1000 must give 999, not 998).
inline std::size_t noising_step_count(double r, std::size_t T) {
  if (!(r >= 0.0) || !(r <= 1.0))
    throw std::invalid_argument("noising_step_count: r must be in [0, 1]");
  const double scaled = std::floor(r * static_cast<double>(T) + 1e-9);
  auto n = static_cast<std::size_t>(scaled < 0.0 ? 0.0 : scaled);
  return n > T ? T : n;
}

}  // namespace genie
