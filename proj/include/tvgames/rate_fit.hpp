#pragma once

#include <span>
#include <vector>

#include "tvgames/dynamics.hpp"

namespace tvgames {

constexpr std::size_t kMinFitWindow = 20;
constexpr std::size_t kMinFitSamples = 40;

// Least-squares fit of ln(delta) against the round index.
struct RateFit {
  double log_rate_per_round = 0.0;
  double intercept = 0.0;
  Round window_start = 0;  // first round used
  Round window_end = 0;    // last round used
  double r_squared = 1.0;
  Round sample_stride = 1;
  std::size_t samples = 0;
};

// `values[r - 1]` is the measure after round r. Samples are taken at rounds
// stride, 2 stride, ...; the trailing `window_fraction` of them is fitted.
// Values below 1e-300 are dropped, exact zeros raise NonPositiveSamples.
RateFit fit_log_rate(std::span<const double> values, Round stride, double window_fraction);

RateFit fit_rate(const Trajectory& traj, const Measure& measure, Round stride,
                 double window_fraction = 0.5);

struct EnvelopeCheck {
  double fitted_constant = 0.0;
  Round violations = 0;
  Round horizon = 0;
  double lambda = 0.0;
};

// f(t) = max(lambda^t, sum_{i >= ceil(t/2)} ||B_i||_2) for a perturbed schedule,
// evaluated for t = 1..horizon. The tail sum runs to 10 * horizon and adds the
// integral bound on the remainder for power-type laws.
std::vector<double> envelope_function(const PayoffSchedule& s, Round horizon, double lambda);

// Multiple of machine epsilon below which Delta_t is treated as rounding noise:
// floor_t = kEnvelopeRoundoff ||A||_2 (||x_t|| + ||y_t||).
constexpr double kEnvelopeRoundoff = 64.0 * 2.220446049250313e-16;
constexpr double kEnvelopeTouch = 1e-6;

// Calibrates C = max Delta_t / f(t) on the first half of the trajectory (rounds
// above the rounding floor only) and counts rounds in the second half with
// Delta_t > C f(t) + floor_t.
EnvelopeCheck envelope_check(const Trajectory& traj, const PayoffSchedule& s, double lambda_est);

}  // namespace tvgames
