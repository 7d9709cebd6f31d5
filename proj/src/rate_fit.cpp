#include "tvgames/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvgames/error.hpp"

namespace tvgames {

RateFit fit_log_rate(std::span<const double> values, Round stride, double window_fraction) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be positive");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "window_fraction must lie in (0, 1]");
  }
  const auto total = static_cast<Round>(values.size()) / stride;
  if (total < static_cast<Round>(kMinFitSamples)) {
    throw Error(ErrorKind::InsufficientSamples,
                std::to_string(total) + " samples at stride " + std::to_string(stride));
  }
  const auto window = static_cast<Round>(std::floor(window_fraction * static_cast<double>(total)));
  if (window < static_cast<Round>(kMinFitWindow)) {
    throw Error(ErrorKind::InsufficientSamples, "fit window shorter than 20 samples");
  }

  // Centered accumulation keeps the normal equations well conditioned for
  // round indices in the millions.
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(static_cast<std::size_t>(window));
  ys.reserve(static_cast<std::size_t>(window));
  for (Round k = total - window + 1; k <= total; ++k) {
    const Round round = k * stride;
    const double v = values[static_cast<std::size_t>(round - 1)];
    if (!std::isfinite(v) || v <= 0.0) {
      throw Error(ErrorKind::NonPositiveSamples,
                  "sample at round " + std::to_string(round) + " is not positive");
    }
    if (v < kUnderflowThreshold) continue;
    xs.push_back(static_cast<double>(round));
    ys.push_back(std::log(v));
  }
  if (xs.size() < kMinFitWindow) {
    throw Error(ErrorKind::InsufficientSamples, "too many samples below 1e-300 in the window");
  }

  const auto count = static_cast<double>(xs.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= count;
  mean_y /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  RateFit fit;
  fit.log_rate_per_round = sxy / sxx;
  fit.intercept = mean_y - fit.log_rate_per_round * mean_x;
  fit.window_start = static_cast<Round>(xs.front());
  fit.window_end = static_cast<Round>(xs.back());
  fit.sample_stride = stride;
  fit.samples = xs.size();
  // A constant series fits perfectly by convention.
  const double noise = 16.0 * 2.220446049250313e-16 * (1.0 + std::abs(mean_y));
  fit.r_squared = syy > count * noise * noise ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_rate(const Trajectory& traj, const Measure& measure, Round stride,
                 double window_fraction) {
  const auto& series = traj.series(measure);
  return fit_log_rate(series, stride, window_fraction);
}

std::vector<double> envelope_function(const PayoffSchedule& s, Round horizon, double lambda) {
  const auto* game = std::get_if<PerturbedGame>(&s.kind());
  if (game == nullptr) {
    throw Error(ErrorKind::WrongScheduleKind, "envelope needs a perturbed schedule");
  }
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  const auto& law = game->perturbation;
  const double base_norm = two_norm(law.base);
  const Round cutoff = 10 * horizon;

  double remainder = 0.0;
  if (base_norm > 0.0 && law.kind != DecayKind::LogPower && law.exponent > 1.0) {
    const double m = static_cast<double>(cutoff);
    remainder = base_norm * std::pow(m, 1.0 - law.exponent) / (law.exponent - 1.0);
  }

  // tail[k] = sum_{i >= k} ||B_i||, accumulated from the small end.
  const Round max_start = (horizon + 1) / 2;
  std::vector<double> tail(static_cast<std::size_t>(max_start) + 1, 0.0);
  double running = remainder;
  for (Round i = cutoff; i >= 1; --i) {
    running += base_norm * law.decay(i);
    if (i <= max_start) tail[static_cast<std::size_t>(i)] = running;
  }

  std::vector<double> f(static_cast<std::size_t>(horizon));
  const double log_lambda = std::log(lambda);
  for (Round t = 1; t <= horizon; ++t) {
    const Round start = std::max<Round>(1, (t + 1) / 2);
    const double geometric = std::exp(log_lambda * static_cast<double>(t));
    f[static_cast<std::size_t>(t - 1)] = std::max(geometric, tail[static_cast<std::size_t>(start)]);
  }
  return f;
}

EnvelopeCheck envelope_check(const Trajectory& traj, const PayoffSchedule& s, double lambda_est) {
  if (!s.is_perturbed()) {
    throw Error(ErrorKind::WrongScheduleKind, "envelope check needs a perturbed schedule");
  }
  if (bap_partial_sums(s, 1).verdict != BapVerdict::BoundedLikely) {
    throw Error(ErrorKind::BapViolated, "perturbations are not summable");
  }
  if (traj.status != TrajectoryStatus::Completed) {
    throw Error(ErrorKind::InvalidArgument, "envelope check needs a completed trajectory");
  }
  if (!(lambda_est > 0.0 && lambda_est < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "lambda estimate must lie in (0, 1)");
  }
  const auto& delta = traj.series(Measure::stable());
  const Round horizon = traj.rounds_completed();
  const std::vector<double> f = envelope_function(s, horizon, lambda_est);

  // Delta is evaluated in double precision, so values below a few ulps of
  // ||A|| (||x|| + ||y||) are rounding noise rather than signal.
  const double scale = kEnvelopeRoundoff * two_norm(s.reference_matrix());
  auto floor_at = [&](std::size_t i) { return scale * (traj.norm_x[i] + traj.norm_y[i]); };

  // The slow mode rotates, so Delta / lambda^t is almost periodic and its
  // second-half peaks can graze the calibrated maximum; a touch within
  // kEnvelopeTouch counts as on the envelope.
  EnvelopeCheck out;
  out.horizon = horizon;
  out.lambda = lambda_est;
  const Round half = horizon / 2;
  for (Round t = 1; t <= half; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    if (f[i] > 0.0 && delta[i] > floor_at(i)) {
      out.fitted_constant = std::max(out.fitted_constant, delta[i] / f[i]);
    }
  }
  for (Round t = half + 1; t <= horizon; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    if (delta[i] > out.fitted_constant * f[i] * (1.0 + kEnvelopeTouch) + floor_at(i)) ++out.violations;
  }
  return out;
}

}  // namespace tvgames
