#include "tvgames/schedule.hpp"

#include <cmath>
#include <string>

#include "tvgames/error.hpp"

namespace tvgames {

std::string_view to_string(DecayKind kind) {
  switch (kind) {
    case DecayKind::PowerLaw: return "power";
    case DecayKind::LogPower: return "log";
    case DecayKind::Alternating: return "alternating";
  }
  return "unknown";
}

DecayKind parse_decay_kind(std::string_view name) {
  if (name == "power") return DecayKind::PowerLaw;
  if (name == "log") return DecayKind::LogPower;
  if (name == "alternating") return DecayKind::Alternating;
  throw Error(ErrorKind::ConfigError, "unknown decay law '" + std::string(name) + "'");
}

std::string_view to_string(BapVerdict verdict) {
  switch (verdict) {
    case BapVerdict::BoundedLikely: return "BoundedLikely";
    case BapVerdict::DivergentLikely: return "DivergentLikely";
    case BapVerdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

double PerturbationLaw::decay(Round t) const {
  const auto tt = static_cast<double>(t);
  switch (kind) {
    case DecayKind::PowerLaw:
      return std::pow(tt, -exponent);
    case DecayKind::LogPower:
      return std::pow(std::log(std::max(tt, 2.0)), -exponent);
    case DecayKind::Alternating:
      return t % 2 == 0 ? std::pow(tt, -exponent) : 0.0;
  }
  return 0.0;
}

namespace {

void check_shapes(const std::vector<RealMatrix>& ms, Eigen::Index n, Eigen::Index m) {
  for (const auto& a : ms) {
    if (a.rows() != n || a.cols() != m) {
      throw Error(ErrorKind::DimensionMismatch, "all payoff matrices must share one shape");
    }
    if (!a.allFinite()) {
      throw Error(ErrorKind::NonFinite, "payoff matrix has non-finite entries");
    }
  }
}

}  // namespace

PayoffSchedule PayoffSchedule::periodic(std::vector<RealMatrix> matrices) {
  if (matrices.empty()) {
    throw Error(ErrorKind::InvalidArgument, "periodic schedule needs at least one matrix");
  }
  const auto n = matrices.front().rows();
  const auto m = matrices.front().cols();
  check_shapes(matrices, n, m);
  return PayoffSchedule(PeriodicGame{std::move(matrices)}, n, m);
}

PayoffSchedule PayoffSchedule::perturbed(RealMatrix stable, PerturbationLaw law) {
  const auto n = stable.rows();
  const auto m = stable.cols();
  check_shapes({stable, law.base}, n, m);
  if (!(law.exponent > 0.0) || !std::isfinite(law.exponent)) {
    throw Error(ErrorKind::InvalidArgument, "perturbation exponent must be positive");
  }
  return PayoffSchedule(PerturbedGame{std::move(stable), std::move(law)}, n, m);
}

PayoffSchedule PayoffSchedule::explicit_sequence(std::vector<RealMatrix> matrices,
                                                 RealMatrix tail) {
  const auto n = tail.rows();
  const auto m = tail.cols();
  check_shapes(matrices, n, m);
  check_shapes({tail}, n, m);
  return PayoffSchedule(ExplicitGame{std::move(matrices), std::move(tail)}, n, m);
}

std::size_t PayoffSchedule::period() const noexcept {
  if (const auto* p = std::get_if<PeriodicGame>(&kind_)) return p->matrices.size();
  return 0;
}

void PayoffSchedule::payoff_into(Round t, RealMatrix& out) const {
  if (t < 1) {
    throw Error(ErrorKind::InvalidArgument, "rounds start at 1");
  }
  if (const auto* p = std::get_if<PeriodicGame>(&kind_)) {
    const auto period = static_cast<Round>(p->matrices.size());
    out = p->matrices[static_cast<std::size_t>((t - 1) % period)];
  } else if (const auto* q = std::get_if<PerturbedGame>(&kind_)) {
    const double g = q->perturbation.decay(t);
    out = q->stable + g * q->perturbation.base;
  } else {
    const auto& e = std::get<ExplicitGame>(kind_);
    if (t <= static_cast<Round>(e.matrices.size())) {
      out = e.matrices[static_cast<std::size_t>(t - 1)];
    } else {
      out = e.tail;
    }
  }
}

RealMatrix PayoffSchedule::payoff_at(Round t) const {
  RealMatrix out(n_, m_);
  payoff_into(t, out);
  return out;
}

RealMatrix PayoffSchedule::payoff_before_start() const {
  if (const auto* p = std::get_if<PeriodicGame>(&kind_)) return p->matrices.back();
  return payoff_at(1);
}

const RealMatrix& PayoffSchedule::reference_matrix() const {
  if (const auto* p = std::get_if<PeriodicGame>(&kind_)) return p->matrices.front();
  if (const auto* q = std::get_if<PerturbedGame>(&kind_)) return q->stable;
  return std::get<ExplicitGame>(kind_).tail;
}

BapReport bap_partial_sums(const PayoffSchedule& s, Round horizon) {
  if (horizon < 1) {
    throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  }
  BapReport report;
  report.sums.reserve(static_cast<std::size_t>(horizon));
  double running = 0.0;

  if (const auto* q = std::get_if<PerturbedGame>(&s.kind())) {
    const auto& law = q->perturbation;
    const double base_norm = two_norm(law.base);
    for (Round t = 1; t <= horizon; ++t) {
      running += base_norm * law.decay(t);
      report.sums.push_back(running);
    }
    if (base_norm == 0.0) {
      report.verdict = BapVerdict::BoundedLikely;
    } else if (law.kind == DecayKind::LogPower) {
      report.verdict = BapVerdict::DivergentLikely;
    } else {
      report.verdict = law.exponent > 1.0 ? BapVerdict::BoundedLikely
                                          : BapVerdict::DivergentLikely;
    }
    return report;
  }
  if (const auto* e = std::get_if<ExplicitGame>(&s.kind())) {
    for (Round t = 1; t <= horizon; ++t) {
      if (t <= static_cast<Round>(e->matrices.size())) {
        running += two_norm(e->matrices[static_cast<std::size_t>(t - 1)] - e->tail);
      }
      report.sums.push_back(running);
    }
    report.verdict = BapVerdict::Inconclusive;
    return report;
  }
  throw Error(ErrorKind::WrongScheduleKind, "BAP sums need a perturbed or explicit schedule");
}

PayoffSchedule alternating_sign_game() {
  return PayoffSchedule::periodic({make_matrix({{1.0, -1.0}}), make_matrix({{-1.0, 1.0}})});
}

PayoffSchedule three_cycle_game() {
  return PayoffSchedule::periodic({make_matrix({{1.0, 2.0}, {2.0, 4.0}}),
                                   make_matrix({{3.0, 7.0}, {7.0, 1.0}}),
                                   make_matrix({{4.0, 2.0}, {4.0, 2.0}})});
}

}  // namespace tvgames
