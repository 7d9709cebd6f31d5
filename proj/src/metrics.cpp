#include "tvgames/metrics.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "tvgames/error.hpp"

namespace tvgames {

JointState JointState::zeros(Eigen::Index n, Eigen::Index m) {
  return {RealVector::Zero(n), RealVector::Zero(m), RealVector::Zero(n), RealVector::Zero(m)};
}

JointState JointState::from_current(RealVector x, RealVector y) {
  JointState s;
  s.x_prev = x;
  s.y_prev = y;
  s.x = std::move(x);
  s.y = std::move(y);
  return s;
}

double JointState::joint_norm() const {
  return std::hypot(x.stableNorm(), y.stableNorm());
}

bool JointState::finite() const {
  return x.allFinite() && y.allFinite() && x_prev.allFinite() && y_prev.allFinite();
}

RealVector JointState::stacked(bool with_previous) const {
  const Eigen::Index n = x.size();
  const Eigen::Index m = y.size();
  RealVector v(with_previous ? 2 * (n + m) : n + m);
  v.head(n) = x;
  v.segment(n, m) = y;
  if (with_previous) {
    v.segment(n + m, n) = x_prev;
    v.tail(m) = y_prev;
  }
  return v;
}

JointState JointState::unstack(const RealVector& v, Eigen::Index n, Eigen::Index m,
                               bool with_previous) {
  const Eigen::Index expected = with_previous ? 2 * (n + m) : n + m;
  if (v.size() != expected) {
    throw Error(ErrorKind::DimensionMismatch, "stacked state has the wrong length");
  }
  JointState s;
  s.x = v.head(n);
  s.y = v.segment(n, m);
  if (with_previous) {
    s.x_prev = v.segment(n + m, n);
    s.y_prev = v.tail(m);
  } else {
    s.x_prev = s.x;
    s.y_prev = s.y;
  }
  return s;
}

Measure Measure::parse(std::string_view id) {
  if (id == "delta_stable") return stable();
  constexpr std::string_view prefix = "delta_";
  if (id.substr(0, prefix.size()) == prefix) {
    const auto digits = id.substr(prefix.size());
    int value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && value >= 1) {
      return slot(value);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown measure '" + std::string(id) + "'");
}

std::string Measure::id() const {
  return kind == Kind::Stable ? std::string("delta_stable") : "delta_" + std::to_string(index);
}

double delta_stable(const RealMatrix& a, const JointState& state) {
  if (state.x.size() != a.rows() || state.y.size() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "state does not match payoff shape");
  }
  return (a.transpose() * state.x).stableNorm() + (a * state.y).stableNorm();
}

double delta_periodic(const PayoffSchedule& s, const JointState& state, int i) {
  if (!s.is_periodic()) {
    throw Error(ErrorKind::WrongScheduleKind, "delta_periodic needs a periodic schedule");
  }
  if (i < 1 || static_cast<std::size_t>(i) > s.period()) {
    throw Error(ErrorKind::IndexOutOfPeriod,
                "index " + std::to_string(i) + " outside period " + std::to_string(s.period()));
  }
  return delta_stable(std::get<PeriodicGame>(s.kind()).matrices[static_cast<std::size_t>(i - 1)],
                      state);
}

const RealMatrix& measure_matrix(const PayoffSchedule& s, const Measure& measure) {
  if (measure.kind == Measure::Kind::Stable) {
    if (s.is_periodic()) {
      throw Error(ErrorKind::WrongScheduleKind, "periodic schedules have no stable matrix");
    }
    return s.reference_matrix();
  }
  const std::vector<RealMatrix>* list = nullptr;
  if (const auto* p = std::get_if<PeriodicGame>(&s.kind())) list = &p->matrices;
  if (const auto* e = std::get_if<ExplicitGame>(&s.kind())) list = &e->matrices;
  if (list == nullptr) {
    throw Error(ErrorKind::WrongScheduleKind, "perturbed schedules only offer delta_stable");
  }
  if (measure.index < 1 || static_cast<std::size_t>(measure.index) > list->size()) {
    throw Error(ErrorKind::IndexOutOfPeriod, "measure " + measure.id() + " out of range");
  }
  return (*list)[static_cast<std::size_t>(measure.index - 1)];
}

std::vector<Measure> default_measures(const PayoffSchedule& s) {
  std::vector<Measure> out;
  if (const auto* p = std::get_if<PeriodicGame>(&s.kind())) {
    for (std::size_t i = 1; i <= p->matrices.size(); ++i) out.push_back(Measure::slot(static_cast<int>(i)));
  } else if (const auto* e = std::get_if<ExplicitGame>(&s.kind())) {
    for (std::size_t i = 1; i <= e->matrices.size(); ++i) out.push_back(Measure::slot(static_cast<int>(i)));
    out.push_back(Measure::stable());
  } else {
    out.push_back(Measure::stable());
  }
  return out;
}

}  // namespace tvgames
