#include "tvgames/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvgames/error.hpp"

namespace tvgames {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::OGDA: return "OGDA";
    case Method::EG: return "EG";
    case Method::NM: return "NM";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "OGDA" || name == "ogda") return Method::OGDA;
  if (name == "EG" || name == "eg") return Method::EG;
  if (name == "NM" || name == "nm") return Method::NM;
  throw Error(ErrorKind::ConfigError, "unknown method '" + std::string(name) + "'");
}

std::string_view to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Completed: return "Completed";
    case TrajectoryStatus::Diverged: return "Diverged";
    case TrajectoryStatus::Underflow: return "Underflow";
  }
  return "unknown";
}

DynamicsConfig DynamicsConfig::eg(double alpha, double gamma) {
  DynamicsConfig c;
  c.method = Method::EG;
  c.alpha = alpha;
  c.gamma = gamma;
  return c;
}

DynamicsConfig DynamicsConfig::ogda(double eta) {
  DynamicsConfig c;
  c.method = Method::OGDA;
  c.eta = eta;
  return c;
}

DynamicsConfig DynamicsConfig::nm(double eta, double beta1, double beta2) {
  DynamicsConfig c;
  c.method = Method::NM;
  c.eta = eta;
  c.beta1 = beta1;
  c.beta2 = beta2;
  return c;
}

namespace {

void require_positive(const std::optional<double>& v, const char* name) {
  if (!(*v > 0.0) || !std::isfinite(*v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive and finite");
  }
}

void require_nonpositive(const std::optional<double>& v, const char* name) {
  if (!(*v <= 0.0) || !std::isfinite(*v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be <= 0");
  }
}

}  // namespace

DynamicsConfig DynamicsConfig::resolved(const RealMatrix& reference) const {
  DynamicsConfig out = *this;
  const bool needs_sigma =
      (method == Method::EG && (!alpha || !gamma)) || (method != Method::EG && !eta);
  double sigma = needs_sigma ? two_norm(reference) : 0.0;
  // A zero payoff admits any step; fall back to sigma = 1 so the default stays finite.
  if (needs_sigma && sigma == 0.0) sigma = 1.0;
  switch (method) {
    case Method::EG:
      if (!out.alpha && !out.gamma) {
        out.alpha = out.gamma = 0.9 / (2.0 * sigma);
      } else if (!out.gamma) {
        out.gamma = out.alpha;
      } else if (!out.alpha) {
        out.alpha = out.gamma;
      }
      require_positive(out.alpha, "alpha");
      require_positive(out.gamma, "gamma");
      break;
    case Method::OGDA:
      if (!out.eta) out.eta = 0.9 / (2.0 * sigma);
      require_positive(out.eta, "eta");
      break;
    case Method::NM:
      if (!out.eta) out.eta = 0.9 / sigma;
      if (!out.beta1) out.beta1 = -0.5;
      if (!out.beta2) out.beta2 = 0.0;
      require_positive(out.eta, "eta");
      require_nonpositive(out.beta1, "beta1");
      require_nonpositive(out.beta2, "beta2");
      break;
  }
  return out;
}

DynamicsConfig DynamicsConfig::resolved(const PayoffSchedule& s) const {
  return resolved(s.reference_matrix());
}

const std::vector<double>& Trajectory::series(const Measure& m) const {
  for (std::size_t k = 0; k < measures.size(); ++k) {
    if (measures[k] == m) return deltas[k];
  }
  throw Error(ErrorKind::InvalidArgument, "trajectory did not record " + m.id());
}

namespace {

void check_state(const PayoffSchedule& s, const JointState& state) {
  if (state.x.size() != s.n() || state.y.size() != s.m() || state.x_prev.size() != s.n() ||
      state.y_prev.size() != s.m()) {
    throw Error(ErrorKind::DimensionMismatch,
                "state dimensions do not match the " + std::to_string(s.n()) + "x" +
                    std::to_string(s.m()) + " payoff");
  }
}

// Allocation-free update rule. Holds A_{t-1}, A_t, A_{t+1} as needed and
// advances them one round at a time.
class DirectStepper {
 public:
  DirectStepper(const DynamicsConfig& cfg, const PayoffSchedule& s)
      : cfg_(cfg), s_(s),
        a_prev_(s.n(), s.m()), a_cur_(s.n(), s.m()), a_next_(s.n(), s.m()),
        xh_(s.n()), yh_(s.m()), x_new_(s.n()), y_new_(s.m()) {}

  void prepare(Round t) {
    s_.payoff_into(t, a_cur_);
    switch (cfg_.method) {
      case Method::OGDA:
        if (t == 1) {
          a_prev_ = s_.payoff_before_start();
        } else {
          s_.payoff_into(t - 1, a_prev_);
        }
        break;
      case Method::NM:
        s_.payoff_into(t + 1, a_next_);
        break;
      case Method::EG:
        break;
    }
    prepared_ = t;
  }

  // Advances `st` in place from round t to t + 1.
  void step(JointState& st, Round t) {
    if (prepared_ != t) prepare(t);
    switch (cfg_.method) {
      case Method::OGDA: {
        const double eta = *cfg_.eta;
        x_new_ = st.x;
        x_new_.noalias() -= (2.0 * eta) * (a_cur_ * st.y);
        x_new_.noalias() += eta * (a_prev_ * st.y_prev);
        y_new_ = st.y;
        y_new_.noalias() += (2.0 * eta) * (a_cur_.transpose() * st.x);
        y_new_.noalias() -= eta * (a_prev_.transpose() * st.x_prev);
        break;
      }
      case Method::EG: {
        const double alpha = *cfg_.alpha;
        const double gamma = *cfg_.gamma;
        xh_ = st.x;
        xh_.noalias() -= gamma * (a_cur_ * st.y);
        yh_ = st.y;
        yh_.noalias() += gamma * (a_cur_.transpose() * st.x);
        x_new_ = st.x;
        x_new_.noalias() -= alpha * (a_cur_ * yh_);
        y_new_ = st.y;
        y_new_.noalias() += alpha * (a_cur_.transpose() * xh_);
        break;
      }
      case Method::NM: {
        const double eta = *cfg_.eta;
        const double b1 = *cfg_.beta1;
        const double b2 = *cfg_.beta2;
        x_new_ = st.x + b1 * (st.x - st.x_prev);
        x_new_.noalias() -= eta * (a_cur_ * st.y);
        y_new_ = st.y + b2 * (st.y - st.y_prev);
        y_new_.noalias() += eta * (a_next_.transpose() * x_new_);
        break;
      }
    }
    st.x_prev.swap(st.x);
    st.y_prev.swap(st.y);
    st.x.swap(x_new_);
    st.y.swap(y_new_);
    advance(t);
  }

 private:
  // Rotates the cached payoffs so the next round does not recompute them.
  void advance(Round t) {
    switch (cfg_.method) {
      case Method::OGDA:
        a_prev_.swap(a_cur_);
        s_.payoff_into(t + 1, a_cur_);
        break;
      case Method::NM:
        a_cur_.swap(a_next_);
        s_.payoff_into(t + 2, a_next_);
        break;
      case Method::EG:
        s_.payoff_into(t + 1, a_cur_);
        break;
    }
    prepared_ = t + 1;
  }

  const DynamicsConfig& cfg_;
  const PayoffSchedule& s_;
  RealMatrix a_prev_, a_cur_, a_next_;
  RealVector xh_, yh_, x_new_, y_new_;
  Round prepared_ = 0;
};

void fill_iterative_matrix(const DynamicsConfig& cfg, const RealMatrix& a_cur,
                           const RealMatrix& a_other, RealMatrix& out) {
  const Eigen::Index n = a_cur.rows();
  const Eigen::Index m = a_cur.cols();
  switch (cfg.method) {
    case Method::EG: {
      const double alpha = *cfg.alpha;
      const double gamma = *cfg.gamma;
      out.setZero(n + m, n + m);
      out.topLeftCorner(n, n) = RealMatrix::Identity(n, n) - alpha * gamma * a_cur * a_cur.transpose();
      out.topRightCorner(n, m) = -alpha * a_cur;
      out.bottomLeftCorner(m, n) = alpha * a_cur.transpose();
      out.bottomRightCorner(m, m) = RealMatrix::Identity(m, m) - gamma * alpha * a_cur.transpose() * a_cur;
      break;
    }
    case Method::OGDA: {
      // a_other is A_{t-1}
      const double eta = *cfg.eta;
      out.setZero(2 * (n + m), 2 * (n + m));
      out.block(0, 0, n, n).setIdentity();
      out.block(0, n, n, m) = -2.0 * eta * a_cur;
      out.block(0, n + m + n, n, m) = eta * a_other;
      out.block(n, 0, m, n) = 2.0 * eta * a_cur.transpose();
      out.block(n, n, m, m).setIdentity();
      out.block(n, n + m, m, n) = -eta * a_other.transpose();
      out.block(n + m, 0, n, n).setIdentity();
      out.block(n + m + n, n, m, m).setIdentity();
      break;
    }
    case Method::NM: {
      // a_other is A_{t+1}
      const double eta = *cfg.eta;
      const double b1 = *cfg.beta1;
      const double b2 = *cfg.beta2;
      out.setZero(2 * (n + m), 2 * (n + m));
      out.block(0, 0, n, n) = (1.0 + b1) * RealMatrix::Identity(n, n);
      out.block(0, n, n, m) = -eta * a_cur;
      out.block(0, n + m, n, n) = -b1 * RealMatrix::Identity(n, n);
      out.block(n, 0, m, n) = eta * (1.0 + b1) * a_other.transpose();
      out.block(n, n, m, m) =
          (1.0 + b2) * RealMatrix::Identity(m, m) - eta * eta * a_other.transpose() * a_cur;
      out.block(n, n + m, m, n) = -eta * b1 * a_other.transpose();
      out.block(n, n + m + n, m, m) = -b2 * RealMatrix::Identity(m, m);
      out.block(n + m, 0, n, n).setIdentity();
      out.block(n + m + n, n, m, m).setIdentity();
      break;
    }
  }
}

}  // namespace

JointState step_direct(const DynamicsConfig& cfg, const PayoffSchedule& s,
                       const JointState& state, Round t) {
  check_state(s, state);
  if (t < 1) throw Error(ErrorKind::InvalidArgument, "rounds start at 1");
  const DynamicsConfig resolved = cfg.resolved(s);
  DirectStepper stepper(resolved, s);
  JointState next = state;
  stepper.step(next, t);
  return next;
}

RealMatrix iterative_matrix(const DynamicsConfig& cfg, const PayoffSchedule& s, Round t) {
  if (t < 1) throw Error(ErrorKind::InvalidArgument, "rounds start at 1");
  const DynamicsConfig resolved = cfg.resolved(s);
  const RealMatrix a_cur = s.payoff_at(t);
  RealMatrix a_other;
  switch (resolved.method) {
    case Method::OGDA: a_other = t == 1 ? s.payoff_before_start() : s.payoff_at(t - 1); break;
    case Method::NM: a_other = s.payoff_at(t + 1); break;
    case Method::EG: a_other = a_cur; break;
  }
  RealMatrix out;
  fill_iterative_matrix(resolved, a_cur, a_other, out);
  return out;
}

RealMatrix iterative_matrix(const DynamicsConfig& cfg, const RealMatrix& a) {
  const DynamicsConfig resolved = cfg.resolved(a);
  RealMatrix out;
  fill_iterative_matrix(resolved, a, a, out);
  return out;
}

namespace {

class DeltaRecorder {
 public:
  DeltaRecorder(const PayoffSchedule& s, const std::vector<Measure>& measures) {
    for (const auto& m : measures) refs_.push_back(&measure_matrix(s, m));
    tx_.resize(s.m());
    ay_.resize(s.n());
  }

  // Appends every measure for `st`; returns the largest value.
  double record(const JointState& st, std::vector<std::vector<double>>& out) {
    double largest = 0.0;
    for (std::size_t k = 0; k < refs_.size(); ++k) {
      tx_.noalias() = refs_[k]->transpose() * st.x;
      ay_.noalias() = *refs_[k] * st.y;
      const double d = tx_.stableNorm() + ay_.stableNorm();
      out[k].push_back(d);
      largest = std::max(largest, d);
    }
    return largest;
  }

 private:
  std::vector<const RealMatrix*> refs_;
  RealVector tx_, ay_;
};

}  // namespace

Trajectory simulate(const DynamicsConfig& cfg, const PayoffSchedule& s,
                    const JointState& init, Round rounds, const SimulationOptions& options) {
  check_state(s, init);
  if (rounds < 1 || rounds > kMaxRounds) {
    throw Error(ErrorKind::InvalidArgument, "rounds must lie in [1, 1e7]");
  }
  const DynamicsConfig resolved = cfg.resolved(s);

  Trajectory traj;
  traj.measures = options.measures.empty() ? default_measures(s) : options.measures;
  traj.deltas.assign(traj.measures.size(), {});
  const auto reserve = static_cast<std::size_t>(rounds);
  for (auto& d : traj.deltas) d.reserve(reserve);
  traj.joint_norms.reserve(reserve);
  traj.norm_x.reserve(reserve);
  traj.norm_y.reserve(reserve);
  DeltaRecorder recorder(s, traj.measures);

  traj.state_rounds.push_back(0);
  traj.states.push_back(init);

  const bool with_previous = resolved.uses_previous_state();
  const Eigen::Index n = s.n();
  const Eigen::Index m = s.m();

  JointState state = init;
  if (!with_previous) {
    state.x_prev = state.x;
    state.y_prev = state.y;
  }
  DirectStepper stepper(resolved, s);
  RealMatrix transition;
  RealVector stacked = state.stacked(with_previous);
  RealVector stacked_next(stacked.size());

  for (Round t = 1; t <= rounds; ++t) {
    if (options.path == SimulationPath::Direct) {
      stepper.step(state, t);
    } else {
      transition = iterative_matrix(resolved, s, t);
      stacked_next.noalias() = transition * stacked;
      stacked.swap(stacked_next);
      JointState next = JointState::unstack(stacked, n, m, with_previous);
      if (!with_previous) {
        next.x_prev.swap(state.x);
        next.y_prev.swap(state.y);
      }
      state = std::move(next);
    }

    const double nx = state.x.stableNorm();
    const double ny = state.y.stableNorm();
    const double joint = std::hypot(nx, ny);
    traj.norm_x.push_back(nx);
    traj.norm_y.push_back(ny);
    traj.joint_norms.push_back(joint);
    const double largest = recorder.record(state, traj.deltas);

    const bool stop_diverged = !(joint <= kDivergenceThreshold);
    const bool stop_underflow = !stop_diverged && largest > 0.0 && largest < kUnderflowThreshold;
    const bool last = t == rounds || stop_diverged || stop_underflow;
    if (options.state_stride > 0 && t % options.state_stride == 0 && !last) {
      traj.state_rounds.push_back(t);
      traj.states.push_back(state);
    }
    if (last) {
      traj.state_rounds.push_back(t);
      traj.states.push_back(state);
      if (stop_diverged) {
        traj.status = TrajectoryStatus::Diverged;
        traj.status_round = t;
      } else if (stop_underflow) {
        traj.status = TrajectoryStatus::Underflow;
        traj.status_round = t;
      }
      break;
    }
  }
  return traj;
}

}  // namespace tvgames
