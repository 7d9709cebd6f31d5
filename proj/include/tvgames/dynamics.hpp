#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvgames/metrics.hpp"
#include "tvgames/schedule.hpp"
#include "tvgames/state.hpp"

namespace tvgames {

enum class Method { OGDA, EG, NM };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

constexpr double kDivergenceThreshold = 1e150;
constexpr double kUnderflowThreshold = 1e-300;
constexpr Round kMaxRounds = 10'000'000;

// Method plus hyperparameters. Unset fields take the defaults below when the
// config is resolved against a schedule; only the fields relevant to the
// method are consulted.
//   EG    alpha = gamma = 0.9 / (2 sigma)
//   OGDA  eta = 0.9 / (2 sigma)
//   NM    eta = 0.9 / sigma, beta1 = -0.5, beta2 = 0
// sigma is the largest singular value of the schedule's reference matrix.
struct DynamicsConfig {
  Method method = Method::EG;
  std::optional<double> eta;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> beta1;
  std::optional<double> beta2;

  static DynamicsConfig eg(double alpha, double gamma);
  static DynamicsConfig eg(double step) { return eg(step, step); }
  static DynamicsConfig ogda(double eta);
  static DynamicsConfig nm(double eta, double beta1 = -0.5, double beta2 = 0.0);

  // Fills every unset field and validates signs; throws InvalidArgument.
  DynamicsConfig resolved(const RealMatrix& reference) const;
  DynamicsConfig resolved(const PayoffSchedule& s) const;

  bool uses_previous_state() const noexcept { return method != Method::EG; }
};

enum class TrajectoryStatus { Completed, Diverged, Underflow };
std::string_view to_string(TrajectoryStatus status);

enum class SimulationPath { Direct, MatrixProduct };

struct Trajectory {
  std::vector<Measure> measures;
  // deltas[k][r] is measure k after round r + 1.
  std::vector<std::vector<double>> deltas;
  std::vector<double> joint_norms;
  std::vector<double> norm_x;
  std::vector<double> norm_y;
  // Sampled states; always contains the initial state (round 0) and the last.
  std::vector<Round> state_rounds;
  std::vector<JointState> states;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  Round status_round = 0;  // round at which Diverged / Underflow was raised

  Round rounds_completed() const noexcept { return static_cast<Round>(joint_norms.size()); }
  const std::vector<double>& series(const Measure& m) const;
  const JointState& final_state() const { return states.back(); }
};

// One round of the update rule.
JointState step_direct(const DynamicsConfig& cfg, const PayoffSchedule& s,
                       const JointState& state, Round t);

// The matrix M_t with X_{t+1} = M_t X_t, where X = (x, y) for EG and
// (x, y, x_prev, y_prev) for OGDA / NM.
RealMatrix iterative_matrix(const DynamicsConfig& cfg, const PayoffSchedule& s, Round t);

// Same as above for a static game with payoff `a`.
RealMatrix iterative_matrix(const DynamicsConfig& cfg, const RealMatrix& a);

struct SimulationOptions {
  SimulationPath path = SimulationPath::Direct;
  std::vector<Measure> measures;  // empty: default_measures(schedule)
  Round state_stride = 0;          // 0: keep only the initial and final states
};

Trajectory simulate(const DynamicsConfig& cfg, const PayoffSchedule& s,
                    const JointState& init, Round rounds,
                    const SimulationOptions& options = {});

}  // namespace tvgames
