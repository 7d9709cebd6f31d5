#pragma once

#include <string>
#include <string_view>

#include "tvgames/schedule.hpp"
#include "tvgames/state.hpp"

namespace tvgames {

// Identifies a distance-to-equilibrium measure recorded along a trajectory:
// `delta_<i>` measures against the i-th matrix of a period (or of an explicit
// sequence), `delta_stable` against the stable / tail matrix.
struct Measure {
  enum class Kind { PeriodSlot, Stable };
  Kind kind = Kind::Stable;
  int index = 0;  // 1-based for PeriodSlot

  static Measure slot(int i) { return {Kind::PeriodSlot, i}; }
  static Measure stable() { return {Kind::Stable, 0}; }
  static Measure parse(std::string_view id);
  std::string id() const;

  friend bool operator==(const Measure&, const Measure&) = default;
};

// ||A^T x||_2 + ||A y||_2
double delta_stable(const RealMatrix& a, const JointState& state);

// Delta against the i-th period matrix (1 <= i <= T).
double delta_periodic(const PayoffSchedule& s, const JointState& state, int i);

// Resolves the measure's reference matrix for this schedule.
const RealMatrix& measure_matrix(const PayoffSchedule& s, const Measure& measure);

// Every measure that makes sense for the schedule: one per period slot for
// periodic games, delta_stable for perturbed games, and both for explicit ones.
std::vector<Measure> default_measures(const PayoffSchedule& s);

}  // namespace tvgames
