#pragma once

#include "tvgames/linalg.hpp"

namespace tvgames {

// Learning state (x_t, y_t) together with the previous round's strategies,
// which OGDA and negative momentum read; extra-gradient ignores them.
struct JointState {
  RealVector x;
  RealVector y;
  RealVector x_prev;
  RealVector y_prev;

  static JointState zeros(Eigen::Index n, Eigen::Index m);
  // Previous strategies default to the current ones.
  static JointState from_current(RealVector x, RealVector y);

  // ||(x, y)||_2
  double joint_norm() const;
  bool finite() const;

  // Stacked (x, y) or (x, y, x_prev, y_prev).
  RealVector stacked(bool with_previous) const;
  static JointState unstack(const RealVector& v, Eigen::Index n, Eigen::Index m,
                            bool with_previous);
};

}  // namespace tvgames
