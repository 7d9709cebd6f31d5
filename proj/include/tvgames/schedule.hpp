#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tvgames/linalg.hpp"

namespace tvgames {

// Rounds are 1-indexed throughout the library.
using Round = std::int64_t;

enum class DecayKind { PowerLaw, LogPower, Alternating };

std::string_view to_string(DecayKind kind);
DecayKind parse_decay_kind(std::string_view name);

// B_t = base * g(t), with g given by `kind` and `exponent`:
//   PowerLaw     g(t) = t^-p
//   LogPower     g(t) = log(t)^-p for t >= 2, g(1) = g(2)
//   Alternating  g(t) = t^-p on even t, 0 on odd t
struct PerturbationLaw {
  RealMatrix base;
  DecayKind kind = DecayKind::PowerLaw;
  double exponent = 1.0;

  double decay(Round t) const;
};

struct PeriodicGame {
  std::vector<RealMatrix> matrices;
};

struct PerturbedGame {
  RealMatrix stable;
  PerturbationLaw perturbation;
};

struct ExplicitGame {
  std::vector<RealMatrix> matrices;
  RealMatrix tail;
};

enum class BapVerdict { BoundedLikely, DivergentLikely, Inconclusive };
std::string_view to_string(BapVerdict verdict);

struct BapReport {
  std::vector<double> sums;  // sums[k] = sum_{i <= k+1} ||B_i||_2
  BapVerdict verdict = BapVerdict::Inconclusive;
};

// Immutable generator of the payoff matrix A_t.
class PayoffSchedule {
 public:
  using Kind = std::variant<PeriodicGame, PerturbedGame, ExplicitGame>;

  static PayoffSchedule periodic(std::vector<RealMatrix> matrices);
  static PayoffSchedule perturbed(RealMatrix stable, PerturbationLaw law);
  static PayoffSchedule explicit_sequence(std::vector<RealMatrix> matrices,
                                          RealMatrix tail);

  const Kind& kind() const noexcept { return kind_; }
  bool is_periodic() const noexcept { return std::holds_alternative<PeriodicGame>(kind_); }
  bool is_perturbed() const noexcept { return std::holds_alternative<PerturbedGame>(kind_); }
  bool is_explicit() const noexcept { return std::holds_alternative<ExplicitGame>(kind_); }

  Eigen::Index n() const noexcept { return n_; }
  Eigen::Index m() const noexcept { return m_; }

  // Period length for periodic schedules; 0 otherwise.
  std::size_t period() const noexcept;

  RealMatrix payoff_at(Round t) const;
  // Writes A_t into `out` without reallocating once `out` has shape n x m.
  void payoff_into(Round t, RealMatrix& out) const;

  // The matrix used where a round needs A_{t-1} at t = 1: the last matrix of
  // the period for periodic schedules, A_1 otherwise.
  RealMatrix payoff_before_start() const;

  // The matrix the game stabilises to: stable (perturbed), tail (explicit),
  // or the first period entry.
  const RealMatrix& reference_matrix() const;

 private:
  PayoffSchedule(Kind kind, Eigen::Index n, Eigen::Index m)
      : kind_(std::move(kind)), n_(n), m_(m) {}

  Kind kind_;
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
};

BapReport bap_partial_sums(const PayoffSchedule& s, Round horizon);

// Period-2 game with A_t = [1,-1] on odd t and [-1,1] on even t.
PayoffSchedule alternating_sign_game();
// Period-3 game {[[1,2],[2,4]], [[3,7],[7,1]], [[4,2],[4,2]]}.
PayoffSchedule three_cycle_game();

}  // namespace tvgames
