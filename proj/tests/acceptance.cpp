// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tvgames/experiment.hpp"
#include "tvgames/rate_fit.hpp"
#include "tvgames/spectral.hpp"

using namespace tvgames;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RealVector vec(std::initializer_list<double> v) {
  RealVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

JointState perturbed_example_init() {
  JointState s = JointState::from_current(vec({15.0, 13.0}), vec({35.0, 1.0}));
  s.x_prev = vec({11.0, 3.0});
  s.y_prev = vec({35.0, 1.0});
  return s;
}

PayoffSchedule perturbed_example(double p) {
  return PayoffSchedule::perturbed(make_matrix({{2.0, 3.0}, {4.0, 6.0}}),
                                   {make_matrix({{-15.0, 70.0}, {-90.0, 90.0}}), DecayKind::PowerLaw, p});
}

DynamicsConfig config_for(Method m, double step) {
  switch (m) {
    case Method::EG: return DynamicsConfig::eg(step);
    case Method::OGDA: return DynamicsConfig::ogda(step);
    case Method::NM: return DynamicsConfig::nm(step);
  }
  return DynamicsConfig::eg(step);
}

constexpr Method kMethods[] = {Method::EG, Method::OGDA, Method::NM};

// 1. Direct vs matrix-product paths.
void path_equivalence(Outcome& out) {
  const std::vector<std::pair<std::string, PayoffSchedule>> schedules{
      {"alternating-sign", alternating_sign_game()}, {"period-3", three_cycle_game()}, {"perturbed", perturbed_example(4.0)}};
  const double steps[] = {0.1, 0.01, 0.005};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (std::size_t k = 0; k < schedules.size(); ++k) {
    const auto& s = schedules[k].second;
    for (Method m : kMethods) {
      JointState init = JointState::zeros(s.n(), s.m());
      for (RealVector* v : {&init.x, &init.y, &init.x_prev, &init.y_prev})
        for (auto& x : *v) x = g(rng);
      if (k == 2) init = perturbed_example_init();
      SimulationOptions direct;
      direct.state_stride = 1;
      SimulationOptions product = direct;
      product.path = SimulationPath::MatrixProduct;
      const auto a = simulate(config_for(m, steps[k]), s, init, 1000, direct);
      const auto b = simulate(config_for(m, steps[k]), s, init, 1000, product);
      bool ok = a.states.size() == b.states.size() && a.states.size() == 1001;
      for (std::size_t i = 0; ok && i < a.states.size(); ++i) {
        const RealVector va = a.states[i].stacked(true);
        const double rel = (va - b.states[i].stacked(true)).norm() / (1.0 + va.norm());
        worst = std::max(worst, rel);
        ok = rel <= 1e-10;
      }
      out.require(ok, std::string(to_string(m)) + " on " + schedules[k].first);
    }
  }
  out.detail << "worst relative gap " << worst;
}

// 2. Periodic extra-gradient converges at the product's lambda*.
void periodic_eg(Outcome& out) {
  const auto cfg = DynamicsConfig::eg(0.01);
  const auto s = three_cycle_game();
  const auto spec = preset("fig2-pe").series[0];
  const auto traj = simulate(cfg, s, initial_state(spec, 0, 0), 100000);
  out.require(traj.status == TrajectoryStatus::Completed, "trajectory completed");
  Round all_below = -1;
  for (Round r = 0; r < traj.rounds_completed(); ++r) {
    bool below = true;
    for (const auto& d : traj.deltas) below = below && d[static_cast<std::size_t>(r)] < 1e-6;
    if (below) {
      all_below = r + 1;
      break;
    }
  }
  out.require(all_below > 0, "all Delta_i below 1e-6 within 1e5 rounds");
  const double lambda_star_value = lambda_star(eigenvalues(period_product(cfg, s)));
  const double theory = std::log(lambda_star_value);
  double worst = 0.0;
  for (int i = 1; i <= 3; ++i) {
    const double per_period = 3.0 * fit_rate(traj, Measure::slot(i), 3).log_rate_per_round;
    worst = std::max(worst, std::abs(per_period - theory) / std::abs(theory));
  }
  out.require(worst <= 0.10, "per-period rate within 10% of ln lambda*");
  out.detail << "all Delta_i < 1e-6 from round " << all_below << ", ln lambda* " << theory
             << ", worst relative rate gap " << worst;
}

// 3. OGDA / NM divergence on the alternating-sign game.
void periodic_divergence(Outcome& out) {
  const auto s = alternating_sign_game();
  double worst_rate = 0.0, worst_closed = 0.0;
  for (double eta : {0.01, 0.05, 0.1}) {
    for (Method m : {Method::OGDA, Method::NM}) {
      const auto cfg = config_for(m, eta).resolved(s);
      const RealMatrix p = period_product(cfg, s);
      const EigenDecomposition dec = eigen_decompose(p);
      // Radius over the multipliers that are not the fixed ones.
      std::vector<Complex> skip{1.0};
      skip.emplace_back(m == Method::OGDA ? 0.0 : (*cfg.beta2) * (*cfg.beta2));
      double rho = 0.0;
      for (const auto& z : dec.spectrum.eigenvalues) {
        if (std::none_of(skip.begin(), skip.end(), [&](const Complex& e) { return std::abs(z - e) < 1e-8; }))
          rho = std::max(rho, std::abs(z));
      }
      const auto traj = simulate(cfg, s, divergent_init(cfg, s), 200000);
      const double fitted = fit_rate(traj, Measure::slot(1), 2).log_rate_per_round;
      const double expect = 0.5 * std::log(rho);
      const double gap = std::abs(fitted - expect) / std::abs(expect);
      worst_rate = std::max(worst_rate, gap);
      out.require(rho > 1.0 && gap <= 0.01, std::string(to_string(m)) + " rate at eta " + std::to_string(eta));
      if (m == Method::OGDA) {
        const double closed = std::abs(rho - ogda_period2_rate(eta));
        worst_closed = std::max(worst_closed, closed);
        out.require(closed <= 1e-10, "closed form at eta " + std::to_string(eta));
      }
    }
  }
  out.detail << "worst relative rate gap " << worst_rate << ", worst |rho - lambda'| " << worst_closed;
}

// 4. Schur test vs root moduli.
void schur_oracle(Outcome& out) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int decided = 0, agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto v = schur_quartic_test(u(rng), u(rng), u(rng), u(rng));
    if (std::abs(v.max_root_modulus - 1.0) <= 1e-8) continue;
    ++decided;
    if (v.stable == (v.max_root_modulus < 1.0)) ++agree;
  }
  out.require(decided > 0 && agree == decided, "agreement on every decidable quartic");
  out.detail << agree << "/" << decided << " decidable quartics agree";
}

// 5. Step-size thresholds keep the spectrum in the disk.
void thresholds(Outcome& out) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> entry(-1.0, 1.0), frac(0.05, 0.999);
  int checked = 0, singular_count = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index n = 1 + i % 3, m = 1 + (i / 3) % 3;
    RealMatrix a(n, m);
    for (auto& x : a.reshaped()) x = entry(rng);
    if (i % 5 == 0 && n == m) {
      if (n == 1) a(0, 0) = 0.0;
      else a.row(n - 1) = a.row(0) * 0.75;
    }
    const bool singular = min_singular_padded(a) < 1e-10;
    singular_count += singular ? 1 : 0;
    for (Method method : kMethods) {
      // A zero payoff has no threshold; any step is admissible.
      const double limit = step_size_threshold(method, a);
      const double step = frac(rng) * (std::isfinite(limit) ? limit : 1.0);
      const auto spectrum = eigenvalues(iterative_matrix(config_for(method, step), a));
      worst = std::max(worst, spectrum.max_modulus);
      const bool has_one = std::any_of(spectrum.eigenvalues.begin(), spectrum.eigenvalues.end(),
                                       [](const Complex& z) { return std::abs(z - 1.0) < 1e-7; });
      out.require(spectrum.max_modulus <= 1.0 + 1e-10, "modulus bound, matrix " + std::to_string(i));
      out.require(has_one == singular, "unit eigenvalue iff singular, matrix " + std::to_string(i));
      ++checked;
    }
  }
  out.detail << checked << " iterative matrices, " << singular_count << " singular payoffs, max modulus " << worst;
}

// 6. EG normality, kernel intersection, unit eigenspace.
void eg_structure(Outcome& out) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    RealMatrix a(1 + i % 3, 1 + (i / 3) % 3);
    for (auto& x : a.reshaped()) x = entry(rng);
    const RealMatrix m = iterative_matrix(DynamicsConfig::eg(0.05, 0.08), a);
    const double norm = two_norm(m);
    const double defect = two_norm(m * m.transpose() - m.transpose() * m) / (norm * norm);
    worst = std::max(worst, defect);
  }
  const auto s = three_cycle_game();
  const auto cfg = DynamicsConfig::eg(0.01);
  for (Round t = 1; t <= 3; ++t) {
    const RealMatrix m = iterative_matrix(cfg, s, t);
    const double norm = two_norm(m);
    worst = std::max(worst, two_norm(m * m.transpose() - m.transpose() * m) / (norm * norm));
  }
  out.require(worst <= 1e-12, "normality defect");
  const auto kic = kernel_intersection_check(cfg, s);
  out.require(kic.principal_angle < 1e-6, "kernel principal angle");
  const auto uc = unit_eigenspace_check(period_product(cfg, s));
  out.require(uc.rank_minus_identity + uc.unit_eigen_count == uc.dim, "rank + unit count = dim");
  out.require(uc.max_kernel_residual <= 1e-6, "kernel residual");
  out.detail << "max relative normality defect " << worst << ", principal angle " << kic.principal_angle
             << ", rank " << uc.rank_minus_identity << " + unit " << uc.unit_eigen_count << " = " << uc.dim;
}

// 7. BAP convergence on the perturbed presets.
void bap_convergence(Outcome& out) {
  std::ostringstream finals;
  for (const char* id : {"fig3-eg", "fig3-ogda", "fig3-nm"}) {
    const auto config = preset(id);
    for (std::size_t i = 0; i < config.series.size(); ++i) {
      const auto& spec = config.series[i];
      const auto s = spec.schedule.build();
      const auto traj = simulate(spec.dynamics, s, initial_state(spec, config.seed, i), config.rounds);
      const std::string tag = std::string(id) + "/" + spec.label;
      out.require(traj.status == TrajectoryStatus::Completed, tag + " completed");
      const double last = traj.deltas[0].back();
      finals << " " << tag << "=" << last;
      out.require(traj.rounds_completed() == 100000 && last < 1e-3, tag + " Delta < 1e-3 at 1e5");
      const double lambda = stable_lambda_estimate(spec.dynamics.resolved(s), s.reference_matrix());
      const auto env = envelope_check(traj, s, lambda);
      out.require(env.violations == 0, tag + " envelope violations " + std::to_string(env.violations));
    }
  }
  out.detail << "final Delta:" << finals.str();
}

// 8. Extra-gradient without BAP.
void eg_without_bap(Outcome& out) {
  struct Case {
    DecayKind kind;
    double p;
  };
  std::ostringstream hits;
  for (const Case c : {Case{DecayKind::PowerLaw, 0.4}, Case{DecayKind::PowerLaw, 0.2},
                       Case{DecayKind::LogPower, 1.5}, Case{DecayKind::LogPower, 1.3}}) {
    const auto s = PayoffSchedule::perturbed(make_matrix({{2.0, 3.0}, {4.0, 6.0}}),
                                             {make_matrix({{-10.0, 10.0}, {-10.0, 10.0}}), c.kind, c.p});
    const auto spec = preset(c.kind == DecayKind::PowerLaw ? "fig4-power" : "fig4-log").series[0];
    const auto cfg = spec.dynamics.resolved(s);
    const auto traj = simulate(cfg, s, perturbed_example_init(), 1'000'000);
    const std::string tag = std::string(to_string(c.kind)) + " " + std::to_string(c.p);
    const auto& d = traj.deltas[0];
    const auto hit = std::find_if(d.begin(), d.end(), [](double v) { return v < 1e-2; });
    out.require(hit != d.end(), tag + " reaches 1e-2");
    hits << " " << tag << "@" << (hit == d.end() ? -1 : (hit - d.begin()) + 1);
    // Monotone norm once alpha < 1 / sigma_t.
    Round start = -1;
    for (Round t = 1; t <= traj.rounds_completed(); ++t) {
      if (*cfg.alpha < 1.0 / two_norm(s.payoff_at(t))) {
        start = t;
        break;
      }
      if (t > 100000) break;
    }
    out.require(start > 0, tag + " step falls below 1/sigma_t");
    Round bad = 0;
    for (Round t = std::max<Round>(start, 2); t <= traj.rounds_completed(); ++t) {
      const auto i = static_cast<std::size_t>(t - 1);
      if (traj.joint_norms[i] > traj.joint_norms[i - 1] * (1.0 + 1e-12)) ++bad;
    }
    out.require(bad == 0, tag + " norm increases " + std::to_string(bad));
  }
  out.detail << "first round with Delta < 1e-2:" << hits.str();
}

// 9. Separation on the alternating perturbation.
void separation(Outcome& out) {
  const auto config = preset("figG2");
  std::ostringstream st;
  for (std::size_t i = 0; i < config.series.size(); ++i) {
    const auto& spec = config.series[i];
    const auto s = spec.schedule.build();
    const auto traj = simulate(spec.dynamics, s, initial_state(spec, config.seed, i), config.rounds);
    st << " " << spec.label << "=" << to_string(traj.status) << "@" << traj.rounds_completed();
    if (spec.dynamics.method == Method::EG) {
      const auto& d = traj.deltas[0];
      out.require(traj.status == TrajectoryStatus::Completed, "EG completed");
      // Decreasing: each tenth of the run ends lower than the previous one.
      bool decreasing = true;
      const std::size_t tenth = d.size() / 10;
      for (std::size_t k = 1; k <= 10; ++k) {
        const double prev = *std::max_element(d.begin() + (k - 1) * tenth, d.begin() + k * tenth);
        const double cur = *std::max_element(d.begin() + std::min(d.size() - 1, k * tenth), d.end());
        decreasing = decreasing && cur < prev;
      }
      out.require(decreasing, "EG Delta decreasing");
      st << "(Delta " << d.back() << ")";
    } else {
      out.require(traj.status == TrajectoryStatus::Diverged, std::string(to_string(spec.dynamics.method)) + " diverged");
    }
  }
  out.detail << "status:" << st.str();
}

// 10. Property suites.
void properties(Outcome& out) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  // Homogeneity and kernel characterization.
  for (int i = 0; i < 200; ++i) {
    RealMatrix a(2, 3);
    for (auto& x : a.reshaped()) x = g(rng);
    if (i % 2 == 0) a.row(1) = a.row(0) * 2.0;
    JointState st = JointState::zeros(2, 3);
    for (auto& x : st.x) x = g(rng);
    for (auto& x : st.y) x = g(rng);
    const double c = g(rng) * 5.0;
    const double base = delta_stable(a, st);
    const double scaled = delta_stable(a, JointState::from_current(c * st.x, c * st.y));
    if (std::abs(scaled - std::abs(c) * base) > 1e-12 * (1.0 + std::abs(c) * base)) {
      out.require(false, "homogeneity");
      break;
    }
    const RealMatrix kx = null_space(a.transpose(), 1e-10), ky = null_space(a, 1e-10);
    RealVector x = RealVector::Zero(2), y = RealVector::Zero(3);
    for (Eigen::Index k = 0; k < kx.cols(); ++k) x += g(rng) * kx.col(k);
    for (Eigen::Index k = 0; k < ky.cols(); ++k) y += g(rng) * ky.col(k);
    if (delta_stable(a, JointState::from_current(x, y)) > 1e-10) {
      out.require(false, "Delta vanishes on the kernels");
      break;
    }
    if (delta_stable(a, JointState::from_current(x + svd(a).u.col(0), y)) <= 1e-10) {
      out.require(false, "Delta positive off the kernels");
      break;
    }
  }
  // Geometric-sequence rate recovery.
  for (double r : {0.9, 0.999, 1.001, 1.2}) {
    std::vector<double> v;
    for (int t = 1; t <= 1000; ++t) v.push_back(3.0 * std::pow(r, t));
    const auto fit = fit_log_rate(v, 1, 0.5);
    out.require(std::abs(fit.log_rate_per_round - std::log(r)) <= 1e-10 && std::abs(fit.r_squared - 1.0) <= 1e-12,
                "geometric rate recovery");
  }
  // Preset determinism.
  for (const auto& id : preset_ids()) {
    const std::string a = dump_config(preset(id));
    out.require(a == dump_config(preset(id)) && a == dump_config(parse_config(a)), "preset " + id);
  }
  // CSV round trip.
  const auto dir = std::filesystem::temp_directory_path() / "tvgames_acceptance";
  std::filesystem::remove_all(dir);
  auto config = preset("fig3-ogda");
  config.rounds = 3000;
  config.stride = 1;
  config.svg = false;
  RunOptions opts;
  opts.keep_trajectories = true;
  const auto result = run_experiment(config, dir, opts);
  for (const auto& sr : result.series) {
    const auto table = read_csv(sr.csv_path);
    bool same = table.rows.size() == static_cast<std::size_t>(sr.trajectory->rounds_completed());
    for (const auto& m : sr.trajectory->measures) same = same && table.column(m.id()) == sr.trajectory->series(m);
    same = same && table.column("norm_x") == sr.trajectory->norm_x;
    out.require(same, "CSV round trip " + sr.label);
  }
  std::filesystem::remove_all(dir);
  out.detail << "homogeneity, kernel, geometric fit, " << preset_ids().size() << " presets, CSV round trip";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "path equivalence (direct vs matrix product)", 1.0, path_equivalence},
      {2, "periodic extra-gradient convergence and rate", 2.0, periodic_eg},
      {3, "periodic OGDA / NM divergence rate", 1.0, periodic_divergence},
      {4, "Schur quartic test vs companion roots", 60.0, schur_oracle},
      {5, "step-size thresholds", 60.0, thresholds},
      {6, "EG normality and kernel structure", 60.0, eg_structure},
      {7, "BAP convergence on the perturbed presets", 10.0, bap_convergence},
      {8, "extra-gradient without BAP", 30.0, eg_without_bap},
      {9, "alternating-perturbation separation", 2.0, separation},
      {10, "property suites", 60.0, properties},
  };
  const auto suite_start = Clock::now();
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = Clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double elapsed = seconds_since(start);
    if (elapsed > c.budget) {
      out.pass = false;
      out.detail << " [over the " << c.budget << " s budget]";
    }
    if (!out.pass) ++failures;
    std::printf("%s criterion %d: %s (%.2f s) %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, elapsed,
                out.detail.str().c_str());
    std::fflush(stdout);
  }
  const double total = seconds_since(suite_start);
  std::printf("%d/%zu criteria passed in %.2f s\n", static_cast<int>(criteria.size()) - failures, criteria.size(),
              total);
  return failures == 0 ? 0 : 1;
}
