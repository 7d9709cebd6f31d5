#include "tvgames/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tvgames/error.hpp"

namespace tvgames {

namespace {

double complex_two_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> solver(m);
  return solver.singularValues()(0);
}

const PeriodicGame& require_periodic(const PayoffSchedule& s) {
  const auto* p = std::get_if<PeriodicGame>(&s.kind());
  if (p == nullptr) {
    throw Error(ErrorKind::WrongScheduleKind, "operation needs a periodic schedule");
  }
  return *p;
}

}  // namespace

RealMatrix period_product(const DynamicsConfig& cfg, const PayoffSchedule& s) {
  const auto& game = require_periodic(s);
  const DynamicsConfig resolved = cfg.resolved(s);
  RealMatrix product;
  for (std::size_t t = 1; t <= game.matrices.size(); ++t) {
    const RealMatrix step = iterative_matrix(resolved, s, static_cast<Round>(t));
    if (t == 1) {
      product = step;
    } else {
      product = step * product;
    }
  }
  return product;
}

double lambda_star(const Spectrum& spectrum) {
  double best = 0.0;
  for (const auto& ev : spectrum.eigenvalues) {
    if (std::abs(ev - Complex(1.0, 0.0)) >= kUnitBand) best = std::max(best, std::abs(ev));
  }
  return best;
}

SpectralReport analyze_product(const RealMatrix& p, std::size_t period) {
  if (p.rows() != p.cols()) {
    throw Error(ErrorKind::NonSquare, "period product must be square");
  }
  if (period == 0) throw Error(ErrorKind::InvalidArgument, "period must be positive");
  const EigenDecomposition decomposition = eigen_decompose(p);

  SpectralReport report;
  report.matrix_dim = p.rows();
  report.spectrum = decomposition.spectrum;
  report.lambda_star = lambda_star(report.spectrum);
  const double inv_period = 1.0 / static_cast<double>(period);
  for (const auto& ev : report.spectrum.eigenvalues) {
    if (std::abs(ev - Complex(1.0, 0.0)) < kUnitBand) ++report.unit_eigen_count;
    const double modulus = std::abs(ev);
    report.floquet_exponents.push_back(modulus > 0.0
                                           ? inv_period * std::log(modulus)
                                           : -std::numeric_limits<double>::infinity());
  }

  const double norm = two_norm(p);
  report.normality_defect = two_norm(p * p.transpose() - p.transpose() * p);
  report.is_normal = report.normality_defect <= 1e-12 * std::max(norm * norm, 1e-300);

  const Eigen::MatrixXcd& vectors = decomposition.vectors;
  Eigen::JacobiSVD<Eigen::MatrixXcd> conditioning(vectors);
  const auto& sv = conditioning.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    report.diag_residual = std::numeric_limits<double>::infinity();
  } else {
    Eigen::VectorXcd diag(p.rows());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      diag(i) = report.spectrum.eigenvalues[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXcd scaled = vectors * diag.asDiagonal();
    // P D P^-1 = (P^-T (P D)^T)^T
    const Eigen::MatrixXcd recon =
        vectors.transpose().partialPivLu().solve(scaled.transpose()).transpose();
    const double err = complex_two_norm(recon - p.cast<Complex>());
    report.diag_residual = norm > 0.0 ? err / norm : err;
  }
  return report;
}

double stable_lambda_estimate(const DynamicsConfig& cfg, const RealMatrix& a) {
  return lambda_star(eigenvalues(iterative_matrix(cfg, a)));
}

QuarticVerdict schur_quartic_test(double a, double b, double c, double d) {
  QuarticVerdict verdict;
  const auto roots = quartic_roots(a, b, c, d);
  for (const auto& r : roots) {
    verdict.max_root_modulus = std::max(verdict.max_root_modulus, std::abs(r));
  }
  verdict.margin = 1.0 - verdict.max_root_modulus;
  if (std::abs(d - 1.0) < 1e-12) {
    verdict.conditions_applicable = false;
    verdict.conditions = {false, false, false};
    verdict.stable = verdict.max_root_modulus < 1.0;
    return verdict;
  }
  verdict.conditions[0] = std::abs(c - a * d) < 1.0 - d * d;
  verdict.conditions[1] = std::abs(a + c) < b + d + 1.0;
  verdict.conditions[2] = b < (1.0 + d) + (c - a * d) * (a - c) / ((d - 1.0) * (d - 1.0));
  verdict.stable = verdict.conditions[0] && verdict.conditions[1] && verdict.conditions[2];
  return verdict;
}

std::vector<Complex> StaticEigenFamily::all() const {
  std::vector<Complex> out;
  for (const auto& f : families) out.insert(out.end(), f.roots.begin(), f.roots.end());
  out.insert(out.end(), kernel_extras.begin(), kernel_extras.end());
  sort_complex(out);
  return out;
}

StaticEigenFamily static_eigen_family(const DynamicsConfig& cfg, const RealMatrix& a) {
  const DynamicsConfig r = cfg.resolved(a);
  const RealVector sigmas = singular_values(a);
  StaticEigenFamily out;
  for (Eigen::Index i = 0; i < sigmas.size(); ++i) {
    const double s = sigmas(i);
    RootSet set;
    set.sigma = s;
    switch (r.method) {
      case Method::OGDA: {
        // lambda^2 (lambda - 1)^2 + eta^2 s^2 (1 - 2 lambda)^2
        const double k = (*r.eta) * (*r.eta) * s * s;
        const auto roots = quartic_roots(-2.0, 1.0 + 4.0 * k, -4.0 * k, k);
        set.roots.assign(roots.begin(), roots.end());
        break;
      }
      case Method::EG: {
        // (lambda - 1)^2 + 2 gamma alpha s^2 (lambda - 1) + alpha^2 s^2 + alpha^2 gamma^2 s^4
        const double al = *r.alpha;
        const double ga = *r.gamma;
        const double s2 = s * s;
        const auto shifted = quadratic_roots(2.0 * ga * al * s2, al * al * s2 + al * al * ga * ga * s2 * s2);
        for (const auto& mu : shifted) set.roots.push_back(mu + 1.0);
        break;
      }
      case Method::NM: {
        // (lambda - 1)^2 (lambda - b1)(lambda - b2) + eta^2 s^2 lambda^3
        const double b1 = *r.beta1;
        const double b2 = *r.beta2;
        const double sum = b1 + b2;
        const double prod = b1 * b2;
        const double k = (*r.eta) * (*r.eta) * s * s;
        const auto roots = quartic_roots(k - (sum + 2.0), prod + 2.0 * sum + 1.0,
                                         -(2.0 * prod + sum), prod);
        set.roots.assign(roots.begin(), roots.end());
        break;
      }
    }
    sort_complex(set.roots);
    out.families.push_back(std::move(set));
  }

  // One-sided kernel directions: x in ker A^T when n > m, y in ker A when m > n.
  const Eigen::Index extra = std::abs(a.rows() - a.cols());
  const bool x_side = a.rows() > a.cols();
  for (Eigen::Index i = 0; i < extra; ++i) {
    out.kernel_extras.emplace_back(1.0, 0.0);
    switch (r.method) {
      case Method::OGDA: out.kernel_extras.emplace_back(0.0, 0.0); break;
      case Method::NM: out.kernel_extras.emplace_back(x_side ? *r.beta1 : *r.beta2, 0.0); break;
      case Method::EG: break;
    }
  }
  sort_complex(out.kernel_extras);
  return out;
}

double step_size_threshold(Method method, const RealMatrix& a) {
  const double sigma = two_norm(a);
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return method == Method::NM ? 1.0 / sigma : 1.0 / (2.0 * sigma);
}

double step_size_threshold(Method method, const PayoffSchedule& s) {
  if (const auto* p = std::get_if<PeriodicGame>(&s.kind())) {
    double sigma = 0.0;
    for (const auto& a : p->matrices) sigma = std::max(sigma, two_norm(a));
    if (sigma == 0.0) return std::numeric_limits<double>::infinity();
    return method == Method::OGDA ? 1.0 / (2.0 * sigma) : 1.0 / sigma;
  }
  return step_size_threshold(method, s.reference_matrix());
}

double ogda_period2_rate(double eta) {
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be positive");
  const double e2 = eta * eta;
  return 4.0 * e2 + 0.5 * std::sqrt(64.0 * e2 * e2 + 8.0 * e2 + 1.0) + 0.5;
}

NmCharpoly nm_period2_charpoly(double eta, double beta1, double beta2) {
  if (!(eta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be nonnegative");
  const double e2 = eta * eta;
  const double b1s = beta1 * beta1;
  const double b2s = beta2 * beta2;
  NmCharpoly cp;
  cp.a = -(4.0 * e2 * e2 + 4.0 * e2 * (beta2 - beta1) + b1s + b2s + 2.0);
  cp.b = 4.0 * e2 * (beta2 - beta1) + b1s * b2s + 2.0 * b1s + 2.0 * b2s + 1.0;
  cp.c = -(2.0 * b1s * b2s + b1s + b2s);
  cp.d = b1s * b2s;
  cp.fixed_roots = {1.0, b2s};
  return cp;
}

JointState divergent_init(const DynamicsConfig& cfg, const PayoffSchedule& s) {
  const DynamicsConfig r = cfg.resolved(s);
  const RealMatrix product = period_product(r, s);
  const EigenDecomposition decomposition = eigen_decompose(product);
  const auto& values = decomposition.spectrum.eigenvalues;

  std::vector<Complex> excluded{Complex(1.0, 0.0)};
  if (r.method == Method::OGDA) excluded.emplace_back(0.0, 0.0);
  if (r.method == Method::NM) excluded.emplace_back((*r.beta2) * (*r.beta2), 0.0);

  Eigen::Index best = -1;
  double best_modulus = -1.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const bool skip = std::any_of(excluded.begin(), excluded.end(), [&](const Complex& e) {
      return std::abs(values[j] - e) < kUnitBand;
    });
    // Strictly greater keeps the first of a conjugate or repeated pair.
    if (!skip && std::abs(values[j]) > best_modulus) {
      best_modulus = std::abs(values[j]);
      best = static_cast<Eigen::Index>(j);
    }
  }
  if (best < 0) {
    throw Error(ErrorKind::SolverFailure, "period product has no eligible eigenvalue");
  }

  Eigen::VectorXcd v = decomposition.vectors.col(best);
  RealVector folded;
  if (std::abs(values[static_cast<std::size_t>(best)].imag()) > 0.0) {
    folded = 2.0 * v.real();
  } else {
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    v *= std::conj(v(pivot)) / std::abs(v(pivot));
    folded = v.real();
  }
  const double norm = folded.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorKind::SolverFailure, "dominant eigenvector folds to zero");
  }
  folded /= norm;
  return JointState::unstack(folded, s.n(), s.m(), r.uses_previous_state());
}

double largest_angle_between(const RealMatrix& basis_a, const RealMatrix& basis_b) {
  if (basis_a.cols() != basis_b.cols()) return std::numbers::pi / 2.0;
  if (basis_a.cols() == 0) return 0.0;
  const RealMatrix residual_a = basis_a - basis_b * (basis_b.transpose() * basis_a);
  const RealMatrix residual_b = basis_b - basis_a * (basis_a.transpose() * basis_b);
  const double sine = std::max(two_norm(residual_a), two_norm(residual_b));
  return std::asin(std::min(1.0, sine));
}

KernelIntersectionReport kernel_intersection_check(const DynamicsConfig& cfg,
                                                   const PayoffSchedule& s) {
  const auto& game = require_periodic(s);
  const DynamicsConfig r = cfg.resolved(s);
  if (r.method != Method::EG) {
    throw Error(ErrorKind::InvalidArgument, "kernel intersection applies to extra-gradient");
  }
  const Eigen::Index dim = s.n() + s.m();
  const RealMatrix identity = RealMatrix::Identity(dim, dim);

  KernelIntersectionReport report;
  const std::size_t period = game.matrices.size();
  RealMatrix stacked(static_cast<Eigen::Index>(period) * dim, dim);
  for (std::size_t t = 1; t <= period; ++t) {
    const RealMatrix shifted = iterative_matrix(r, s, static_cast<Round>(t)) - identity;
    stacked.middleRows(static_cast<Eigen::Index>(t - 1) * dim, dim) = shifted;
    report.round_kernel_dims.push_back(null_space(shifted, kKernelThreshold).cols());
  }
  const RealMatrix product_kernel = null_space(period_product(r, s) - identity, kKernelThreshold);
  const RealMatrix common_kernel = null_space(stacked, kKernelThreshold);
  report.product_kernel_dim = product_kernel.cols();
  report.intersection_kernel_dim = common_kernel.cols();
  report.principal_angle = largest_angle_between(product_kernel, common_kernel);
  report.passed = report.principal_angle < 1e-6;
  return report;
}

UnitEigenspaceCheck unit_eigenspace_check(const RealMatrix& p) {
  if (p.rows() != p.cols()) throw Error(ErrorKind::NonSquare, "matrix must be square");
  UnitEigenspaceCheck out;
  out.dim = p.rows();
  const RealMatrix shifted = p - RealMatrix::Identity(p.rows(), p.cols());
  out.rank_minus_identity = numerical_rank(shifted, kKernelThreshold);
  for (const auto& ev : eigenvalues(p).eigenvalues) {
    if (std::abs(ev - Complex(1.0, 0.0)) < kUnitBand) ++out.unit_eigen_count;
  }
  const RealMatrix kernel = null_space(shifted, kKernelThreshold);
  for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
    out.max_kernel_residual = std::max(out.max_kernel_residual, (shifted * kernel.col(j)).norm());
  }
  return out;
}

double eigenspace_contraction(const RealMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::NonSquare, "matrix must be square");
  const Svd d = svd(m - RealMatrix::Identity(m.rows(), m.cols()));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d.singulars.size(); ++i) {
    if (d.singulars(i) >= kKernelThreshold) ++rank;
  }
  if (rank == 0) return 0.0;
  // Leading right singular vectors span the orthogonal complement of ker(M - I).
  return two_norm(m * d.v.leftCols(rank));
}

}  // namespace tvgames
