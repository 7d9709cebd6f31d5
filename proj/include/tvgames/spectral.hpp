#pragma once

#include <array>
#include <limits>
#include <vector>

#include "tvgames/dynamics.hpp"

namespace tvgames {

// |lambda - 1| below this counts as the eigenvalue 1.
constexpr double kUnitBand = 1e-8;
// Singular values below this span a numerical kernel.
constexpr double kKernelThreshold = 1e-8;

struct SpectralReport {
  Eigen::Index matrix_dim = 0;
  Spectrum spectrum;
  double lambda_star = 0.0;           // max |lambda| over |lambda - 1| >= kUnitBand
  int unit_eigen_count = 0;
  std::vector<double> floquet_exponents;  // paired with spectrum.eigenvalues; -inf for 0
  bool is_normal = false;
  double normality_defect = 0.0;      // ||p p^T - p^T p||_2
  double diag_residual = 0.0;         // ||P D P^-1 - p|| / ||p||, +inf if P is singular
};

// Product of iterative matrices over one period, M_T ... M_1.
RealMatrix period_product(const DynamicsConfig& cfg, const PayoffSchedule& s);

SpectralReport analyze_product(const RealMatrix& p, std::size_t period);

// Largest modulus excluding the unit band.
double lambda_star(const Spectrum& spectrum);

// lambda* of the static-game iterative matrix built from `a`; the default
// geometric rate for the perturbed-game envelope.
double stable_lambda_estimate(const DynamicsConfig& cfg, const RealMatrix& a);

struct QuarticVerdict {
  bool stable = false;
  double margin = 0.0;            // 1 - max root modulus
  double max_root_modulus = 0.0;
  std::array<bool, 3> conditions{};
  bool conditions_applicable = true;  // false when |d - 1| < 1e-12
};

// Schur-Cohn style test for x^4 + a x^3 + b x^2 + c x + d:
//   |c - a d| < 1 - d^2,  |a + c| < b + d + 1,
//   b < (1 + d) + (c - a d)(a - c) / (d - 1)^2.
QuarticVerdict schur_quartic_test(double a, double b, double c, double d);

struct RootSet {
  double sigma = 0.0;
  std::vector<Complex> roots;
};

// Eigenvalues of a static-game iterative matrix, grouped by singular value.
// `kernel_extras` covers the |n - m| one-sided kernel directions that have no
// partner singular value.
struct StaticEigenFamily {
  std::vector<RootSet> families;
  std::vector<Complex> kernel_extras;

  std::vector<Complex> all() const;
};

StaticEigenFamily static_eigen_family(const DynamicsConfig& cfg, const RealMatrix& a);

// Largest step that keeps every iterative-matrix eigenvalue in the closed
// unit disk: 1/(2 sigma) for EG and OGDA on a static or perturbed game,
// 1/sigma for NM and for EG on a periodic game. +inf when sigma = 0.
double step_size_threshold(Method method, const RealMatrix& a);
double step_size_threshold(Method method, const PayoffSchedule& s);

// Dominant Floquet multiplier of OGDA on the alternating-sign period-2 game:
// 4 eta^2 + sqrt(64 eta^4 + 8 eta^2 + 1) / 2 + 1/2.
double ogda_period2_rate(double eta);

// Characteristic polynomial of the NM period product on the alternating-sign
// game: quartic(a, b, c, d) * (lambda - 1) * (lambda - beta2^2).
struct NmCharpoly {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  std::array<double, 2> fixed_roots{1.0, 0.0};
};

NmCharpoly nm_period2_charpoly(double eta, double beta1, double beta2);

// Real initial state along the period product's dominant eigenvector, skipping
// the eigenvalues 1 and 0 (OGDA), 1 and beta2^2 (NM) or 1 (EG). Complex
// eigenvectors are folded into v + conj(v). Unit norm.
JointState divergent_init(const DynamicsConfig& cfg, const PayoffSchedule& s);

struct KernelIntersectionReport {
  Eigen::Index product_kernel_dim = 0;
  Eigen::Index intersection_kernel_dim = 0;
  std::vector<Eigen::Index> round_kernel_dims;
  double principal_angle = 0.0;  // largest angle between the two subspaces
  bool passed = false;           // angle < 1e-6
};

// Compares ker(P - I) for the EG period product with the intersection of
// ker(M_i - I) over the period.
KernelIntersectionReport kernel_intersection_check(const DynamicsConfig& cfg,
                                                   const PayoffSchedule& s);

struct UnitEigenspaceCheck {
  Eigen::Index dim = 0;
  Eigen::Index rank_minus_identity = 0;
  int unit_eigen_count = 0;
  double max_kernel_residual = 0.0;  // max ||(P - I) v|| over unit kernel vectors
};

// Numerical check that the eigenvalue 1 of `p` carries only 1x1 Jordan blocks.
UnitEigenspaceCheck unit_eigenspace_check(const RealMatrix& p);

// Largest ||M v|| / ||v|| over v orthogonal to the eigenspace of 1.
double eigenspace_contraction(const RealMatrix& m);

double largest_angle_between(const RealMatrix& basis_a, const RealMatrix& basis_b);

}  // namespace tvgames
