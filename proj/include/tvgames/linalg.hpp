#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tvgames {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Complex = std::complex<double>;

constexpr double kEigenResidualTolerance = 1e-8;
constexpr Eigen::Index kMaxEigenDimension = 512;

// Builds a matrix from row-major entries, rejecting non-finite values.
RealMatrix make_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::span<const double> row_major);
RealMatrix make_matrix(std::initializer_list<std::initializer_list<double>> rows);

bool all_finite(const RealMatrix& m);

struct Spectrum {
  std::vector<Complex> eigenvalues;  // sorted by (re, im)
  double max_modulus = 0.0;
  double residual_bound = 0.0;  // worst ||m v - lambda v|| over unit v
};

struct EigenDecomposition {
  Spectrum spectrum;
  Eigen::MatrixXcd vectors;  // column j pairs with spectrum.eigenvalues[j]
};

Spectrum eigenvalues(const RealMatrix& m);
EigenDecomposition eigen_decompose(const RealMatrix& m);

struct Svd {
  RealMatrix u;
  RealVector singulars;  // descending
  RealMatrix v;
};

Svd svd(const RealMatrix& m);
RealVector singular_values(const RealMatrix& m);
double two_norm(const RealMatrix& m);

// Smallest singular value with zero padding: a non-square matrix always has a
// nontrivial kernel on one side, so it reports 0.
double min_singular_padded(const RealMatrix& m);

// Orthonormal basis of {v : ||m v|| small}, from right singular vectors whose
// singular value is below `threshold`.
RealMatrix null_space(const RealMatrix& m, double threshold);
Eigen::Index numerical_rank(const RealMatrix& m, double threshold);

// Roots of x^4 + a x^3 + b x^2 + c x + d via the companion matrix spectrum.
std::array<Complex, 4> quartic_roots(double a, double b, double c, double d);

// Both roots of x^2 + p x + q with complex arithmetic.
std::array<Complex, 2> quadratic_roots(double p, double q);

// Deterministic ordering used everywhere eigenvalues are reported.
void sort_complex(std::vector<Complex>& values);

}  // namespace tvgames
