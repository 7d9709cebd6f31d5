#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvgames/linalg.hpp"

using namespace tvgames;
using tvgames::testing::random_matrix;

namespace {

// Inverse iteration from the reported eigenvalue; returns ||m v - lambda v||.
double recovered_residual(const RealMatrix& m, Complex lambda) {
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXcd mc = m.cast<Complex>();
  const Complex shift = lambda + Complex(1e-10, 1e-10) * (1.0 + std::abs(lambda));
  Eigen::MatrixXcd shifted = mc - shift * Eigen::MatrixXcd::Identity(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
  for (int k = 0; k < 4; ++k) {
    v = lu.solve(v);
    v.normalize();
  }
  return (mc * v - lambda * v).norm();
}

}  // namespace

TEST(Eigenvalues, IdentityHasUnitSpectrum) {
  const Spectrum s = eigenvalues(RealMatrix::Identity(3, 3));
  ASSERT_EQ(s.eigenvalues.size(), 3u);
  for (const auto& ev : s.eigenvalues) EXPECT_NEAR(std::abs(ev - Complex(1.0)), 0.0, 1e-14);
  EXPECT_NEAR(s.max_modulus, 1.0, 1e-14);
}

TEST(Eigenvalues, RotationScaledMatrix) {
  const Spectrum s = eigenvalues(make_matrix({{0.99, -0.1}, {0.1, 0.99}}));
  ASSERT_EQ(s.eigenvalues.size(), 2u);
  EXPECT_NEAR(s.eigenvalues[0].real(), 0.99, 1e-14);
  EXPECT_NEAR(s.eigenvalues[0].imag(), -0.1, 1e-14);
  EXPECT_NEAR(s.eigenvalues[1].imag(), 0.1, 1e-14);
  EXPECT_NEAR(s.max_modulus, std::sqrt(0.9901), 1e-14);
}

TEST(Eigenvalues, PureRotation) {
  const Spectrum s = eigenvalues(make_matrix({{0.0, 1.0}, {-1.0, 0.0}}));
  EXPECT_NEAR(std::abs(s.eigenvalues[0] - Complex(0, -1)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.eigenvalues[1] - Complex(0, 1)), 0.0, 1e-14);
  EXPECT_NEAR(s.max_modulus, 1.0, 1e-14);
}

TEST(Eigenvalues, Errors) {
  EXPECT_ERROR_KIND(eigenvalues(RealMatrix::Zero(2, 3)), ErrorKind::NonSquare);
  EXPECT_ERROR_KIND(eigenvalues(RealMatrix::Zero(513, 513)), ErrorKind::DimensionTooLarge);
  RealMatrix bad = RealMatrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  EXPECT_ERROR_KIND(eigenvalues(bad), ErrorKind::NonFinite);
}

TEST(Eigenvalues, ResidualAndTraceOnRandomMatrices) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 12;
    const RealMatrix m = random_matrix(rng, n, n, -3.0, 3.0);
    const Spectrum s = eigenvalues(m);
    ASSERT_EQ(static_cast<Eigen::Index>(s.eigenvalues.size()), n);
    const double norm = two_norm(m);
    EXPECT_LE(s.residual_bound, kEigenResidualTolerance * norm);
    Complex sum = 0.0;
    double max_mod = 0.0;
    for (const auto& ev : s.eigenvalues) {
      sum += ev;
      max_mod = std::max(max_mod, std::abs(ev));
      EXPECT_LE(recovered_residual(m, ev), 1e-8 * norm) << "n=" << n;
    }
    EXPECT_NEAR(sum.real(), m.trace(), 1e-8 * static_cast<double>(n) * norm);
    EXPECT_NEAR(sum.imag(), 0.0, 1e-8 * static_cast<double>(n) * norm);
    EXPECT_DOUBLE_EQ(s.max_modulus, max_mod);
  }
}

TEST(Eigenvalues, DeterministicOrdering) {
  std::mt19937_64 rng(3);
  const RealMatrix m = random_matrix(rng, 6, 6);
  const auto a = eigenvalues(m).eigenvalues;
  const auto b = eigenvalues(m).eigenvalues;
  ASSERT_EQ(a, b);
  for (std::size_t i = 1; i < a.size(); ++i) {
    EXPECT_TRUE(a[i - 1].real() < a[i].real() ||
                (a[i - 1].real() == a[i].real() && a[i - 1].imag() <= a[i].imag()));
  }
}

TEST(Svd, Examples) {
  const RealVector z = singular_values(RealMatrix::Zero(2, 2));
  EXPECT_EQ(z(0), 0.0);
  EXPECT_EQ(z(1), 0.0);
  EXPECT_NEAR(singular_values(make_matrix({{1.0, -1.0}}))(0), std::sqrt(2.0), 1e-15);
  const RealVector s = singular_values(make_matrix({{2.0, 3.0}, {4.0, 6.0}}));
  EXPECT_NEAR(s(0), std::sqrt(65.0), 1e-13);
  EXPECT_NEAR(s(1), 0.0, 1e-13);
  EXPECT_EQ(numerical_rank(make_matrix({{2.0, 3.0}, {4.0, 6.0}}), 1e-8), 1);
}

TEST(Svd, ReconstructionAndOrthonormality) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index r = 1 + trial % 5;
    const Eigen::Index c = 1 + (trial / 5) % 5;
    const RealMatrix m = random_matrix(rng, r, c, -5.0, 5.0);
    const Svd d = svd(m);
    const Eigen::Index k = std::min(r, c);
    ASSERT_EQ(d.singulars.size(), k);
    for (Eigen::Index i = 1; i < k; ++i) EXPECT_GE(d.singulars(i - 1), d.singulars(i));
    RealMatrix sigma = RealMatrix::Zero(r, c);
    for (Eigen::Index i = 0; i < k; ++i) sigma(i, i) = d.singulars(i);
    EXPECT_LE(two_norm(d.u * sigma * d.v.transpose() - m), 1e-9 * two_norm(m));
    EXPECT_LE((d.u.transpose() * d.u - RealMatrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((d.v.transpose() * d.v - RealMatrix::Identity(c, c)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(TwoNorm, Examples) {
  EXPECT_NEAR(two_norm(RealMatrix::Identity(4, 4)), 1.0, 1e-15);
  EXPECT_NEAR(two_norm(make_matrix({{1.0, -1.0}})), std::sqrt(2.0), 1e-15);
  const RealMatrix b = make_matrix({{-15.0, 70.0}, {-90.0, 90.0}});
  // Largest singular value from the 2x2 closed form.
  const double fro2 = b.squaredNorm();
  const double det = b.determinant();
  const double expect = std::sqrt((fro2 + std::sqrt(fro2 * fro2 - 4.0 * det * det)) / 2.0);
  EXPECT_NEAR(two_norm(b), expect, 1e-10 * expect);
  EXPECT_NEAR(two_norm(b), svd(b).singulars(0), 1e-10 * expect);
}

TEST(MinSingular, PaddedForRectangular) {
  EXPECT_EQ(min_singular_padded(make_matrix({{1.0, -1.0}})), 0.0);
  EXPECT_NEAR(min_singular_padded(make_matrix({{3.0, 0.0}, {0.0, 2.0}})), 2.0, 1e-15);
}

TEST(NullSpace, RankDeficient) {
  const RealMatrix a = make_matrix({{2.0, 3.0}, {4.0, 6.0}});
  const RealMatrix k = null_space(a, 1e-8);
  ASSERT_EQ(k.cols(), 1);
  EXPECT_LE((a * k).norm(), 1e-12);
}

TEST(MakeMatrix, Validates) {
  const double data[] = {1.0, 2.0, 3.0};
  EXPECT_ERROR_KIND(make_matrix(2, 2, data), ErrorKind::DimensionMismatch);
  const double bad[] = {1.0, INFINITY};
  EXPECT_ERROR_KIND(make_matrix(1, 2, bad), ErrorKind::NonFinite);
  EXPECT_ERROR_KIND(make_matrix({{1.0, 2.0}, {3.0}}), ErrorKind::DimensionMismatch);
}

TEST(QuarticRoots, Examples) {
  for (const auto& r : quartic_roots(0, 0, 0, 0)) EXPECT_LE(std::abs(r), 1e-12);
  auto r = quartic_roots(-2, 0, 0, 0);
  std::vector<Complex> v(r.begin(), r.end());
  sort_complex(v);
  EXPECT_NEAR(std::abs(v[3] - Complex(2.0)), 0.0, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(v[i]), 1e-12);
  int plus = 0, minus = 0;
  for (const auto& z : quartic_roots(0, 2, 0, 1)) {
    // Double roots are only accurate to sqrt(eps).
    if (std::abs(z - Complex(0, 1)) < 1e-6) ++plus;
    if (std::abs(z - Complex(0, -1)) < 1e-6) ++minus;
  }
  EXPECT_EQ(plus, 2);
  EXPECT_EQ(minus, 2);
}

TEST(QuarticRoots, ResidualOnRandomCoefficients) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const double scale = 1.0 + std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    for (const auto& z : quartic_roots(a, b, c, d)) {
      const Complex p = (((z + a) * z + b) * z + c) * z + d;
      EXPECT_LE(std::abs(p), 1e-8 * scale) << a << " " << b << " " << c << " " << d;
    }
  }
}

TEST(QuadraticRoots, CancellationSafe) {
  auto r = quadratic_roots(-1e8, 1.0);  // x^2 - 1e8 x + 1
  EXPECT_NEAR(r[0].real(), 1e-8, 1e-22);
  EXPECT_NEAR(r[1].real(), 1e8, 1e-6);
  auto c = quadratic_roots(0.0, 1.0);
  EXPECT_NEAR(std::abs(c[0] - Complex(0, -1)), 0.0, 1e-15);
}
