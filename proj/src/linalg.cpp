#include "tvgames/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tvgames/error.hpp"

namespace tvgames {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::WrongScheduleKind: return "WrongScheduleKind";
    case ErrorKind::IndexOutOfPeriod: return "IndexOutOfPeriod";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::NonPositiveSamples: return "NonPositiveSamples";
    case ErrorKind::BapViolated: return "BapViolated";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

RealMatrix make_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::span<const double> row_major) {
  if (rows <= 0 || cols <= 0) {
    throw Error(ErrorKind::InvalidArgument, "matrix dimensions must be positive");
  }
  if (static_cast<Eigen::Index>(row_major.size()) != rows * cols) {
    throw Error(ErrorKind::DimensionMismatch,
                "expected " + std::to_string(rows * cols) + " entries, got " +
                    std::to_string(row_major.size()));
  }
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double v = row_major[static_cast<std::size_t>(i * cols + j)];
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFinite, "matrix entry is not finite");
      }
      m(i, j) = v;
    }
  }
  return m;
}

RealMatrix make_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_cols = n_rows > 0 ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n_rows * n_cols));
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw Error(ErrorKind::DimensionMismatch, "ragged matrix rows");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return make_matrix(n_rows, n_cols, flat);
}

bool all_finite(const RealMatrix& m) { return m.allFinite(); }

void sort_complex(std::vector<Complex>& values) {
  std::sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

EigenDecomposition eigen_decompose(const RealMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::NonSquare, "eigenvalues need a square matrix");
  }
  if (m.rows() > kMaxEigenDimension) {
    throw Error(ErrorKind::DimensionTooLarge,
                "dimension " + std::to_string(m.rows()) + " exceeds 512");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
  }
  const Eigen::Index n = m.rows();
  Eigen::EigenSolver<RealMatrix> solver(m, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverFailure, "Schur iteration did not converge");
  }
  const Eigen::VectorXcd values = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (values[a].real() != values[b].real()) return values[a].real() < values[b].real();
    return values[a].imag() < values[b].imag();
  });

  EigenDecomposition out;
  out.vectors.resize(n, n);
  out.spectrum.eigenvalues.reserve(static_cast<std::size_t>(n));
  const Eigen::MatrixXcd mc = m.cast<Complex>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    const Complex lambda = values[src];
    Eigen::VectorXcd v = vectors.col(src);
    const double vn = v.norm();
    if (vn > 0.0) v /= vn;
    const double residual = (mc * v - lambda * v).norm();
    out.spectrum.eigenvalues.push_back(lambda);
    out.spectrum.max_modulus = std::max(out.spectrum.max_modulus, std::abs(lambda));
    out.spectrum.residual_bound = std::max(out.spectrum.residual_bound, residual);
    out.vectors.col(j) = v;
  }
  const double scale = n > 0 ? two_norm(m) : 0.0;
  if (out.spectrum.residual_bound > kEigenResidualTolerance * scale) {
    throw Error(ErrorKind::SolverFailure,
                "eigenvector residual " + std::to_string(out.spectrum.residual_bound) +
                    " exceeds tolerance");
  }
  return out;
}

Spectrum eigenvalues(const RealMatrix& m) { return eigen_decompose(m).spectrum; }

Svd svd(const RealMatrix& m) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
  }
  Eigen::JacobiSVD<RealMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverFailure, "SVD did not converge");
  }
  // JacobiSVD already returns singular values in decreasing order.
  return Svd{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

RealVector singular_values(const RealMatrix& m) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
  }
  Eigen::JacobiSVD<RealMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverFailure, "SVD did not converge");
  }
  return solver.singularValues();
}

double two_norm(const RealMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

double min_singular_padded(const RealMatrix& m) {
  if (m.rows() != m.cols()) return 0.0;
  const RealVector s = singular_values(m);
  return s(s.size() - 1);
}

RealMatrix null_space(const RealMatrix& m, double threshold) {
  const Svd d = svd(m);
  const Eigen::Index n = m.cols();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d.singulars.size(); ++i) {
    if (d.singulars(i) >= threshold) ++rank;
  }
  return d.v.rightCols(n - rank);
}

Eigen::Index numerical_rank(const RealMatrix& m, double threshold) {
  const RealVector s = singular_values(m);
  return static_cast<Eigen::Index>((s.array() >= threshold).count());
}

std::array<Complex, 4> quartic_roots(double a, double b, double c, double d) {
  for (double coef : {a, b, c, d}) {
    if (!std::isfinite(coef)) {
      throw Error(ErrorKind::NonFinite, "quartic coefficient is not finite");
    }
  }
  // Exact zero roots are split off so the companion matrix of the rest is
  // not asked to resolve a multiple root at the origin.
  const double coef[4] = {a, b, c, d};
  int degree = 4;
  while (degree > 0 && coef[degree - 1] == 0.0) --degree;
  std::array<Complex, 4> roots{};
  if (degree > 0) {
    RealMatrix companion = RealMatrix::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -coef[degree - 1 - i];
    const Spectrum s = eigenvalues(companion);
    for (int i = 0; i < degree; ++i) roots[static_cast<std::size_t>(i)] = s.eigenvalues[static_cast<std::size_t>(i)];
  }
  std::sort(roots.begin(), roots.end(), [](const Complex& l, const Complex& r) {
    return std::abs(l) != std::abs(r) ? std::abs(l) > std::abs(r)
                                      : (l.real() != r.real() ? l.real() > r.real() : l.imag() > r.imag());
  });
  return roots;
}

std::array<Complex, 2> quadratic_roots(double p, double q) {
  const Complex half_p(p / 2.0, 0.0);
  Complex root_disc = std::sqrt(half_p * half_p - Complex(q, 0.0));
  // Pick the sign that avoids cancellation, then recover the partner root
  // from the product of roots.
  if (p < 0.0) root_disc = -root_disc;
  const Complex r1 = -(half_p + root_disc);
  const Complex r2 = std::abs(r1) > 0.0 ? Complex(q, 0.0) / r1 : -Complex(p, 0.0) - r1;
  std::array<Complex, 2> roots{r1, r2};
  if (roots[1].real() < roots[0].real() ||
      (roots[1].real() == roots[0].real() && roots[1].imag() < roots[0].imag())) {
    std::swap(roots[0], roots[1]);
  }
  return roots;
}

}  // namespace tvgames
