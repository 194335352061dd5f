#include "specfilter/core/sequence_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <utility>

namespace specfilter {

namespace {

constexpr double kOrthoTol = 1e-8;

void check_spectrum(const std::vector<double>& b) {
  require(!b.empty(), errc::invalid_argument, "spectrum must be non-empty");
  for (std::size_t i = 0; i < b.size(); ++i) {
    require(b[i] != 0.0 && std::isfinite(b[i]), errc::invalid_argument,
            "spectrum entries must be finite and non-zero");
    if (i > 0)
      require(b[i] * b[i] <= b[i - 1] * b[i - 1], errc::invalid_argument,
              "b_i^2 must be non-increasing");
  }
}

// Gram check of column-major columns under a weighted dot product.
void check_orthonormal(const std::vector<double>& cols, int len, int count, double weight,
                       const char* label) {
  for (int i = 0; i < count; ++i) {
    for (int j = i; j < count; ++j) {
      double dot = 0.0;
      for (int k = 0; k < len; ++k) dot += cols[i * len + k] * cols[j * len + k];
      dot *= weight;
      const double target = (i == j) ? 1.0 : 0.0;
      if (std::abs(dot - target) > kOrthoTol)
        raise(errc::invalid_argument,
              std::string(label) + " basis is not orthonormal to 1e-8");
    }
  }
}

}  // namespace

SingularSystem SingularSystem::from_spectrum(std::vector<double> b) {
  check_spectrum(b);
  auto data = std::make_shared<Data>();
  data->n = static_cast<int>(b.size());
  data->d = data->n;
  data->b = std::move(b);
  return SingularSystem(std::move(data));
}

SingularSystem SingularSystem::from_bases(std::vector<double> b, std::vector<double> phi, int d,
                                          std::vector<double> psi) {
  check_spectrum(b);
  const int n = static_cast<int>(b.size());
  require(d >= n, errc::dimension_mismatch, "source dimension d must be >= n");
  require(phi.size() == static_cast<std::size_t>(d) * n, errc::dimension_mismatch,
          "phi must be d x n");
  require(psi.size() == static_cast<std::size_t>(n) * n, errc::dimension_mismatch,
          "psi must be n x n");
  check_orthonormal(phi, d, n, 1.0, "phi");
  check_orthonormal(psi, n, n, 1.0 / n, "psi");
  auto data = std::make_shared<Data>();
  data->n = n;
  data->d = d;
  data->b = std::move(b);
  data->phi = std::move(phi);
  data->psi = std::move(psi);
  return SingularSystem(std::move(data));
}

SingularSystem SingularSystem::from_matrix(std::span<const double> row_major, int rows, int cols,
                                           double tolerance) {
  require(rows >= 1 && cols >= 1, errc::invalid_argument, "matrix must be non-empty");
  require(cols >= rows, errc::dimension_mismatch,
          "operator needs source dimension d >= n (got d < n)");
  require(row_major.size() == static_cast<std::size_t>(rows) * cols, errc::dimension_mismatch,
          "matrix data does not match rows*cols");
  require(tolerance >= 0.0, errc::invalid_argument, "tolerance must be >= 0");

  Eigen::MatrixXd a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a(r, c) = row_major[static_cast<std::size_t>(r) * cols + c];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();  // non-increasing
  const double smax = s(0);
  if (smax <= 0.0) raise(errc::rank_deficient, "matrix is zero, effective rank 0");
  for (int i = 0; i < rows; ++i) {
    if (s(i) <= tolerance * smax)
      raise(errc::rank_deficient, "effective rank " + std::to_string(i) + " < n = " +
                                      std::to_string(rows) + " at the given tolerance");
  }

  const double sqrt_n = std::sqrt(static_cast<double>(rows));
  auto data = std::make_shared<Data>();
  data->n = rows;
  data->d = cols;
  data->b.resize(rows);
  data->phi.resize(static_cast<std::size_t>(cols) * rows);
  data->psi.resize(static_cast<std::size_t>(rows) * rows);
  for (int i = 0; i < rows; ++i) {
    data->b[i] = s(i) / sqrt_n;
    for (int k = 0; k < cols; ++k)
      data->phi[static_cast<std::size_t>(i) * cols + k] = svd.matrixV()(k, i);
    for (int k = 0; k < rows; ++k)
      data->psi[static_cast<std::size_t>(i) * rows + k] = sqrt_n * svd.matrixU()(k, i);
  }
  check_orthonormal(data->phi, cols, rows, 1.0, "phi");
  check_orthonormal(data->psi, rows, rows, 1.0 / rows, "psi");
  return SingularSystem(std::move(data));
}

std::vector<double> SingularSystem::phi(int i) const {
  require(i >= 0 && i < n(), errc::invalid_argument, "basis index out of range");
  std::vector<double> out(static_cast<std::size_t>(d()), 0.0);
  if (spectrum_only()) {
    out[i] = 1.0;
  } else {
    const double* col = data_->phi.data() + static_cast<std::size_t>(i) * d();
    out.assign(col, col + d());
  }
  return out;
}

std::vector<double> SingularSystem::psi(int i) const {
  require(i >= 0 && i < n(), errc::invalid_argument, "basis index out of range");
  std::vector<double> out(static_cast<std::size_t>(n()), 0.0);
  if (spectrum_only()) {
    out[i] = std::sqrt(static_cast<double>(n()));
  } else {
    const double* col = data_->psi.data() + static_cast<std::size_t>(i) * n();
    out.assign(col, col + n());
  }
  return out;
}

std::vector<double> SingularSystem::image_coefficients(std::span<const double> y) const {
  const int nn = n();
  require(static_cast<int>(y.size()) == nn, errc::dimension_mismatch,
          "observation length must equal n");
  std::vector<double> out(nn);
  if (spectrum_only()) {
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(nn));
    for (int i = 0; i < nn; ++i) out[i] = y[i] * inv_sqrt_n;
    return out;
  }
  for (int i = 0; i < nn; ++i) {
    const double* col = data_->psi.data() + static_cast<std::size_t>(i) * nn;
    double dot = 0.0;
    for (int k = 0; k < nn; ++k) dot += y[k] * col[k];
    out[i] = dot / nn;
  }
  return out;
}

std::vector<double> SingularSystem::synthesize(std::span<const double> coeffs) const {
  const int nn = n();
  require(static_cast<int>(coeffs.size()) == nn, errc::dimension_mismatch,
          "coefficient length must equal n");
  if (spectrum_only()) return std::vector<double>(coeffs.begin(), coeffs.end());
  std::vector<double> out(static_cast<std::size_t>(d()), 0.0);
  for (int i = 0; i < nn; ++i) {
    const double ci = coeffs[i];
    const double* col = data_->phi.data() + static_cast<std::size_t>(i) * d();
    for (int k = 0; k < d(); ++k) out[k] += ci * col[k];
  }
  return out;
}

ProblemInstance::ProblemInstance(SingularSystem system_, std::vector<double> x_, double sigma_)
    : system(std::move(system_)), x(std::move(x_)), sigma(sigma_) {
  require(sigma > 0.0 && std::isfinite(sigma), errc::invalid_argument, "sigma must be > 0");
  require(static_cast<int>(x.size()) == system.n(), errc::dimension_mismatch,
          "coefficient vector length must equal n");
}

SequenceObservation::SequenceObservation(std::vector<double> ydag_, std::vector<double> variances_)
    : ydag(std::move(ydag_)), variances(std::move(variances_)) {
  require(ydag.size() == variances.size(), errc::dimension_mismatch,
          "ydag and variances must have equal length");
  for (std::size_t i = 0; i < variances.size(); ++i) {
    require(variances[i] > 0.0, errc::invalid_argument, "variances must be positive");
    if (i > 0)
      require(variances[i] >= variances[i - 1], errc::invalid_argument,
              "variances must be non-decreasing");
  }
}

std::vector<double> noise_variances(const SingularSystem& system, double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), errc::invalid_argument, "sigma must be > 0");
  const int n = system.n();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double b = system.spectrum()[i];
    out[i] = sigma * sigma / (b * b * n);
  }
  return out;
}

SequenceObservation to_sequence(std::span<const double> y, const SingularSystem& system,
                                double sigma) {
  std::vector<double> coeffs = system.image_coefficients(y);
  for (int i = 0; i < system.n(); ++i) coeffs[i] /= system.spectrum()[i];
  return SequenceObservation(std::move(coeffs), noise_variances(system, sigma));
}

std::vector<double> synthesize(std::span<const double> coeffs, const SingularSystem& system) {
  return system.synthesize(coeffs);
}

}  // namespace specfilter
