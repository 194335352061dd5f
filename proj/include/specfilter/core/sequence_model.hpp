#pragma once

#include <memory>
#include <span>
#include <vector>

#include "specfilter/core/error.hpp"

namespace specfilter {

// Singular system {b_i; phi_i, psi_i} of a discrete operator A : R^d -> R^n,
// with A phi_i = b_i psi_i. The source side carries the Euclidean inner
// product, the image side the empirical one <u,v>_n = n^-1 sum u_i v_i, so the
// psi_i are orthonormal with respect to <.,.>_n. For a matrix with Euclidean
// singular triplets (s_i, u_i, v_i) this means b_i = s_i / sqrt(n),
// phi_i = v_i and psi_i = sqrt(n) u_i.
//
// A system may also be given by its spectrum alone (implicit identity bases,
// phi_i = e_i and psi_i = sqrt(n) e_i); every sequence-space quantity depends
// only on (b_i, x_i, sigma), so spectrum-level simulation is exact.
class SingularSystem {
public:
  // SVD of a dense row-major rows x cols matrix (rows = n, cols = d >= n).
  // Singular values at or below tolerance * max_i |b_i| are an error, not a
  // silent truncation.
  static SingularSystem from_matrix(std::span<const double> row_major, int rows, int cols,
                                    double tolerance);

  // Spectrum-only constructor; b_i nonzero with b_i^2 non-increasing.
  static SingularSystem from_spectrum(std::vector<double> b);

  // Explicit bases, column-major: phi is d x n, psi is n x n. Orthonormality
  // is checked to 1e-8 and violations are errors.
  static SingularSystem from_bases(std::vector<double> b, std::vector<double> phi, int d,
                                   std::vector<double> psi);

  int n() const { return data_->n; }
  int d() const { return data_->d; }
  bool spectrum_only() const { return data_->phi.empty(); }
  std::span<const double> spectrum() const { return data_->b; }

  std::vector<double> phi(int i) const;  // length d
  std::vector<double> psi(int i) const;  // length n

  // <y, psi_i>_n for i = 1..n
  std::vector<double> image_coefficients(std::span<const double> y) const;
  // sum_i coeffs_i phi_i
  std::vector<double> synthesize(std::span<const double> coeffs) const;

private:
  struct Data {
    int n = 0;
    int d = 0;
    std::vector<double> b;
    std::vector<double> phi;  // d x n column-major, empty when spectrum-only
    std::vector<double> psi;  // n x n column-major, empty when spectrum-only
  };
  explicit SingularSystem(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  std::shared_ptr<const Data> data_;
};

struct ProblemInstance {
  ProblemInstance(SingularSystem system_, std::vector<double> x_, double sigma_);

  SingularSystem system;
  std::vector<double> x;  // x_i = <x_0, phi_i>
  double sigma;           // ambient noise sd, sigma > 0

  int n() const { return system.n(); }
};

struct SequenceObservation {
  SequenceObservation(std::vector<double> ydag_, std::vector<double> variances_);

  std::vector<double> ydag;       // ydag_i = x_i + eta_i
  std::vector<double> variances;  // sigma_i^2 = sigma^2 b_i^-2 / n, positive and non-decreasing

  int n() const { return static_cast<int>(ydag.size()); }
};

// sigma_i^2 = sigma^2 b_i^-2 / n
std::vector<double> noise_variances(const SingularSystem& system, double sigma);

// Moore-Penrose reduction of an ambient observation y to sequence form:
// ydag_i = b_i^-1 <y, psi_i>_n, variances from noise_variances.
SequenceObservation to_sequence(std::span<const double> y, const SingularSystem& system,
                                double sigma);

std::vector<double> synthesize(std::span<const double> coeffs, const SingularSystem& system);

}  // namespace specfilter
