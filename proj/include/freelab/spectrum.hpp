#pragma once

#include <complex>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace freelab {

/// Dense real matrices are stored row-major.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Eigenvalues of one matrix together with where they came from.
struct SpectralSample {
  std::vector<std::complex<double>> eigenvalues;
  std::string source;         // ensemble description
  std::string normalization;  // e.g. "A/sqrt(n)", "(1/n)XX^T"

  std::size_t size() const noexcept { return eigenvalues.size(); }
  /// Moduli in ascending order.
  std::vector<double> sorted_moduli() const;
};

/// CSV with header `re,im`, one eigenvalue per line, 17 significant digits.
void write_spectrum_csv(std::ostream& out, const SpectralSample& sample);
/// Reads the format written by write_spectrum_csv. Throws ParseError.
SpectralSample read_spectrum_csv(std::istream& in);

}  // namespace freelab
