#pragma once

// S-transforms of products of circular elements, radial distribution
// functions of Brown measures, and the Fuglede-Kadison determinant.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "freelab/spectrum.hpp"

namespace freelab {

/// S-transform of c c^* for a circular c: 1 / (1 + z).
double s_transform_cc_star(double z);
/// S-transform of c_1...c_k c_k^*...c_1^*: (1 + z)^{-k}.
double s_k(double z, int k);
/// Compositional inverse of s_k on t > 0: t^{-1/k} - 1.
double s_k_inverse(double t, int k);

/// Compositional inverse of the S-transform of x x^*, together with the two
/// moments that fix the support of the Brown measure of x.
struct STransformInverse {
  std::function<double(double)> inverse;
  double phi_xx = 1.0;
  /// phi((x x^*)^{-1}); nullopt when infinite.
  std::optional<double> phi_inverse;

  double inner_radius() const;
  double outer_radius() const;

  /// Data for x = c_1 ... c_k.
  static STransformInverse product_of_circular(int k);
  /// Inverts a monotone S on [lo, hi] by bisection (tolerance 1e-12).
  /// Arguments t outside S([lo, hi]) map to the nearer endpoint.
  static STransformInverse from_s_transform(std::function<double(double)> s, double lo, double hi,
                                            double phi_xx, std::optional<double> phi_inverse);
};

/// Radial distribution t -> mu({|z| <= t}).
class RadialCDF {
 public:
  RadialCDF(std::function<double(double)> evaluator, std::string descriptor, double outer_radius,
            std::vector<double> jumps = {});

  double operator()(double t) const { return evaluator_(t); }
  const std::string& descriptor() const noexcept { return descriptor_; }
  double outer_radius() const noexcept { return outer_radius_; }
  /// Jump locations of a step function (sorted); empty when continuous.
  const std::vector<double>& jumps() const noexcept { return jumps_; }

 private:
  std::function<double(double)> evaluator_;
  std::string descriptor_;
  double outer_radius_;
  std::vector<double> jumps_;
};

/// min(t^{2/k}, 1); k >= 2.
double brown_radial_cdf_product(int k, double t);
/// 0 below the inner radius, 1 + S^{<-1>}(t^{-2}) in between, 1 from the
/// outer radius on.
double brown_radial_cdf_rdiagonal(const STransformInverse& sinv, double t);

RadialCDF product_radial_cdf(int k);
/// Checks monotonicity on a 201 point grid; throws ConsistencyError.
RadialCDF rdiagonal_radial_cdf(STransformInverse sinv);
/// t -> #{|lambda_i| <= t} / n.
RadialCDF empirical_radial_cdf(const SpectralSample& sample);

/// sup_t |F(t) - G(t)| where F is a step function and G continuous.
double sup_distance(const RadialCDF& empirical, const RadialCDF& model);

/// |det A|^{1/n}, via log-moduli of LU pivots; 0 for singular A.
double fk_determinant(const Matrix& a);
double fk_determinant(const ComplexMatrix& a);

/// Evenly spaced grid of `points` values on [0, 1.2 * outer radius].
std::vector<double> default_radial_grid(const RadialCDF& cdf, int points = 201);

/// CSV `t,F(t)`; an optional overlay adds `empirical` and `distance` columns.
void write_radial_csv(std::ostream& out, const RadialCDF& cdf, const std::vector<double>& grid,
                      const RadialCDF* overlay = nullptr);

}  // namespace freelab
