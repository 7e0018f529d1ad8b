#include "freelab/brown.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "freelab/errors.hpp"

namespace freelab {

namespace {

void check_pole(double z) {
  if (z == -1.0) throw DomainError("S-transform has a pole at z = -1");
}

template <class Mat>
double fk_from_lu(const Mat& a) {
  if (a.rows() != a.cols()) throw DomainError("Fuglede-Kadison determinant needs a square matrix");
  const auto n = a.rows();
  if (n == 0) throw DomainError("Fuglede-Kadison determinant of an empty matrix");
  Eigen::PartialPivLU<Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(a);
  const auto& packed = lu.matrixLU();
  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::abs(packed(i, i));
    if (m == 0.0) return 0.0;
    log_sum += std::log(m);
  }
  return std::exp(log_sum / static_cast<double>(n));
}

}  // namespace

double s_transform_cc_star(double z) {
  check_pole(z);
  return 1.0 / (1.0 + z);
}

double s_k(double z, int k) {
  check_pole(z);
  if (k < 1) throw DomainError("k must be a positive integer");
  return std::pow(1.0 + z, -k);
}

double s_k_inverse(double t, int k) {
  if (!(t > 0.0)) throw DomainError("S^{<-1>} is defined for t > 0 only");
  if (k < 1) throw DomainError("k must be a positive integer");
  return std::pow(t, -1.0 / k) - 1.0;
}

// ---------------------------------------------------------- STransformInverse

double STransformInverse::inner_radius() const {
  return phi_inverse ? 1.0 / std::sqrt(*phi_inverse) : 0.0;
}

double STransformInverse::outer_radius() const { return std::sqrt(phi_xx); }

STransformInverse STransformInverse::product_of_circular(int k) {
  if (k < 1) throw DomainError("k must be a positive integer");
  return {[k](double t) { return s_k_inverse(t, k); }, 1.0, std::nullopt};
}

STransformInverse STransformInverse::from_s_transform(std::function<double(double)> s, double lo,
                                                      double hi, double phi_xx,
                                                      std::optional<double> phi_inverse) {
  if (!(lo < hi)) throw DomainError("bisection bracket needs lo < hi");
  if (!(phi_xx > 0.0)) throw DomainError("phi(xx*) must be positive");
  if (phi_inverse && !(*phi_inverse > 0.0)) throw DomainError("phi((xx*)^-1) must be positive");
  const double s_lo = s(lo);
  const double s_hi = s(hi);
  if (!std::isfinite(s_lo) || !std::isfinite(s_hi) || s_lo == s_hi) {
    throw DomainError("S must be finite and non-constant on the bracket");
  }
  const bool increasing = s_hi > s_lo;
  auto inverse = [s = std::move(s), lo, hi, s_lo, s_hi, increasing](double t) {
    // Outside S([lo, hi]) the nearer endpoint is returned.
    if (increasing ? t <= s_lo : t >= s_lo) return lo;
    if (increasing ? t >= s_hi : t <= s_hi) return hi;
    double a = lo;
    double b = hi;
    while (b - a > 1e-12) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if ((s(mid) < t) == increasing) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return 0.5 * (a + b);
  };
  return {std::move(inverse), phi_xx, phi_inverse};
}

// ----------------------------------------------------------------- RadialCDF

RadialCDF::RadialCDF(std::function<double(double)> evaluator, std::string descriptor,
                     double outer_radius, std::vector<double> jumps)
    : evaluator_(std::move(evaluator)),
      descriptor_(std::move(descriptor)),
      outer_radius_(outer_radius),
      jumps_(std::move(jumps)) {}

double brown_radial_cdf_product(int k, double t) {
  if (k < 2) {
    throw DomainError("the product formula needs k >= 2; it does not hold for k = 1");
  }
  if (t < 0.0) throw DomainError("radius must be nonnegative");
  if (t >= 1.0) return 1.0;
  return std::pow(t, 2.0 / k);
}

double brown_radial_cdf_rdiagonal(const STransformInverse& sinv, double t) {
  if (t < 0.0) throw DomainError("radius must be nonnegative");
  if (t <= sinv.inner_radius()) return 0.0;
  if (t >= sinv.outer_radius()) return 1.0;
  return 1.0 + sinv.inverse(1.0 / (t * t));
}

RadialCDF product_radial_cdf(int k) {
  if (k < 2) {
    throw DomainError("the product formula needs k >= 2; it does not hold for k = 1");
  }
  return RadialCDF([k](double t) { return brown_radial_cdf_product(k, t); },
                   fmt::format("product of {} circular elements", k), 1.0);
}

RadialCDF rdiagonal_radial_cdf(STransformInverse sinv) {
  const double outer = sinv.outer_radius();
  double previous = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double t = 1.2 * outer * i / 200.0;
    const double f = brown_radial_cdf_rdiagonal(sinv, t);
    if (!(f >= -1e-12 && f <= 1.0 + 1e-12)) {
      throw ConsistencyError(fmt::format("radial CDF value {} at t = {} is not a probability", f, t));
    }
    if (f < previous - 1e-12) {
      throw ConsistencyError(fmt::format("radial CDF decreases at t = {} ({} < {})", t, f, previous));
    }
    previous = f;
  }
  std::string descriptor = fmt::format("R-diagonal, phi(xx*)={:.17g}, phi((xx*)^-1)={}",
                                       sinv.phi_xx,
                                       sinv.phi_inverse ? fmt::format("{:.17g}", *sinv.phi_inverse)
                                                        : std::string("inf"));
  return RadialCDF(
      [s = std::move(sinv)](double t) { return brown_radial_cdf_rdiagonal(s, t); },
      std::move(descriptor), outer);
}

RadialCDF empirical_radial_cdf(const SpectralSample& sample) {
  if (sample.eigenvalues.empty()) throw DomainError("empirical CDF of an empty sample");
  auto moduli = sample.sorted_moduli();
  std::vector<double> jumps = moduli;
  jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
  const double outer = moduli.back();
  const double n = static_cast<double>(moduli.size());
  return RadialCDF(
      [m = std::move(moduli), n](double t) {
        return static_cast<double>(std::upper_bound(m.begin(), m.end(), t) - m.begin()) / n;
      },
      "empirical (" + std::to_string(sample.size()) + " eigenvalues)", outer, std::move(jumps));
}

double sup_distance(const RadialCDF& empirical, const RadialCDF& model) {
  double worst = 0.0;
  if (empirical.jumps().empty()) {
    for (double t : default_radial_grid(model, 2001)) {
      worst = std::max(worst, std::abs(empirical(t) - model(t)));
    }
    return worst;
  }
  double left = empirical(std::nextafter(empirical.jumps().front(), -1.0));
  for (double x : empirical.jumps()) {
    const double g = model(x);
    const double right = empirical(x);
    worst = std::max({worst, std::abs(right - g), std::abs(left - g)});
    left = right;
  }
  return worst;
}

double fk_determinant(const Matrix& a) { return fk_from_lu(a); }
double fk_determinant(const ComplexMatrix& a) { return fk_from_lu(a); }

std::vector<double> default_radial_grid(const RadialCDF& cdf, int points) {
  if (points < 2) throw DomainError("a grid needs at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double top = 1.2 * cdf.outer_radius();
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = top * i / (points - 1);
  return grid;
}

void write_radial_csv(std::ostream& out, const RadialCDF& cdf, const std::vector<double>& grid,
                      const RadialCDF* overlay) {
  out << (overlay ? "t,F(t),empirical,distance\n" : "t,F(t)\n");
  for (double t : grid) {
    const double f = cdf(t);
    if (overlay) {
      const double e = (*overlay)(t);
      fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g}\n", t, f, e, std::abs(e - f));
    } else {
      fmt::print(out, "{:.17g},{:.17g}\n", t, f);
    }
  }
}

}  // namespace freelab
