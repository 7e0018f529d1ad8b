#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "freelab/brown.hpp"
#include "freelab/errors.hpp"
#include "freelab/matrixlab.hpp"

using namespace freelab;
using doctest::Approx;

namespace {

// x x^* free Poisson with rate 2: S(z) = 1 / (z + 2), phi(xx^*) = 2,
// phi((xx^*)^{-1}) = 1. The radial CDF is t^2 - 1 on [1, sqrt 2].
STransformInverse free_poisson_two() {
  return STransformInverse::from_s_transform([](double z) { return 1.0 / (z + 2.0); }, -1.0, 0.0, 2.0,
                                             1.0);
}

}  // namespace

TEST_CASE("S-transforms") {
  CHECK(s_transform_cc_star(0.0) == 1.0);
  CHECK(s_transform_cc_star(1.0) == 0.5);
  CHECK(s_k(1.0, 3) == Approx(0.125));
  CHECK(s_k(0.0, 5) == 1.0);
  CHECK_THROWS_AS(s_transform_cc_star(-1.0), DomainError);
  CHECK_THROWS_AS(s_k(-1.0, 2), DomainError);
  CHECK_THROWS_AS(s_k(0.5, 0), DomainError);
}

TEST_CASE("S_k inverse") {
  CHECK(s_k_inverse(4.0, 1) == Approx(-0.75));
  CHECK(s_k_inverse(8.0, 3) == Approx(-0.5));
  CHECK(s_k_inverse(1.0, 4) == 0.0);
  CHECK(s_k_inverse(0.25, 2) == Approx(1.0));
  CHECK_THROWS_AS(s_k_inverse(0.0, 2), DomainError);
  CHECK_THROWS_AS(s_k_inverse(-1.0, 2), DomainError);
  for (int k = 1; k <= 6; ++k) {
    for (double t : {1e-3, 0.1, 0.9, 1.0, 3.0, 1e3}) {
      CHECK(s_k(s_k_inverse(t, k), k) == Approx(t).epsilon(1e-12));
    }
    for (double z : {-0.9, -0.5, 0.0, 2.0, 50.0}) {
      CHECK(s_k_inverse(s_k(z, k), k) == Approx(z).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("product radial CDF") {
  CHECK(brown_radial_cdf_product(2, 0.25) == Approx(0.25));
  CHECK(brown_radial_cdf_product(3, 0.125) == Approx(0.25));
  CHECK(brown_radial_cdf_product(4, 0.0) == 0.0);
  CHECK(brown_radial_cdf_product(2, 1.0) == 1.0);
  CHECK(brown_radial_cdf_product(5, 7.0) == 1.0);
  CHECK_THROWS_AS(brown_radial_cdf_product(1, 0.5), DomainError);
  CHECK_THROWS_AS(brown_radial_cdf_product(2, -0.1), DomainError);
  CHECK_THROWS_AS(product_radial_cdf(1), DomainError);
  const auto f = product_radial_cdf(3);
  CHECK(f.outer_radius() == 1.0);
  CHECK(f(0.5) == Approx(std::pow(0.5, 2.0 / 3.0)));
}

TEST_CASE("R-diagonal formula reproduces the product formula") {
  for (int k = 2; k <= 6; ++k) {
    const auto sinv = STransformInverse::product_of_circular(k);
    CHECK(sinv.inner_radius() == 0.0);
    CHECK(sinv.outer_radius() == 1.0);
    for (int i = 0; i <= 100; ++i) {
      const double t = 1.1 * i / 100.0;
      CHECK(std::abs(brown_radial_cdf_rdiagonal(sinv, t) - brown_radial_cdf_product(k, t)) <= 1e-12);
    }
  }
}

TEST_CASE("R-diagonal CDF with a hole") {
  const auto sinv = free_poisson_two();
  CHECK(sinv.inner_radius() == 1.0);
  CHECK(sinv.outer_radius() == Approx(std::sqrt(2.0)));
  const auto f = rdiagonal_radial_cdf(sinv);
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == 0.0);
  CHECK(f(1.2) == Approx(1.2 * 1.2 - 1.0).epsilon(1e-10));
  CHECK(f(1.5) == 1.0);
  CHECK(f.descriptor().find("phi((xx*)^-1)=1") != std::string::npos);
}

TEST_CASE("inconsistent S-transform data") {
  STransformInverse bad{[](double t) { return t - 1.0; }, 4.0, std::nullopt};
  CHECK_THROWS_AS(rdiagonal_radial_cdf(bad), ConsistencyError);
  CHECK_THROWS_AS(STransformInverse::from_s_transform([](double) { return 1.0; }, 0.0, 1.0, 1.0, std::nullopt),
                  DomainError);
  CHECK_THROWS_AS(STransformInverse::from_s_transform([](double z) { return z; }, 1.0, 0.0, 1.0, std::nullopt),
                  DomainError);
  CHECK_THROWS_AS(STransformInverse::from_s_transform([](double z) { return z; }, 0.0, 1.0, -1.0, std::nullopt),
                  DomainError);
}

TEST_CASE("bisection inverse") {
  for (int k = 2; k <= 4; ++k) {
    const auto numeric = STransformInverse::from_s_transform([k](double z) { return s_k(z, k); }, -0.999999, 1e3,
                                                             1.0, std::nullopt);
    for (double t : {0.01, 0.3, 0.8, 1.0, 2.5}) {
      CHECK(numeric.inverse(t) == Approx(s_k_inverse(t, k)).epsilon(1e-9).scale(1.0));
    }
  }
  const auto increasing = STransformInverse::from_s_transform([](double z) { return std::exp(z); }, -2.0, 2.0, 1.0,
                                                              std::nullopt);
  CHECK(increasing.inverse(1.0) == Approx(0.0).scale(1.0).epsilon(1e-11));
  CHECK(increasing.inverse(1e-9) == -2.0);
  CHECK(increasing.inverse(1e9) == 2.0);
}

TEST_CASE("empirical radial CDF and sup distance") {
  SpectralSample s;
  s.eigenvalues = {{1.0, 0.0}, {-2.0, 0.0}, {0.0, 0.5}, {1.0, 0.0}};
  const auto e = empirical_radial_cdf(s);
  CHECK(e(0.4) == 0.0);
  CHECK(e(0.5) == 0.25);
  CHECK(e(1.0) == 0.75);
  CHECK(e(2.0) == 1.0);
  CHECK(e.jumps() == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(e.outer_radius() == 2.0);
  // The worst gap against min(t, 1) is the left limit at t = 1.
  CHECK(sup_distance(e, product_radial_cdf(2)) == Approx(0.75));
  CHECK_THROWS_AS(empirical_radial_cdf(SpectralSample{}), DomainError);

  // All mass at the origin against a continuous model.
  SpectralSample one;
  one.eigenvalues = {{0.0, 0.0}};
  CHECK(sup_distance(empirical_radial_cdf(one), product_radial_cdf(2)) == 1.0);
}

TEST_CASE("sup distance matches a dense grid search") {
  const auto specs = std::vector{EnsembleSpec::square_elliptic(120, 0.3, 4), EnsembleSpec::square_elliptic(120, 0.6, 4)};
  const auto e = empirical_radial_cdf(product_spectrum(specs));
  const auto f = product_radial_cdf(2);
  double grid = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double t = 2.0 * i / 200000.0;
    grid = std::max(grid, std::abs(e(t) - f(t)));
  }
  const double exact = sup_distance(e, f);
  CHECK(exact >= grid);
  CHECK(exact - grid <= 1e-3);
}

TEST_CASE("Fuglede-Kadison determinant") {
  CHECK(fk_determinant(Matrix(Matrix::Identity(5, 5))) == Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 4.0;
  CHECK(fk_determinant(d) == Approx(2.0));
  Matrix singular(3, 3);
  singular << 1, 2, 3, 0, 0, 0, 4, 5, 6;
  CHECK(fk_determinant(singular) == 0.0);
  CHECK_THROWS_AS(fk_determinant(Matrix(Matrix::Zero(2, 3))), DomainError);

  const Matrix a = sample(EnsembleSpec::square_elliptic(30, 0.2, 1));
  const Matrix b = sample(EnsembleSpec::square_elliptic(30, 0.7, 2));
  CHECK(fk_determinant(Matrix(a * b)) == Approx(fk_determinant(a) * fk_determinant(b)).epsilon(1e-9));

  // |det| = 3^600 overflows a double; the root does not.
  CHECK(fk_determinant(Matrix(3.0 * Matrix::Identity(600, 600))) == Approx(3.0));

  ComplexMatrix c = ComplexMatrix::Zero(2, 2);
  c(0, 0) = {0.0, 2.0};
  c(1, 1) = {3.0, 4.0};
  CHECK(fk_determinant(c) == Approx(std::sqrt(10.0)));

  // A circular element has determinant exp(-1/2).
  const Matrix g = sample(EnsembleSpec::square_elliptic(400, 0.0, 3)) / 20.0;
  CHECK(fk_determinant(g) == Approx(std::exp(-0.5)).epsilon(0.05));
}

TEST_CASE("radial CSV export") {
  const auto f = product_radial_cdf(2);
  const auto grid = default_radial_grid(f, 5);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == Approx(1.2));
  CHECK_THROWS_AS(default_radial_grid(f, 1), DomainError);

  std::ostringstream plain;
  write_radial_csv(plain, f, {0.25, 1.0});
  CHECK(plain.str() == "t,F(t)\n0.25,0.25\n1,1\n");

  SpectralSample s;
  s.eigenvalues = {{0.5, 0.0}, {0.0, 2.0}};
  const auto e = empirical_radial_cdf(s);
  std::ostringstream overlay;
  write_radial_csv(overlay, f, {0.25, 0.5}, &e);
  CHECK(overlay.str() == "t,F(t),empirical,distance\n0.25,0.25,0,0.25\n0.5,0.5,0.5,0\n");
}
