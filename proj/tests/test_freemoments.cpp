#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "freelab/errors.hpp"
#include "freelab/freemoments.hpp"
#include "freelab/verify.hpp"

using namespace freelab;
using doctest::Approx;

namespace {

const std::vector<double> rho_grid{-1.0, -0.6, 0.0, 0.3, 0.5, 0.9, 1.0};

PairPartition pp(std::initializer_list<std::pair<int, int>> pairs) {
  return PairPartition::from_pairs(pairs);
}

}  // namespace

TEST_CASE("word syntax") {
  const auto w = StarWord::parse(" 1, *,1@2 ,*@2");
  REQUIRE(w.size() == 4);
  CHECK(w[0] == Letter{Exponent::plain, 1});
  CHECK(w[1] == Letter{Exponent::star, 1});
  CHECK(w[2] == Letter{Exponent::plain, 2});
  CHECK(w[3] == Letter{Exponent::star, 2});
  CHECK(w.to_string() == "1,*,1@2,*@2");
  CHECK(w.max_label() == 2);
  CHECK(StarWord::parse(w.to_string()) == w);

  auto position = [](const char* text) {
    try {
      StarWord::parse(text);
    } catch (const ParseError& e) {
      return static_cast<long>(e.position());
    }
    return -1L;
  };
  CHECK(position("1,x") == 2);
  CHECK(position("") == 0);
  CHECK(position("1,") == 2);
  CHECK(position("1@") == 2);
  CHECK(position("1@0") == 2);
  CHECK(position("1 1") == 2);
}

TEST_CASE("all words") {
  const auto words = all_words(2);
  REQUIRE(words.size() == 4);
  CHECK(words[0].to_string() == "1,1");
  CHECK(words[1].to_string() == "1,*");
  CHECK(words[3].to_string() == "*,*");
  CHECK(all_words(6).size() == 64);
}

TEST_CASE("T statistic") {
  CHECK(t_statistic(pp({{1, 2}}), StarWord::parse("1,*")) == 0);
  CHECK(t_statistic(pp({{1, 2}, {3, 4}}), StarWord::parse("1,1,*,*")) == 2);
  CHECK(t_statistic(pp({{1, 4}, {2, 3}}), StarWord::parse("1,*,1,*")) == 0);
  CHECK_THROWS_AS(t_statistic(pp({{1, 2}}), StarWord::parse("1,*,1,*")), DomainError);
}

TEST_CASE("elliptic moments: examples") {
  CHECK(elliptic_star_moment(0.7, StarWord::parse("1,*")) == 1.0);
  for (double rho : rho_grid) CHECK(elliptic_star_moment(rho, StarWord::parse("1,1")) == Approx(rho));
  CHECK(elliptic_star_moment(0.0, StarWord::parse("1,*,1,*")) == 2.0);
  CHECK(elliptic_star_moment(0.5, StarWord::parse("1,*,1,*")) == 2.0);
  CHECK(elliptic_star_moment(0.3, StarWord::parse("1,1,1")) == 0.0);
  CHECK_THROWS_AS(elliptic_star_moment(1.5, StarWord::parse("1,1")), DomainError);
}

TEST_CASE("elliptic moments agree with the brute-force oracle") {
  for (int len = 1; len <= 8; ++len) {
    for (const auto& w : all_words(len)) {
      for (double rho : rho_grid) {
        CHECK(elliptic_star_moment(rho, w) == Approx(verify::brute_force_elliptic_moment(rho, w)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("elliptic moments: parity, alternating words and the semicircle") {
  for (int len = 1; len <= 10; ++len) {
    std::vector<Letter> alt;
    for (int i = 0; i < len; ++i) alt.push_back({i % 2 == 0 ? Exponent::plain : Exponent::star, 1});
    for (double rho : rho_grid) {
      if (len % 2 == 1) {
        for (const auto& w : all_words(len)) CHECK(elliptic_star_moment(rho, w) == 0.0);
      } else {
        CHECK(elliptic_star_moment(rho, StarWord(alt)) == Approx(static_cast<double>(catalan(len / 2))));
      }
    }
    if (len % 2 == 0 && len <= 8) {
      for (const auto& w : all_words(len)) {
        CHECK(elliptic_star_moment(1.0, w) == Approx(static_cast<double>(catalan(len / 2))));
      }
    }
  }
}

TEST_CASE("crossing pairings vanish in the large-n limit") {
  // Summing over all pairings with weight n^{|gamma pi| - (k+1)} tends to the
  // non-crossing sum.
  const double n = 1e7;
  for (int len = 2; len <= 8; len += 2) {
    for (const auto& w : all_words(len)) {
      for (double rho : {0.0, 0.5, 1.0}) {
        double all = 0.0;
        for (const auto& p : enumerate_pair_partitions(len)) {
          all += std::pow(rho, t_statistic(p, w)) * std::pow(n, gamma_pi(p).cycle_count() - (len / 2 + 1));
        }
        CHECK(all == Approx(elliptic_star_moment(rho, w)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("mixed elliptic moments") {
  const EllipticParams one({0.4});
  for (int len = 1; len <= 6; ++len) {
    for (const auto& w : all_words(len)) CHECK(mixed_elliptic_moment(one, w) == Approx(elliptic_star_moment(0.4, w)));
  }
  const EllipticParams two({0.7, 0.3});
  CHECK(mixed_elliptic_moment(two, StarWord::parse("1,1@2")) == 0.0);
  CHECK(mixed_elliptic_moment(two, StarWord::parse("1,1@2,*@2,*")) == 1.0);
  CHECK(mixed_elliptic_moment(two, StarWord::parse("1,1,1@2,1@2")) == Approx(0.7 * 0.3));
  CHECK(mixed_elliptic_moment(two, StarWord::parse("1,1@2,1,1@2")) == 0.0);
  CHECK(mixed_elliptic_moment(two, StarWord::parse("1@2,1@2")) == Approx(0.3));
  CHECK_THROWS_AS(mixed_elliptic_moment(two, StarWord::parse("1,1@3")), DomainError);
  CHECK(mixed_elliptic_moment(two, StarWord::parse("1,1@2,1")) == 0.0);
  CHECK_THROWS_AS(EllipticParams({1.2}), DomainError);
}

TEST_CASE("moments with deterministic factors") {
  // Commuting scalars stand in for the deterministic family: phi(d_a d_b ...) = x_a x_b ...
  const std::vector<double> x{1.0, 2.0, 3.0};
  const TraceOracle scalars = [&](const ProductSpec& spec) {
    std::complex<double> v = 1.0;
    for (const auto& f : spec) v *= x[static_cast<std::size_t>(f.label - 1)];
    return v;
  };
  SUBCASE("identity blocks reduce to the plain moment") {
    for (int len = 2; len <= 6; len += 2) {
      for (const auto& w : all_words(len)) {
        std::vector<ProductSpec> blocks(w.size());
        CHECK(elliptic_moment_with_deterministic(0.6, w, blocks, scalars).real() ==
              Approx(elliptic_star_moment(0.6, w)));
      }
    }
  }
  SUBCASE("one pair with d then identity gives phi(d)") {
    const std::vector<ProductSpec> blocks{{{2, Exponent::plain}}, {}};
    CHECK(elliptic_moment_with_deterministic(0.6, StarWord::parse("1,*"), blocks, scalars).real() == Approx(2.0));
  }
  SUBCASE("factors are grouped by the cycles of pi gamma") {
    std::set<std::vector<int>> requested;
    const TraceOracle recorder = [&](const ProductSpec& spec) {
      std::vector<int> labels;
      for (const auto& f : spec) labels.push_back(f.label);
      requested.insert(labels);
      return std::complex<double>(1.0);
    };
    std::vector<ProductSpec> blocks;
    for (int l = 1; l <= 6; ++l) blocks.push_back({{l, Exponent::plain}});
    elliptic_moment_with_deterministic(0.5, StarWord::parse("1,*,1,*,1,*"), blocks, recorder);
    CHECK(requested.count({1, 3, 5}) == 1);
    CHECK(requested.count({2}) == 1);
    CHECK(requested.count({4}) == 1);
    CHECK(requested.count({6}) == 1);
  }
  SUBCASE("length mismatch") {
    std::vector<ProductSpec> blocks(3);
    CHECK_THROWS_AS(elliptic_moment_with_deterministic(0.5, StarWord::parse("1,*"), blocks, scalars), DomainError);
  }
}

TEST_CASE("product specifications") {
  const auto blocks = parse_product_specs("D,I,DE*,", "DE");
  REQUIRE(blocks.size() == 4);
  CHECK(blocks[0] == ProductSpec{{1, Exponent::plain}});
  CHECK(blocks[1].empty());
  CHECK(blocks[2] == ProductSpec{{1, Exponent::plain}, {2, Exponent::star}});
  CHECK(blocks[3].empty());
  CHECK_THROWS_AS(parse_product_specs("D,X", "DE"), ParseError);
}

TEST_CASE("rho profiles") {
  const auto f = RhoProfile::tabulated({{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.5}});
  CHECK(f(0.25) == Approx(0.5));
  CHECK(f(0.75) == Approx(0.75));
  CHECK(f(1.0) == Approx(0.5));
  CHECK_THROWS_AS(RhoProfile::tabulated({{0.1, 0.0}, {1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(RhoProfile::tabulated({{0.0, 0.0}, {0.9, 1.0}}), DomainError);
  CHECK_THROWS_AS(RhoProfile::tabulated({{0.0, 0.0}, {0.5, 0.2}, {0.5, 0.3}, {1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(RhoProfile::tabulated({{0.0, 0.0}, {1.0, 1.5}}), DomainError);
  CHECK_THROWS_AS(RhoProfile::tabulated({{0.0, -0.1}, {1.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(RhoProfile::constant(-1.5), DomainError);
  std::istringstream csv("x,f\n0,0\n0.5,0.25\n1,1\n");
  const auto g = RhoProfile::from_csv(csv);
  CHECK(g.points().size() == 3);
  CHECK(g(0.75) == Approx(0.625));
}

TEST_CASE("generalised elliptic limit") {
  SUBCASE("constant profile is exact") {
    for (const auto& w : all_words(4)) {
      const auto v = generalized_elliptic_limit(RhoProfile::constant(0.35), w, 1000, 1);
      CHECK(v.value == elliptic_star_moment(0.35, w));
      CHECK(v.std_error == 0.0);
    }
  }
  SUBCASE("f = 1 gives Catalan numbers") {
    const auto one = RhoProfile::tabulated({{0.0, 1.0}, {1.0, 1.0}});
    for (int len = 2; len <= 6; len += 2) {
      for (const auto& w : all_words(len)) {
        CHECK(generalized_elliptic_limit(one, w, 200, 3).value == Approx(static_cast<double>(catalan(len / 2))));
      }
    }
  }
  SUBCASE("f(x) = x against tensor-grid quadrature") {
    const auto id = RhoProfile::tabulated({{0.0, 0.0}, {1.0, 1.0}});
    for (const char* text : {"1,1,*,*", "1,1,1,1", "1,*,*,1", "1,*,1,*"}) {
      const auto w = StarWord::parse(text);
      const auto mc = generalized_elliptic_limit(id, w, 100000, 11);
      const double grid = verify::grid_generalized_limit([](double x) { return x; }, w, 200);
      CHECK(std::abs(mc.value - grid) <= 3.0 * mc.std_error + 1e-12);
    }
    // E|U1 - U2| = 1/3 and E[|U1 - U2||U1 - U3|] = 7/60 give 1 + 7/60.
    CHECK(verify::grid_generalized_limit([](double x) { return x; }, StarWord::parse("1,1,*,*"), 200) ==
          Approx(1.0 + 7.0 / 60.0).epsilon(1e-4));
  }
  SUBCASE("odd words and seeds") {
    const auto id = RhoProfile::tabulated({{0.0, 0.0}, {1.0, 1.0}});
    CHECK(generalized_elliptic_limit(id, StarWord::parse("1,1,*"), 100, 0).value == 0.0);
    const auto a = generalized_elliptic_limit(id, StarWord::parse("1,1"), 5000, 9);
    const auto b = generalized_elliptic_limit(id, StarWord::parse("1,1"), 5000, 9);
    CHECK(a.value == b.value);
    CHECK(a.value == Approx(1.0 / 3.0).epsilon(0.05));
    CHECK_THROWS_AS(generalized_elliptic_limit(id, StarWord::parse("1,1@2"), 100, 0), DomainError);
  }
}

TEST_CASE("Marchenko-Pastur moments") {
  for (double y : {0.25, 0.5, 1.0, 2.0, 3.5}) {
    CHECK(mp_moment(y, 1) == Approx(1.0));
    CHECK(mp_moment(y, 2) == Approx(1.0 + y));
    CHECK(verify::mp_moment_by_integration(y, 0) == Approx(1.0));
    for (int k = 1; k <= 8; ++k) {
      CHECK(mp_moment(y, k) == Approx(verify::mp_moment_by_integration(y, k)).epsilon(1e-10));
    }
  }
  CHECK(mp_moment(1.0, 3) == Approx(5.0));
  CHECK(mp_moment(1.0, 6) == Approx(132.0));
  CHECK_THROWS_AS(mp_moment(0.0, 2), DomainError);
  CHECK_THROWS_AS(mp_moment(1.0, 15), EnumerationLimitError);
}

TEST_CASE("mixed Marchenko-Pastur moments") {
  const std::vector<int> same{1, 1, 1, 1};
  CHECK(mixed_mp_moment(0.7, same) == Approx(mp_moment(0.7, 4)));
  const std::vector<int> two{1, 2};
  CHECK(mixed_mp_moment(0.7, two) == Approx(1.0));
  for (const auto& labels : std::vector<std::vector<int>>{{1, 2, 1, 2}, {1, 1, 2, 2}, {1, 2, 2, 1, 3}, {2, 1, 1, 2, 1, 2}}) {
    for (double y : {0.5, 1.0, 2.0}) {
      CHECK(mixed_mp_moment(y, labels) == Approx(verify::brute_force_mp_moment(y, labels)));
    }
  }
}

TEST_CASE("elliptic and circular product moments coincide") {
  const std::vector<double> r1{0.8};
  const auto [a, b] = elliptic_vs_circular_product_moment(r1, 1);
  CHECK(a == 1.0);
  CHECK(b == 1.0);
  CHECK(product_word(2, 1).to_string() == "1,1@2,*@2,*");
  const std::vector<double> grid{0.0, 0.3, 0.7, 1.0, -0.5};
  for (int k = 1; k <= 3; ++k) {
    for (int code = 0; code < static_cast<int>(std::pow(5, k)); ++code) {
      std::vector<double> rhos;
      for (int f = 0, c = code; f < k; ++f, c /= 5) rhos.push_back(grid[static_cast<std::size_t>(c % 5)]);
      for (int n = 1; n <= 2; ++n) {
        const auto [with_rho, circular] = elliptic_vs_circular_product_moment(rhos, n);
        CHECK(std::abs(with_rho - circular) <= 1e-12);
      }
    }
  }
  const std::vector<double> r2{0.9, 0.4};
  const auto [c, d] = elliptic_vs_circular_product_moment(r2, 2);
  CHECK(c == Approx(d));
  CHECK(d == Approx(mixed_elliptic_moment(EllipticParams({0.0, 0.0}), product_word(2, 2))));
}
