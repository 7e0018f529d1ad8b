#pragma once

// Exact limiting *-moments of elliptic elements, free families of them, and
// of free Poisson (Marchenko-Pastur) elements, evaluated as sums over
// non-crossing partitions.

#include <complex>
#include <cstdint>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "freelab/partitions.hpp"

namespace freelab {

enum class Exponent { plain, star };

struct Letter {
  Exponent exponent = Exponent::plain;
  int label = 1;  // which matrix / free element, 1-based

  friend bool operator==(const Letter&, const Letter&) = default;
};

/// A word e_{t1}^{x1} ... e_{tp}^{xp} over {plain, star}, each letter tagged
/// with a label. Textual form: comma separated letters `1` or `*`, each with
/// an optional `@label` suffix, e.g. "1,*,1@2,*@2".
class StarWord {
 public:
  explicit StarWord(std::vector<Letter> letters);

  /// Throws ParseError carrying the offending character offset.
  static StarWord parse(std::string_view text);
  /// Single-label word from exponents.
  static StarWord of(std::initializer_list<Exponent> exps);

  std::size_t size() const noexcept { return letters_.size(); }
  const Letter& operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<Letter>& letters() const noexcept { return letters_; }
  int max_label() const;
  std::vector<int> labels() const;

  std::string to_string() const;

  friend bool operator==(const StarWord&, const StarWord&) = default;

 private:
  std::vector<Letter> letters_;
};

/// Every single-label word of the given length, in lexicographic order with
/// plain before star.
std::vector<StarWord> all_words(int length);

/// Per-label correlation parameters, rho(label) in [-1, 1].
class EllipticParams {
 public:
  explicit EllipticParams(std::vector<double> rho_by_label);

  int label_count() const noexcept { return static_cast<int>(rho_.size()); }
  double rho(int label) const;
  const std::vector<double>& values() const noexcept { return rho_; }

 private:
  std::vector<double> rho_;
};

/// Correlation profile f on [0, 1]: either a constant, or a table of
/// (x, f(x)) points evaluated by linear interpolation.
class RhoProfile {
 public:
  /// |rho| <= 1.
  static RhoProfile constant(double rho);
  /// Grid strictly increasing with endpoints 0 and 1; values in [0, 1].
  static RhoProfile tabulated(std::vector<std::pair<double, double>> points);
  /// Two-column CSV `x,f` (an optional non-numeric header line is skipped).
  static RhoProfile from_csv(std::istream& in);

  bool is_constant() const noexcept { return points_.empty(); }
  double constant_value() const noexcept { return constant_; }
  const std::vector<std::pair<double, double>>& points() const noexcept { return points_; }

  double operator()(double x) const;

 private:
  RhoProfile() = default;
  double constant_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

/// One factor of a deterministic product d_{label} or d_{label}^*.
struct Factor {
  int label = 1;
  Exponent exponent = Exponent::plain;

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// An ordered product of deterministic factors; empty means the identity.
using ProductSpec = std::vector<Factor>;

/// Evaluates the trace state phi on a product of deterministic elements.
using TraceOracle = std::function<std::complex<double>(const ProductSpec&)>;

/// Parses "D,I,DE*,..." style block lists: each comma separated entry is a
/// product of single-character factor names, each optionally followed by
/// `*`; `I` (or an empty entry) is the identity. `names` maps characters to
/// labels by position (names[0] -> label 1).
std::vector<ProductSpec> parse_product_specs(std::string_view text, std::string_view names);

struct MonteCarloValue {
  double value = 0.0;
  double std_error = 0.0;
};

/// Number of pairs of `p` whose letters carry equal exponents.
int t_statistic(const PairPartition& p, const StarWord& w);

/// phi(e^{x1} ... e^{xp}) for an elliptic element with parameter rho.
double elliptic_star_moment(double rho, const StarWord& w);

/// Mixed moment of free elliptic elements e_1, ..., e_m; letter labels pick
/// the element.
double mixed_elliptic_moment(const EllipticParams& params, const StarWord& w);

/// phi(e^{x1} d^(1) ... e^{x2k} d^(2k)) for an elliptic e free from the
/// deterministic family queried through `oracle`. `blocks[l]` specifies the
/// product d^(l+1).
std::complex<double> elliptic_moment_with_deterministic(double rho, const StarWord& w,
                                                        std::span<const ProductSpec> blocks,
                                                        const TraceOracle& oracle);

/// Limit *-moment of a generalised elliptic matrix whose pair correlations
/// follow `profile`. Each non-crossing pairing contributes an expectation
/// over i.i.d. uniforms (one per cycle of gamma*pi) estimated with
/// `mc_samples` draws. A constant profile is evaluated exactly.
MonteCarloValue generalized_elliptic_limit(const RhoProfile& profile, const StarWord& w,
                                           long mc_samples = 100000, std::uint64_t seed = 0);

/// k-th moment of the Marchenko-Pastur law with ratio y (mean 1).
double mp_moment(double y, int k, const EnumerationLimits& limits = {});

/// phi(x_{t1} ... x_{tk}) for free Marchenko-Pastur elements of ratio y.
double mixed_mp_moment(double y, std::span<const int> labels, const EnumerationLimits& limits = {});

/// The expanded word (e_1 ... e_k e_k^* ... e_1^*)^n with labels 1..k.
StarWord product_word(int k, int n);

/// phi((e_1...e_k e_k^*...e_1^*)^n) for the given parameters and for all
/// parameters zero (the circular case). The two values coincide.
std::pair<double, double> elliptic_vs_circular_product_moment(std::span<const double> rhos, int n);

}  // namespace freelab
