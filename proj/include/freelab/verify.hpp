#pragma once

// Independent reference computations and the acceptance suite.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "freelab/freemoments.hpp"

namespace freelab::verify {

// ---------------------------------------------------------------- oracles
// These avoid the library's enumeration and cycle code on purpose.

/// Every set partition of {1..n} as a restricted growth string
/// (block index of each element, 0-based, first occurrences increasing).
void for_each_set_partition(int n, const std::function<void(const std::vector<int>&)>& visit);

/// True if some a < b < c < d has a, c in one block and b, d in another.
bool has_crossing(const std::vector<int>& block_of);

/// Perfect matchings as 1-based mate vectors, found by filtering all set
/// partitions for blocks of size two.
std::vector<std::vector<int>> brute_force_matchings(int two_k);

/// Number of set partitions of {1..n} without crossings.
long long brute_force_nc_count(int n);

/// Sum over non-crossing matchings of rho^T, computed from mate vectors.
double brute_force_elliptic_moment(double rho, const StarWord& w);

/// Sum over non-crossing label-constant partitions of prod y^{|V|-1}.
double brute_force_mp_moment(double y, const std::vector<int>& labels);

/// k-th moment of the Marchenko-Pastur law obtained by integrating its
/// density (plus the atom at 0 when y > 1).
double mp_moment_by_integration(double y, int k, int intervals = 4000);

/// Limit moment of the generalised elliptic ensemble with profile f,
/// integrating each non-crossing matching's expectation on a midpoint
/// tensor grid with `points` nodes per free index.
double grid_generalized_limit(const std::function<double(double)>& f, const StarWord& w,
                              int points);

// --------------------------------------------------------- acceptance suite

enum class Tier { quick, full };

struct Options {
  Tier tier = Tier::full;
  std::uint64_t seed = 0;
  /// Added to every Monte Carlo estimate; nonzero only for negative controls.
  double inject_bias = 0.0;
  int threads = 0;
};

struct Tolerances {
  double z_bound = 3.0;
  double agreement_fraction = 0.95;
  double cdf_distance = 0.08;
  double exact = 1e-12;
  double inversion = 1e-10;
  double mp_integration = 1e-6;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  nlohmann::ordered_json observed;
  double seconds = 0.0;
};

inline constexpr int criterion_count = 12;

CriterionResult run_criterion(int id, const Options& options, const Tolerances& tol = {});

/// Runs the selected criteria (all when `ids` is empty), calling
/// `on_result` after each one.
std::vector<CriterionResult> run_acceptance(
    const Options& options, const std::vector<int>& ids = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

/// One line per criterion: "[PASS] C4 name: detail".
std::string format_line(const CriterionResult& r);

/// Deterministic summary (no timings).
nlohmann::ordered_json summary_json(const std::vector<CriterionResult>& results,
                                    const Options& options, const Tolerances& tol = {});

}  // namespace freelab::verify
