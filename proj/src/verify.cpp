#include "freelab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "freelab/brown.hpp"
#include "freelab/errors.hpp"
#include "freelab/matrixlab.hpp"
#include "freelab/partitions.hpp"
#include "freelab/rng.hpp"

namespace freelab::verify {

using json = nlohmann::ordered_json;

// ================================================================== oracles

namespace {

void grow(std::vector<int>& a, int i, int blocks,
          const std::function<void(const std::vector<int>&)>& visit) {
  if (i == static_cast<int>(a.size())) {
    visit(a);
    return;
  }
  for (int b = 0; b <= blocks; ++b) {
    a[static_cast<std::size_t>(i)] = b;
    grow(a, i + 1, std::max(blocks, b + 1), visit);
  }
}

std::vector<std::vector<int>> nc_matchings(int two_k) {
  std::vector<std::vector<int>> out;
  for (auto& mates : brute_force_matchings(two_k)) {
    std::vector<int> block_of(mates.size());
    int next = 0;
    for (std::size_t i = 0; i < mates.size(); ++i) {
      const auto j = static_cast<std::size_t>(mates[i] - 1);
      if (j > i) block_of[i] = block_of[j] = next++;
    }
    if (!has_crossing(block_of)) out.push_back(std::move(mates));
  }
  return out;
}

}  // namespace

void for_each_set_partition(int n, const std::function<void(const std::vector<int>&)>& visit) {
  if (n < 1) throw DomainError("set partitions need n >= 1");
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  grow(a, 1, 1, visit);
}

bool has_crossing(const std::vector<int>& block_of) {
  const auto n = block_of.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d)
          if (block_of[a] == block_of[c] && block_of[b] == block_of[d] &&
              block_of[a] != block_of[b])
            return true;
  return false;
}

std::vector<std::vector<int>> brute_force_matchings(int two_k) {
  std::vector<std::vector<int>> out;
  for_each_set_partition(two_k, [&](const std::vector<int>& a) {
    std::vector<std::vector<int>> members(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) members[static_cast<std::size_t>(a[i])].push_back(static_cast<int>(i) + 1);
    std::vector<int> mates(a.size());
    for (const auto& m : members) {
      if (m.empty()) break;
      if (m.size() != 2) return;
      mates[static_cast<std::size_t>(m[0] - 1)] = m[1];
      mates[static_cast<std::size_t>(m[1] - 1)] = m[0];
    }
    out.push_back(std::move(mates));
  });
  std::sort(out.begin(), out.end());
  return out;
}

long long brute_force_nc_count(int n) {
  long long count = 0;
  for_each_set_partition(n, [&](const std::vector<int>& a) {
    if (!has_crossing(a)) ++count;
  });
  return count;
}

double brute_force_elliptic_moment(double rho, const StarWord& w) {
  const int p = static_cast<int>(w.size());
  if (p % 2 != 0) return 0.0;
  double sum = 0.0;
  for (const auto& mates : nc_matchings(p)) {
    int t = 0;
    for (int i = 0; i < p; ++i) {
      const int j = mates[static_cast<std::size_t>(i)] - 1;
      if (j > i && w[static_cast<std::size_t>(i)].exponent == w[static_cast<std::size_t>(j)].exponent) ++t;
    }
    sum += std::pow(rho, t);
  }
  return sum;
}

double brute_force_mp_moment(double y, const std::vector<int>& labels) {
  const int k = static_cast<int>(labels.size());
  double sum = 0.0;
  for_each_set_partition(k, [&](const std::vector<int>& a) {
    if (has_crossing(a)) return;
    std::vector<int> size(a.size(), 0);
    std::vector<int> label(a.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto b = static_cast<std::size_t>(a[i]);
      if (size[b] > 0 && label[b] != labels[i]) return;
      label[b] = labels[i];
      ++size[b];
    }
    double term = 1.0;
    for (int s : size)
      if (s > 0) term *= std::pow(y, s - 1);
    sum += term;
  });
  return sum;
}

double mp_moment_by_integration(double y, int k, int intervals) {
  if (!(y > 0.0) || k < 0) throw DomainError("need y > 0 and k >= 0");
  if (intervals < 2 || intervals % 2 != 0) throw DomainError("Simpson's rule needs an even count");
  // x = (1 + y) + 2 sqrt(y) cos(theta) maps [0, pi] onto [a, b] and turns
  // sqrt((b - x)(x - a)) dx into 4 y sin^2(theta) dtheta.
  const double c = 1.0 + y;
  const double r = 2.0 * std::sqrt(y);
  auto integrand = [&](double theta) {
    const double x = c + r * std::cos(theta);
    const double s = std::sin(theta);
    // Only y = 1 reaches x = 0, where sin^2(theta) / x = (1 - cos(theta)) / 2.
    if (k == 0 && x <= 0.0) return r * r * (1.0 - std::cos(theta)) / (4.0 * M_PI * y);
    return std::pow(x, k - 1) * r * r * s * s / (2.0 * M_PI * y);
  };
  const double h = M_PI / intervals;
  double acc = integrand(0.0) + integrand(M_PI);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i * h);
  double moment = acc * h / 3.0;
  if (y > 1.0 && k == 0) moment += 1.0 - 1.0 / y;
  return moment;
}

double grid_generalized_limit(const std::function<double(double)>& f, const StarWord& w,
                              int points) {
  const int p = static_cast<int>(w.size());
  if (p % 2 != 0) return 0.0;
  if (points < 1) throw DomainError("grid needs at least one point");
  std::vector<double> f_of_gap(static_cast<std::size_t>(points));
  for (int d = 0; d < points; ++d) f_of_gap[static_cast<std::size_t>(d)] = f(static_cast<double>(d) / points);

  double total = 0.0;
  for (const auto& mates : nc_matchings(p)) {
    // Indices i_1..i_p; the pair (r, s) forces i_r = i_{s+1} and i_s = i_{r+1}.
    std::vector<int> parent(static_cast<std::size_t>(p));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
      return x;
    };
    auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };
    for (int r = 0; r < p; ++r) {
      const int s = mates[static_cast<std::size_t>(r)] - 1;
      unite(r, (s + 1) % p);
      unite(s, (r + 1) % p);
    }
    std::vector<int> var(static_cast<std::size_t>(p), -1);
    int vars = 0;
    std::vector<int> root_var(static_cast<std::size_t>(p), -1);
    for (int r = 0; r < p; ++r) {
      auto& rv = root_var[static_cast<std::size_t>(find(r))];
      if (rv < 0) rv = vars++;
      var[static_cast<std::size_t>(r)] = rv;
    }
    std::vector<std::pair<int, int>> factors;
    for (int r = 0; r < p; ++r) {
      const int s = mates[static_cast<std::size_t>(r)] - 1;
      if (s > r && w[static_cast<std::size_t>(r)].exponent == w[static_cast<std::size_t>(s)].exponent) {
        factors.emplace_back(var[static_cast<std::size_t>(r)], var[static_cast<std::size_t>(s)]);
      }
    }
    std::vector<int> idx(static_cast<std::size_t>(vars), 0);
    double sum = 0.0;
    double cells = 0.0;
    while (true) {
      double x = 1.0;
      for (auto [a, b] : factors) {
        x *= f_of_gap[static_cast<std::size_t>(std::abs(idx[static_cast<std::size_t>(a)] - idx[static_cast<std::size_t>(b)]))];
      }
      sum += x;
      cells += 1.0;
      int d = 0;
      while (d < vars && ++idx[static_cast<std::size_t>(d)] == points) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == vars) break;
    }
    total += sum / cells;
  }
  return total;
}

// ======================================================== acceptance suite

namespace {

struct Plan {
  int seeds;
  int cdf_seeds;
  long mc_samples;
  int grid_points;
};

Plan plan_for(Tier tier) {
  if (tier == Tier::full) return {20, 10, 100000, 200};
  return {3, 2, 20000, 100};
}

std::uint64_t sub_seed(const Options& o, int criterion, std::uint64_t a, std::uint64_t b = 0) {
  return derive_seed(o.seed, {static_cast<std::uint64_t>(criterion), a, b});
}

// Agreement bookkeeping for repeated Monte Carlo comparisons.
struct Cell {
  std::string name;
  double theory = 0.0;
  int trials = 0;
  int agreed = 0;
  double worst_z = 0.0;
};

class Agreement {
 public:
  explicit Agreement(double z_bound) : z_bound_(z_bound) {}

  void record(std::size_t cell, double theory, double estimate, double std_error,
              const std::string& name) {
    if (cell >= cells_.size()) cells_.resize(cell + 1);
    auto& c = cells_[cell];
    c.name = name;
    c.theory = theory;
    const double diff = std::abs(estimate - theory);
    const double z = std_error > 0.0 ? diff / std_error : (diff == 0.0 ? 0.0 : HUGE_VAL);
    ++c.trials;
    if (diff <= z_bound_ * std_error || diff <= 1e-12) ++c.agreed;
    c.worst_z = std::max(c.worst_z, z);
  }

  int trials() const {
    int t = 0;
    for (const auto& c : cells_) t += c.trials;
    return t;
  }
  int agreed() const {
    int a = 0;
    for (const auto& c : cells_) a += c.agreed;
    return a;
  }
  double fraction() const { return trials() ? static_cast<double>(agreed()) / trials() : 0.0; }

  json to_json(std::size_t worst_count = 8) const {
    std::vector<const Cell*> sorted;
    for (const auto& c : cells_) sorted.push_back(&c);
    std::stable_sort(sorted.begin(), sorted.end(), [](const Cell* a, const Cell* b) {
      return a->agreed * b->trials < b->agreed * a->trials;
    });
    json worst = json::array();
    for (std::size_t i = 0; i < std::min(worst_count, sorted.size()); ++i) {
      const auto* c = sorted[i];
      worst.push_back({{"cell", c->name},
                       {"theory", c->theory},
                       {"agreed", c->agreed},
                       {"trials", c->trials},
                       {"max_abs_z", c->worst_z}});
    }
    return {{"cells", cells_.size()},
            {"trials", trials()},
            {"agreed", agreed()},
            {"fraction", fraction()},
            {"least_agreeing_cells", worst}};
  }

 private:
  double z_bound_;
  std::vector<Cell> cells_;
};

std::string agreement_detail(const Agreement& a, double needed) {
  return fmt::format("{}/{} comparisons within bound ({:.2f}%, need >= {:.0f}%)", a.agreed(),
                     a.trials(), 100.0 * a.fraction(), 100.0 * needed);
}

// ---------------------------------------------------------------- criteria

CriterionResult c1_counts(const Options&, const Tolerances&) {
  CriterionResult r{1, "pair partition counts", true, "", json::array(), 0.0};
  for (int k = 1; k <= 6; ++k) {
    const auto all = enumerate_pair_partitions(2 * k);
    const auto nc = enumerate_nc_pair_partitions(2 * k);
    const auto brute = brute_force_matchings(2 * k);
    const auto brute_nc = nc_matchings(2 * k);
    const bool ok = static_cast<long long>(all.size()) == double_factorial_odd(2 * k) &&
                    static_cast<long long>(nc.size()) == catalan(k) &&
                    all.size() == brute.size() && nc.size() == brute_nc.size();
    r.passed = r.passed && ok;
    r.observed.push_back({{"two_k", 2 * k},
                          {"pair_partitions", all.size()},
                          {"double_factorial", double_factorial_odd(2 * k)},
                          {"brute_force", brute.size()},
                          {"nc_pair_partitions", nc.size()},
                          {"catalan", catalan(k)},
                          {"brute_force_nc", brute_nc.size()}});
  }
  r.detail = r.passed ? "all counts match (2k-1)!!, Catalan(k) and the brute-force filter for k=1..6"
                      : "count mismatch";
  return r;
}

CriterionResult c2_gamma_pi_bound(const Options&, const Tolerances&) {
  CriterionResult r{2, "|gamma pi| bound and equality case", true, "", json::array(), 0.0};
  long long checked = 0, exceptions = 0;
  for (int k = 1; k <= 6; ++k) {
    long long equal = 0, nc = 0;
    for (const auto& p : enumerate_pair_partitions(2 * k)) {
      const int cycles = gamma_pi(p).cycle_count();
      std::vector<int> block_of(static_cast<std::size_t>(2 * k));
      int next = 0;
      for (auto [a, b] : p.pairs()) block_of[static_cast<std::size_t>(a - 1)] = block_of[static_cast<std::size_t>(b - 1)] = next++;
      const bool noncrossing = !has_crossing(block_of);
      if (noncrossing != is_noncrossing(p)) ++exceptions;
      if (cycles > k + 1 || ((cycles == k + 1) != noncrossing)) ++exceptions;
      equal += cycles == k + 1;
      nc += noncrossing;
      ++checked;
    }
    r.observed.push_back({{"two_k", 2 * k}, {"equality_cases", equal}, {"noncrossing", nc}});
  }
  r.passed = exceptions == 0;
  r.detail = fmt::format("{} pair partitions with 2k <= 12 checked, {} exceptions", checked, exceptions);
  return r;
}

CriterionResult c3_worked_example(const Options&, const Tolerances&) {
  CriterionResult r{3, "gamma pi worked example", false, "", json::object(), 0.0};
  const auto crossing = PairPartition::from_pairs({{1, 3}, {2, 4}, {5, 6}});
  const auto nested = PairPartition::from_pairs({{1, 2}, {3, 4}, {5, 6}});
  const auto g1 = gamma_pi(crossing);
  const auto g2 = gamma_pi(nested);
  r.observed = {{"crossing", crossing.to_string()},
                {"gamma_pi_crossing", g1.to_string()},
                {"nested", nested.to_string()},
                {"gamma_pi_nested", g2.to_string()},
                {"cycles_nested", g2.cycle_count()}};
  r.passed = g1.to_string() == "(14325)(6)" && g1.cycle_count() == 2 &&
             g2.to_string() == "(135)(2)(4)(6)" && g2.cycle_count() == 4;
  r.detail = fmt::format("gamma pi of {} = {}; of {} = {} ({} cycles)", crossing.to_string(),
                         g1.to_string(), nested.to_string(), g2.to_string(), g2.cycle_count());
  return r;
}

CriterionResult c4_elliptic_simulation(const Options& o, const Tolerances& tol) {
  CriterionResult r{4, "elliptic moments vs simulation", false, "", json::object(), 0.0};
  const auto plan = plan_for(o.tier);
  const std::vector<double> rhos{0.0, 0.5, 1.0};
  std::vector<StarWord> words;
  for (int len = 1; len <= 6; ++len)
    for (auto& w : all_words(len)) words.push_back(std::move(w));

  Agreement agreement(tol.z_bound);
  for (int s = 0; s < plan.seeds; ++s) {
    for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
      const auto spec = EnsembleSpec::square_elliptic(300, rhos[ri], sub_seed(o, 4, static_cast<std::uint64_t>(s), ri));
      const auto est = estimate_star_moments(std::span(&spec, 1), words, 50, {1200, o.threads});
      for (std::size_t wi = 0; wi < words.size(); ++wi) {
        agreement.record(ri * words.size() + wi, elliptic_star_moment(rhos[ri], words[wi]),
                         est[wi].value + o.inject_bias, est[wi].std_error,
                         fmt::format("rho={} w={}", rhos[ri], words[wi].to_string()));
      }
    }
  }
  r.passed = agreement.fraction() >= tol.agreement_fraction;
  r.observed = agreement.to_json();
  r.observed["seeds"] = plan.seeds;
  r.detail = fmt::format("n=300 reps=50, {} seeds x 3 rho x {} words: {}", plan.seeds, words.size(),
                         agreement_detail(agreement, tol.agreement_fraction));
  return r;
}

CriterionResult c5_mixed_elliptic(const Options& o, const Tolerances& tol) {
  CriterionResult r{5, "free elliptic mixed moments vs simulation", false, "", json::object(), 0.0};
  const auto plan = plan_for(o.tier);
  const EllipticParams params({0.7, 0.3});
  const std::vector<std::string> texts{
      "1,1@2",           "1,*@2",           "1,*,1@2,*@2",         "1,1,1@2,1@2",
      "1,1@2,1,1@2",     "1,1@2,*@2,*",     "1,1@2,1@2,1",         "1,*@2,1,*@2,1,*@2",
      "1,*,1,*,1@2,*@2", "1,1@2,*@2,*,1@2,*@2", "1,1@2,1@2,*@2,*@2,*", "1,1,*@2,1@2,*,*@2"};
  std::vector<StarWord> words;
  for (const auto& t : texts) words.push_back(StarWord::parse(t));

  int zero = 0, nonzero = 0;
  json theory = json::object();
  for (const auto& w : words) {
    const double v = mixed_elliptic_moment(params, w);
    (std::abs(v) < 1e-15 ? zero : nonzero) += 1;
    theory[w.to_string()] = v;
  }
  Agreement agreement(tol.z_bound);
  for (int s = 0; s < plan.seeds; ++s) {
    const std::vector<EnsembleSpec> specs{
        EnsembleSpec::square_elliptic(300, 0.7, sub_seed(o, 5, static_cast<std::uint64_t>(s), 1)),
        EnsembleSpec::square_elliptic(300, 0.3, sub_seed(o, 5, static_cast<std::uint64_t>(s), 2))};
    const auto est = estimate_star_moments(specs, words, 50, {1200, o.threads});
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
      agreement.record(wi, mixed_elliptic_moment(params, words[wi]), est[wi].value + o.inject_bias,
                       est[wi].std_error, words[wi].to_string());
    }
  }
  r.passed = agreement.fraction() >= tol.agreement_fraction && zero > 0 && nonzero > 0;
  r.observed = agreement.to_json();
  r.observed["theory"] = theory;
  r.observed["zero_words"] = zero;
  r.observed["nonzero_words"] = nonzero;
  r.detail = fmt::format("rho=(0.7,0.3) n=300 reps=50, {} words ({} with limit 0), {} seeds: {}",
                         words.size(), zero, plan.seeds,
                         agreement_detail(agreement, tol.agreement_fraction));
  return r;
}

CriterionResult c6_deterministic(const Options& o, const Tolerances& tol) {
  CriterionResult r{6, "moments with deterministic matrices vs simulation", false, "", json::object(), 0.0};
  const auto plan = plan_for(o.tier);
  const int n = 300;
  const double rho = 0.5;
  Matrix d = Matrix::Zero(n, n), e = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = i % 2 == 0 ? 1.0 : -1.0;
    e(i, i) = i < n / 2 ? 1.0 : -1.0;
  }
  const std::vector<Matrix> by_label{d, e};
  const auto oracle = matrix_trace_oracle(by_label);
  const std::vector<std::pair<std::string, std::string>> cases{
      {"1,*", "D,I"},         {"1,*", "D,D"},          {"1,1", "D,D"},
      {"1,*", "DE,ED"},       {"1,*,1,*", "D,I,D,I"},  {"1,1,*,*", "D,E,D,E"},
      {"1,*,*,1", "DE,I,E,D"}, {"1,1,1,1", "D,D,E,E"}, {"1,*,1,*", "E,E,D,D"},
      {"*,1,1,*", "I,DE,I,ED"}};

  json theory = json::object();
  std::vector<double> values;
  std::vector<std::vector<Matrix>> concrete;
  for (const auto& [wt, bt] : cases) {
    const auto w = StarWord::parse(wt);
    const auto blocks = parse_product_specs(bt, "DE");
    const auto v = elliptic_moment_with_deterministic(rho, w, blocks, oracle);
    values.push_back(v.real());
    theory[wt + " | " + bt] = v.real();
    std::vector<Matrix> mats;
    for (const auto& b : blocks) mats.push_back(evaluate_product(b, by_label, n));
    concrete.push_back(std::move(mats));
  }
  Agreement agreement(tol.z_bound);
  for (int s = 0; s < plan.seeds; ++s) {
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto spec = EnsembleSpec::square_elliptic(n, rho, sub_seed(o, 6, static_cast<std::uint64_t>(s), c));
      const auto est = estimate_mixed_moment_with_deterministic(
          spec, StarWord::parse(cases[c].first), concrete[c], 50, {1200, o.threads});
      agreement.record(c, values[c], est.value + o.inject_bias, est.std_error,
                       cases[c].first + " | " + cases[c].second);
    }
  }
  r.passed = agreement.fraction() >= tol.agreement_fraction;
  r.observed = agreement.to_json();
  r.observed["theory"] = theory;
  r.detail = fmt::format("rho=0.5 n=300 reps=50, {} cases, {} seeds: {}", cases.size(), plan.seeds,
                         agreement_detail(agreement, tol.agreement_fraction));
  return r;
}

CriterionResult c7_marchenko_pastur(const Options& o, const Tolerances& tol) {
  CriterionResult r{7, "Marchenko-Pastur moments", false, "", json::object(), 0.0};
  const auto plan = plan_for(o.tier);
  Agreement agreement(tol.z_bound);
  for (int s = 0; s < plan.seeds; ++s) {
    for (int k = 1; k <= 4; ++k) {
      const auto spec = EnsembleSpec::rectangular_elliptic(200, 400, 0.5, sub_seed(o, 7, static_cast<std::uint64_t>(s)));
      const auto est = estimate_wishart_moment(spec, k, 100, {1200, o.threads});
      agreement.record(static_cast<std::size_t>(k - 1), mp_moment(0.5, k), est.value + o.inject_bias,
                       est.std_error, fmt::format("k={}", k));
    }
  }
  double worst_rel = 0.0;
  json integration = json::array();
  for (double y : {0.25, 0.5, 1.0, 2.0}) {
    for (int k = 1; k <= 6; ++k) {
      const double exact = mp_moment(y, k);
      const double integral = mp_moment_by_integration(y, k);
      const double rel = std::abs(integral - exact) / std::abs(exact);
      worst_rel = std::max(worst_rel, rel);
      integration.push_back({{"y", y}, {"k", k}, {"mp_moment", exact}, {"integral", integral}});
    }
  }
  const bool sim_ok = agreement.fraction() >= tol.agreement_fraction;
  r.passed = sim_ok && worst_rel <= tol.mp_integration;
  r.observed = agreement.to_json();
  r.observed["integration"] = integration;
  r.observed["max_relative_integration_error"] = worst_rel;
  r.detail = fmt::format("p=200 n=400 rho=0.5 reps=100, {} seeds: {}; density integration max rel err {:.2e}",
                         plan.seeds, agreement_detail(agreement, tol.agreement_fraction), worst_rel);
  return r;
}

CriterionResult c8_mixed_wishart(const Options& o, const Tolerances& tol) {
  CriterionResult r{8, "free Marchenko-Pastur mixed moments", false, "", json::object(), 0.0};
  const auto plan = plan_for(o.tier);
  const std::vector<std::vector<int>> patterns{{1, 2}, {1, 2, 1, 2}};
  Agreement agreement(tol.z_bound);
  json theory = json::object();
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    theory[fmt::format("{}", fmt::join(patterns[i], ","))] = mixed_mp_moment(1.0, patterns[i]);
  }
  for (int s = 0; s < plan.seeds; ++s) {
    const std::vector<EnsembleSpec> specs{
        EnsembleSpec::rectangular_elliptic(300, 300, 0.5, sub_seed(o, 8, static_cast<std::uint64_t>(s), 1)),
        EnsembleSpec::rectangular_elliptic(300, 300, 0.5, sub_seed(o, 8, static_cast<std::uint64_t>(s), 2))};
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      const auto est = estimate_mixed_wishart_moment(specs, patterns[i], 100, {1200, o.threads});
      agreement.record(i, mixed_mp_moment(1.0, patterns[i]), est.value + o.inject_bias, est.std_error,
                       fmt::format("labels {}", fmt::join(patterns[i], ",")));
    }
  }
  r.passed = agreement.fraction() >= tol.agreement_fraction;
  r.observed = agreement.to_json();
  r.observed["theory"] = theory;
  r.detail = fmt::format("p=n=300 rho=0.5 reps=100, {} seeds: {}", plan.seeds,
                         agreement_detail(agreement, tol.agreement_fraction));
  return r;
}

CriterionResult c9_brown(const Options& o, const Tolerances& tol) {
  CriterionResult r{9, "Brown measure of products", false, "", json::object(), 0.0};
  const auto plan = plan_for(o.tier);
  // Closed form, and the R-diagonal formula fed with the product data.
  long long closed_mismatch = 0;
  double rdiag_gap = 0.0;
  for (int k = 2; k <= 6; ++k) {
    const auto sinv = STransformInverse::product_of_circular(k);
    for (int i = 0; i <= 400; ++i) {
      const double t = 2.0 * i / 400.0;
      const double expected = t < 1.0 ? std::pow(t, 2.0 / k) : 1.0;
      const double v = brown_radial_cdf_product(k, t);
      if (v != expected) ++closed_mismatch;
      rdiag_gap = std::max(rdiag_gap, std::abs(brown_radial_cdf_rdiagonal(sinv, t) - v));
    }
  }
  const std::vector<std::vector<double>> configs{{0.0, 0.0}, {0.3, 0.6, 0.9}};
  json sims = json::array();
  bool sim_ok = true;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const int k = static_cast<int>(configs[c].size());
    const auto model = product_radial_cdf(k);
    double worst400 = 0.0, mean400 = 0.0, mean50 = 0.0;
    for (int s = 0; s < plan.cdf_seeds; ++s) {
      double dist[2];
      const int dims[2] = {50, 400};
      for (int d = 0; d < 2; ++d) {
        std::vector<EnsembleSpec> specs;
        for (std::size_t f = 0; f < configs[c].size(); ++f) {
          specs.push_back(EnsembleSpec::square_elliptic(
              dims[d], configs[c][f], sub_seed(o, 9, c * 1000 + static_cast<std::uint64_t>(s), f * 10 + d)));
        }
        dist[d] = sup_distance(empirical_radial_cdf(product_spectrum(specs)), model) + o.inject_bias;
      }
      worst400 = std::max(worst400, dist[1]);
      mean400 += dist[1] / plan.cdf_seeds;
      mean50 += dist[0] / plan.cdf_seeds;
    }
    const bool ok = worst400 <= tol.cdf_distance && mean400 < mean50;
    sim_ok = sim_ok && ok;
    sims.push_back({{"k", k},
                    {"rho", configs[c]},
                    {"seeds", plan.cdf_seeds},
                    {"max_distance_n400", worst400},
                    {"mean_distance_n400", mean400},
                    {"mean_distance_n50", mean50},
                    {"passed", ok}});
  }
  r.passed = closed_mismatch == 0 && rdiag_gap <= tol.exact && sim_ok;
  r.observed = {{"closed_form_mismatches", closed_mismatch},
                {"rdiagonal_max_gap", rdiag_gap},
                {"simulations", sims}};
  r.detail = fmt::format(
      "closed form mismatches {}, R-diagonal gap {:.1e}; k=2 max sup-dist {:.4f} (n=50 mean {:.4f}), "
      "k=3 max sup-dist {:.4f} (n=50 mean {:.4f})",
      closed_mismatch, rdiag_gap, sims[0]["max_distance_n400"].get<double>(),
      sims[0]["mean_distance_n50"].get<double>(), sims[1]["max_distance_n400"].get<double>(),
      sims[1]["mean_distance_n50"].get<double>());
  return r;
}

CriterionResult c10_product_equality(const Options&, const Tolerances& tol) {
  CriterionResult r{10, "elliptic vs circular product moments", false, "", json::object(), 0.0};
  const std::vector<double> grid{0.0, 0.3, 0.7, 1.0};
  double worst = 0.0;
  int checked = 0;
  for (int k = 1; k <= 3; ++k) {
    const int combos = static_cast<int>(std::pow(4, k));
    for (int c = 0; c < combos; ++c) {
      std::vector<double> rhos;
      for (int f = 0, code = c; f < k; ++f, code /= 4) rhos.push_back(grid[static_cast<std::size_t>(code % 4)]);
      for (int n = 1; n <= 2; ++n) {
        const auto [with_rho, circular] = elliptic_vs_circular_product_moment(rhos, n);
        worst = std::max(worst, std::abs(with_rho - circular));
        ++checked;
      }
    }
  }
  r.passed = worst <= tol.exact;
  r.observed = {{"cases", checked}, {"max_abs_difference", worst}};
  r.detail = fmt::format("{} (k, n, rho) cases, max |difference| {:.1e}", checked, worst);
  return r;
}

CriterionResult c11_inversion(const Options&, const Tolerances& tol) {
  CriterionResult r{11, "S_k inverse round trip", false, "", json::object(), 0.0};
  double worst_abs = 0.0;
  double worst_rel = 0.0;
  int checked = 0;
  for (int k = 1; k <= 6; ++k) {
    for (int i = 0; i <= 100; ++i) {
      const double t = std::pow(10.0, -6.0 + i * 0.1);
      const double err = std::abs(s_k(s_k_inverse(t, k), k) - t);
      worst_abs = std::max(worst_abs, err);
      worst_rel = std::max(worst_rel, err / t);
      ++checked;
    }
  }
  r.passed = worst_rel <= tol.inversion;
  r.observed = {{"points", checked}, {"max_rel_error", worst_rel}, {"max_abs_error", worst_abs}};
  r.detail = fmt::format("{} points t in [1e-6, 1e4], k=1..6, max |S_k(S_k^-1(t)) - t| / t {:.1e} (absolute {:.1e})",
                         checked, worst_rel, worst_abs);
  return r;
}

CriterionResult c12_profile(const Options& o, const Tolerances& tol) {
  CriterionResult r{12, "generalised elliptic limit", false, "", json::object(), 0.0};
  const auto plan = plan_for(o.tier);
  const auto profile = RhoProfile::tabulated({{0.0, 0.0}, {1.0, 1.0}});
  const std::vector<StarWord> words{StarWord::parse("1,*,1,*"), StarWord::parse("1,1,*,*")};

  json limits = json::array();
  bool quad_ok = true;
  std::vector<MonteCarloValue> mc;
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    const auto v = generalized_elliptic_limit(profile, words[wi], plan.mc_samples, sub_seed(o, 12, wi));
    const double q = grid_generalized_limit([&](double x) { return profile(x); }, words[wi], plan.grid_points);
    const bool ok = std::abs(v.value - q) <= std::max(tol.z_bound * v.std_error, tol.exact);
    quad_ok = quad_ok && ok;
    mc.push_back(v);
    limits.push_back({{"word", words[wi].to_string()},
                      {"monte_carlo", v.value},
                      {"std_error", v.std_error},
                      {"quadrature", q},
                      {"passed", ok}});
  }
  Agreement agreement(tol.z_bound);
  for (int s = 0; s < plan.seeds; ++s) {
    const auto spec = EnsembleSpec::generalized_elliptic(400, profile, sub_seed(o, 12, 100 + static_cast<std::uint64_t>(s)));
    const auto est = estimate_star_moments(std::span(&spec, 1), words, 50, {1200, o.threads});
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
      agreement.record(wi, mc[wi].value, est[wi].value + o.inject_bias,
                       std::hypot(est[wi].std_error, mc[wi].std_error), words[wi].to_string());
    }
  }
  r.passed = quad_ok && agreement.fraction() >= tol.agreement_fraction;
  r.observed = agreement.to_json();
  r.observed["limits"] = limits;
  r.detail = fmt::format(
      "f(x)=x: MC limit vs {}-point grid {} ({:.6f} vs {:.6f} for 1,1,*,*); n=400 reps=50, {} seeds: {}",
      plan.grid_points, quad_ok ? "agree" : "DISAGREE", mc[1].value,
      limits[1]["quadrature"].get<double>(), plan.seeds,
      agreement_detail(agreement, tol.agreement_fraction));
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const Options& options, const Tolerances& tol) {
  using Fn = CriterionResult (*)(const Options&, const Tolerances&);
  static constexpr Fn table[criterion_count] = {
      c1_counts,          c2_gamma_pi_bound, c3_worked_example,     c4_elliptic_simulation,
      c5_mixed_elliptic,  c6_deterministic,  c7_marchenko_pastur,   c8_mixed_wishart,
      c9_brown,           c10_product_equality, c11_inversion,      c12_profile};
  if (id < 1 || id > criterion_count) throw DomainError("no criterion " + std::to_string(id));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = table[id - 1](options, tol);
  } catch (const Error& e) {
    r.id = id;
    r.name = "criterion " + std::to_string(id);
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const Options& options, const std::vector<int>& ids,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<int> selected = ids;
  if (selected.empty()) {
    selected.resize(criterion_count);
    std::iota(selected.begin(), selected.end(), 1);
  }
  std::vector<CriterionResult> out;
  for (int id : selected) {
    out.push_back(run_criterion(id, options));
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  return fmt::format("[{}] C{} {}: {}", r.passed ? "PASS" : "FAIL", r.id, r.name, r.detail);
}

json summary_json(const std::vector<CriterionResult>& results, const Options& options,
                  const Tolerances& tol) {
  json criteria = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    criteria.push_back({{"id", r.id},
                        {"name", r.name},
                        {"passed", r.passed},
                        {"detail", r.detail},
                        {"observed", r.observed}});
  }
  return {{"tier", options.tier == Tier::full ? "full" : "quick"},
          {"seed", options.seed},
          {"inject_bias", options.inject_bias},
          {"tolerances",
           {{"z_bound", tol.z_bound},
            {"agreement_fraction", tol.agreement_fraction},
            {"cdf_distance", tol.cdf_distance},
            {"exact", tol.exact},
            {"inversion", tol.inversion},
            {"mp_integration", tol.mp_integration}}},
          {"criteria", criteria},
          {"all_passed", all}};
}

}  // namespace freelab::verify
