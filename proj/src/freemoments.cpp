#include "freelab/freemoments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "freelab/errors.hpp"
#include "freelab/rng.hpp"

namespace freelab {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

double int_power(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

void check_rho(double rho) {
  if (!(std::abs(rho) <= 1.0)) {
    throw DomainError("correlation must lie in [-1, 1], got " + std::to_string(rho));
  }
}

bool single_label(const StarWord& w) {
  return std::all_of(w.letters().begin(), w.letters().end(),
                     [&](const Letter& l) { return l.label == w[0].label; });
}

}  // namespace

// ------------------------------------------------------------------- StarWord

StarWord::StarWord(std::vector<Letter> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw DomainError("a word needs at least one letter");
  for (const auto& l : letters_) {
    if (l.label < 1) throw DomainError("word labels must be positive");
  }
}

StarWord StarWord::parse(std::string_view text) {
  std::vector<Letter> letters;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto skip_space = [&] {
    while (i < n && is_space(text[i])) ++i;
  };
  while (true) {
    skip_space();
    if (i >= n) throw ParseError("expected a letter '1' or '*'", i);
    Letter letter;
    if (text[i] == '1') {
      letter.exponent = Exponent::plain;
    } else if (text[i] == '*') {
      letter.exponent = Exponent::star;
    } else {
      throw ParseError(std::string("unexpected character '") + text[i] + "', expected '1' or '*'", i);
    }
    ++i;
    skip_space();
    if (i < n && text[i] == '@') {
      ++i;
      const std::size_t start = i;
      long label = 0;
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
        label = label * 10 + (text[i] - '0');
        if (label > 1'000'000) throw ParseError("label too large", start);
        ++i;
      }
      if (i == start) throw ParseError("expected a label after '@'", i);
      if (label < 1) throw ParseError("labels start at 1", start);
      letter.label = static_cast<int>(label);
      skip_space();
    }
    letters.push_back(letter);
    if (i >= n) break;
    if (text[i] != ',') throw ParseError(std::string("expected ',' but found '") + text[i] + "'", i);
    ++i;
  }
  return StarWord(std::move(letters));
}

StarWord StarWord::of(std::initializer_list<Exponent> exps) {
  std::vector<Letter> letters;
  for (auto e : exps) letters.push_back({e, 1});
  return StarWord(std::move(letters));
}

int StarWord::max_label() const {
  int m = 0;
  for (const auto& l : letters_) m = std::max(m, l.label);
  return m;
}

std::vector<int> StarWord::labels() const {
  std::vector<int> out;
  out.reserve(letters_.size());
  for (const auto& l : letters_) out.push_back(l.label);
  return out;
}

std::string StarWord::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (i > 0) out += ',';
    out += letters_[i].exponent == Exponent::plain ? '1' : '*';
    if (letters_[i].label != 1) out += '@' + std::to_string(letters_[i].label);
  }
  return out;
}

std::vector<StarWord> all_words(int length) {
  if (length < 1 || length > 24) throw DomainError("word length must be in [1, 24]");
  std::vector<StarWord> out;
  const unsigned long count = 1UL << length;
  out.reserve(count);
  for (unsigned long bits = 0; bits < count; ++bits) {
    std::vector<Letter> letters;
    for (int i = length - 1; i >= 0; --i) {
      letters.push_back({(bits >> i) & 1UL ? Exponent::star : Exponent::plain, 1});
    }
    out.emplace_back(std::move(letters));
  }
  return out;
}

// --------------------------------------------------------------- parameters

EllipticParams::EllipticParams(std::vector<double> rho_by_label) : rho_(std::move(rho_by_label)) {
  if (rho_.empty()) throw DomainError("at least one correlation parameter is required");
  for (double r : rho_) check_rho(r);
}

double EllipticParams::rho(int label) const {
  if (label < 1 || label > label_count()) {
    throw DomainError("unknown label " + std::to_string(label) + " (parameters cover 1.." +
                      std::to_string(label_count()) + ")");
  }
  return rho_[static_cast<std::size_t>(label - 1)];
}

RhoProfile RhoProfile::constant(double rho) {
  check_rho(rho);
  RhoProfile p;
  p.constant_ = rho;
  return p;
}

RhoProfile RhoProfile::tabulated(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw DomainError("a tabulated profile needs at least two points");
  if (points.front().first != 0.0 || points.back().first != 1.0) {
    throw DomainError("a tabulated profile must have grid endpoints 0 and 1");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i].first > points[i - 1].first)) {
      throw DomainError("profile grid must be strictly increasing");
    }
    if (!(points[i].second >= 0.0 && points[i].second <= 1.0)) {
      throw DomainError("profile values must lie in [0, 1], got " + std::to_string(points[i].second) +
                        " at x = " + std::to_string(points[i].first));
    }
  }
  RhoProfile p;
  p.points_ = std::move(points);
  return p;
}

RhoProfile RhoProfile::from_csv(std::istream& in) {
  std::vector<std::pair<double, double>> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double x = 0.0, f = 0.0;
    if (!(fields >> x >> f)) {
      if (points.empty() && line_no == 1) continue;  // header
      throw ParseError("profile CSV line " + std::to_string(line_no) + " is not 'x,f'", 0);
    }
    points.emplace_back(x, f);
  }
  return tabulated(std::move(points));
}

double RhoProfile::operator()(double x) const {
  if (is_constant()) return constant_;
  if (x <= 0.0) return points_.front().second;
  if (x >= 1.0) return points_.back().second;
  auto hi = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double v, const auto& pt) { return v < pt.first; });
  auto lo = hi - 1;
  const double t = (x - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

std::vector<ProductSpec> parse_product_specs(std::string_view text, std::string_view names) {
  std::vector<ProductSpec> out(1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_space(c)) continue;
    if (c == ',') {
      out.emplace_back();
      continue;
    }
    const auto pos = names.find(c);
    if (pos == std::string_view::npos) {
      if (c == 'I') continue;
      throw ParseError(std::string("unknown deterministic factor '") + c + "'", i);
    }
    Factor f{static_cast<int>(pos) + 1, Exponent::plain};
    if (i + 1 < text.size() && text[i + 1] == '*') {
      f.exponent = Exponent::star;
      ++i;
    }
    out.back().push_back(f);
  }
  return out;
}

// -------------------------------------------------------------------- moments

int t_statistic(const PairPartition& p, const StarWord& w) {
  if (static_cast<int>(w.size()) != p.size()) {
    throw DomainError("word length " + std::to_string(w.size()) +
                      " does not match partition size " + std::to_string(p.size()));
  }
  int t = 0;
  for (auto [r, s] : p.pairs()) {
    if (w[static_cast<std::size_t>(r - 1)].exponent == w[static_cast<std::size_t>(s - 1)].exponent) ++t;
  }
  return t;
}

double elliptic_star_moment(double rho, const StarWord& w) {
  check_rho(rho);
  if (w.size() % 2 != 0) return 0.0;
  double sum = 0.0;
  for (const auto& p : enumerate_nc_pair_partitions(static_cast<int>(w.size()))) {
    sum += int_power(rho, t_statistic(p, w));
  }
  return sum;
}

double mixed_elliptic_moment(const EllipticParams& params, const StarWord& w) {
  for (const auto& l : w.letters()) params.rho(l.label);  // validates every label
  if (w.size() % 2 != 0) return 0.0;
  double sum = 0.0;
  for (const auto& p : enumerate_nc_pair_partitions(static_cast<int>(w.size()))) {
    double term = 1.0;
    for (auto [r, s] : p.pairs()) {
      const Letter& a = w[static_cast<std::size_t>(r - 1)];
      const Letter& b = w[static_cast<std::size_t>(s - 1)];
      if (a.label != b.label) {
        term = 0.0;
        break;
      }
      if (a.exponent == b.exponent) term *= params.rho(a.label);
    }
    sum += term;
  }
  return sum;
}

std::complex<double> elliptic_moment_with_deterministic(double rho, const StarWord& w,
                                                        std::span<const ProductSpec> blocks,
                                                        const TraceOracle& oracle) {
  check_rho(rho);
  if (blocks.size() != w.size()) {
    throw DomainError("expected one deterministic block per letter: word has " +
                      std::to_string(w.size()) + " letters, got " + std::to_string(blocks.size()));
  }
  if (w.size() % 2 != 0) return 0.0;
  std::complex<double> sum = 0.0;
  for (const auto& p : enumerate_nc_pair_partitions(static_cast<int>(w.size()))) {
    std::complex<double> term = int_power(rho, t_statistic(p, w));
    for (const auto& cycle : pi_gamma(p).cycles()) {
      ProductSpec product;
      for (int l : cycle) {
        const auto& b = blocks[static_cast<std::size_t>(l - 1)];
        product.insert(product.end(), b.begin(), b.end());
      }
      if (!product.empty()) term *= oracle(product);
    }
    sum += term;
  }
  return sum;
}

MonteCarloValue generalized_elliptic_limit(const RhoProfile& profile, const StarWord& w,
                                           long mc_samples, std::uint64_t seed) {
  if (!single_label(w)) throw DomainError("generalised elliptic limits take single-label words");
  if (profile.is_constant()) return {elliptic_star_moment(profile.constant_value(), w), 0.0};
  if (mc_samples < 2) throw DomainError("need at least two Monte Carlo samples");
  if (w.size() % 2 != 0) return {0.0, 0.0};

  MonteCarloValue total;
  double variance = 0.0;
  const auto partitions = enumerate_nc_pair_partitions(static_cast<int>(w.size()));
  for (std::size_t idx = 0; idx < partitions.size(); ++idx) {
    const auto& p = partitions[idx];
    // One uniform per cycle of gamma*pi; index r lives in cycle cycle_of[r].
    const auto cycles = gamma_pi(p).cycles();
    std::vector<std::size_t> cycle_of(static_cast<std::size_t>(p.size()));
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      for (int r : cycles[c]) cycle_of[static_cast<std::size_t>(r - 1)] = c;
    }
    std::vector<std::pair<std::size_t, std::size_t>> factors;
    for (auto [r, s] : p.pairs()) {
      if (w[static_cast<std::size_t>(r - 1)].exponent == w[static_cast<std::size_t>(s - 1)].exponent) {
        factors.emplace_back(cycle_of[static_cast<std::size_t>(r - 1)],
                             cycle_of[static_cast<std::size_t>(s - 1)]);
      }
    }
    if (factors.empty()) {
      total.value += 1.0;
      continue;
    }
    auto rng = make_rng(seed, {idx});
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> u(cycles.size());
    double mean = 0.0, m2 = 0.0;
    for (long draw = 0; draw < mc_samples; ++draw) {
      for (auto& v : u) v = uniform(rng);
      double x = 1.0;
      for (auto [a, b] : factors) x *= profile(std::abs(u[a] - u[b]));
      const double delta = x - mean;
      mean += delta / static_cast<double>(draw + 1);
      m2 += delta * (x - mean);
    }
    total.value += mean;
    variance += m2 / static_cast<double>(mc_samples - 1) / static_cast<double>(mc_samples);
  }
  total.std_error = std::sqrt(variance);
  return total;
}

double mp_moment(double y, int k, const EnumerationLimits& limits) {
  std::vector<int> labels(static_cast<std::size_t>(std::max(k, 0)), 1);
  if (k < 1) throw DomainError("moment order must be positive");
  return mixed_mp_moment(y, labels, limits);
}

double mixed_mp_moment(double y, std::span<const int> labels, const EnumerationLimits& limits) {
  if (!(y > 0.0)) throw DomainError("ratio y must be positive");
  if (labels.empty()) throw DomainError("need at least one factor");
  const int k = static_cast<int>(labels.size());
  double sum = 0.0;
  std::vector<int> block_size;
  std::vector<int> block_label;
  for_each_nc_partition(
      k,
      [&](std::span<const int> block_of) {
        block_size.assign(labels.size(), 0);
        block_label.assign(labels.size(), 0);
        for (std::size_t i = 0; i < block_of.size(); ++i) {
          const auto b = static_cast<std::size_t>(block_of[i]);
          if (block_size[b] == 0) {
            block_label[b] = labels[i];
          } else if (block_label[b] != labels[i]) {
            return;  // free cumulants of distinct elements vanish
          }
          ++block_size[b];
        }
        double term = 1.0;
        for (int s : block_size) {
          if (s > 0) term *= int_power(y, s - 1);
        }
        sum += term;
      },
      limits);
  return sum;
}

StarWord product_word(int k, int n) {
  if (k < 1 || n < 1) throw DomainError("product word needs k >= 1 and n >= 1");
  std::vector<Letter> letters;
  for (int rep = 0; rep < n; ++rep) {
    for (int j = 1; j <= k; ++j) letters.push_back({Exponent::plain, j});
    for (int j = k; j >= 1; --j) letters.push_back({Exponent::star, j});
  }
  return StarWord(std::move(letters));
}

std::pair<double, double> elliptic_vs_circular_product_moment(std::span<const double> rhos, int n) {
  const int k = static_cast<int>(rhos.size());
  const StarWord w = product_word(k, n);
  const EllipticParams elliptic(std::vector<double>(rhos.begin(), rhos.end()));
  const EllipticParams circular(std::vector<double>(rhos.size(), 0.0));
  return {mixed_elliptic_moment(elliptic, w), mixed_elliptic_moment(circular, w)};
}

}  // namespace freelab
