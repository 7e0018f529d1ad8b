#include "freelab/matrixlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "freelab/errors.hpp"

namespace freelab {

namespace {

// Fills a rows x cols matrix with standard Gaussians. For i < j inside the
// leading min(rows, cols) square, (a_ij, a_ji) get correlation corr(i, j)
// (0-based) via a_ji = r a_ij + sqrt(1 - r^2) z.
template <class Corr>
Matrix fill_elliptic(int rows, int cols, Rng& rng, Corr corr) {
  Matrix m(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int square = std::min(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (i < square && j < square && j < i) continue;  // set with (j, i)
      const double x = normal(rng);
      m(i, j) = x;
      if (i < square && j < square && j > i) {
        const double r = corr(i, j);
        m(j, i) = r * x + std::sqrt(std::max(0.0, 1.0 - r * r)) * normal(rng);
      }
    }
  }
  return m;
}

int worker_count(int requested, int tasks) {
  int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(t, 1, std::max(tasks, 1));
}

// Runs task(r) for r in [0, count). Each task writes only its own slot, so
// the outcome is independent of scheduling.
void for_each_replicate(int count, int threads, const std::function<void(int)>& task) {
  const int workers = worker_count(threads, count);
  if (workers == 1) {
    for (int r = 0; r < count; ++r) task(r);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < count; r = next++) {
        try {
          task(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

MomentEstimate summarize(const std::vector<double>& values, int n) {
  const auto reps = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= reps;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (reps - 1.0));
  return {mean, sd / std::sqrt(reps), static_cast<int>(values.size()), n};
}

void check_reps(int reps) {
  if (reps < 2) throw DomainError("need at least two replicates, got " + std::to_string(reps));
}

const Matrix& letter_matrix(const Letter& l, const std::vector<Matrix>& plain,
                            const std::vector<Matrix>& star) {
  const auto idx = static_cast<std::size_t>(l.label - 1);
  return l.exponent == Exponent::plain ? plain[idx] : star[idx];
}

// Traces of many words over one set of matrices. Products of words up to
// half the longest length are memoised; a word u v is then traced as
// sum(U .* V^T) in O(n^2).
class WordTracer {
 public:
  WordTracer(std::vector<Matrix> plain, std::vector<Matrix> star)
      : plain_(std::move(plain)), star_(std::move(star)) {}

  double normalized_trace(const StarWord& w) {
    const auto& letters = w.letters();
    const std::size_t half = (letters.size() + 1) / 2;
    const Matrix& u = product(std::span(letters).first(half));
    const double n = static_cast<double>(u.rows());
    if (half == letters.size()) return u.trace() / n;
    const Matrix& v = product(std::span(letters).subspan(half));
    return (u.array() * v.transpose().array()).sum() / n;
  }

 private:
  const Matrix& product(std::span<const Letter> letters) {
    if (letters.size() == 1) return letter_matrix(letters[0], plain_, star_);
    std::string key;
    for (const auto& l : letters) {
      key += std::to_string(l.label);
      key += l.exponent == Exponent::plain ? '+' : '*';
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Matrix prod = product(letters.first(letters.size() - 1)) *
                  letter_matrix(letters.back(), plain_, star_);
    return memo_.emplace(std::move(key), std::move(prod)).first->second;
  }

  std::vector<Matrix> plain_;
  std::vector<Matrix> star_;
  std::unordered_map<std::string, Matrix> memo_;
};

void check_square_specs(std::span<const EnsembleSpec> specs, int needed_labels, int max_dimension) {
  if (specs.empty()) throw DomainError("at least one ensemble is required");
  if (needed_labels > static_cast<int>(specs.size())) {
    throw DomainError("word uses label " + std::to_string(needed_labels) + " but only " +
                      std::to_string(specs.size()) + " ensembles were given");
  }
  for (const auto& s : specs) {
    s.validate(max_dimension);
    if (s.kind == EnsembleKind::rectangular_elliptic) {
      throw DomainError("*-moments need square ensembles");
    }
    if (s.n != specs[0].n) throw DomainError("all ensembles in a word must share n");
  }
}

}  // namespace

// --------------------------------------------------------------- EnsembleSpec

EnsembleSpec EnsembleSpec::square_elliptic(int n, double rho, std::uint64_t seed) {
  return {EnsembleKind::square_elliptic, n, 0, RhoProfile::constant(rho), seed};
}

EnsembleSpec EnsembleSpec::generalized_elliptic(int n, RhoProfile profile, std::uint64_t seed) {
  return {EnsembleKind::generalized_elliptic, n, 0, std::move(profile), seed};
}

EnsembleSpec EnsembleSpec::rectangular_elliptic(int p, int n, double rho, std::uint64_t seed) {
  return {EnsembleKind::rectangular_elliptic, n, p, RhoProfile::constant(rho), seed};
}

void EnsembleSpec::validate(int max_dimension) const {
  if (n < 1) throw DomainError("ensemble dimension n must be >= 1");
  if (n > max_dimension) {
    throw DomainError("dimension n = " + std::to_string(n) + " exceeds the cap " +
                      std::to_string(max_dimension));
  }
  if (kind == EnsembleKind::rectangular_elliptic) {
    if (p < 1) throw DomainError("rectangular ensembles need p >= 1");
    if (p > max_dimension) {
      throw DomainError("dimension p = " + std::to_string(p) + " exceeds the cap " +
                        std::to_string(max_dimension));
    }
  }
  if (kind != EnsembleKind::generalized_elliptic && !rho.is_constant()) {
    throw DomainError("only the generalised ensemble takes a tabulated profile");
  }
}

std::string EnsembleSpec::describe() const {
  const std::string corr =
      rho.is_constant() ? fmt::format("rho={:.17g}", rho.constant_value())
                        : fmt::format("profile[{} points]", rho.points().size());
  switch (kind) {
    case EnsembleKind::square_elliptic:
      return fmt::format("square_elliptic(n={}, {}, seed={})", n, corr, seed);
    case EnsembleKind::generalized_elliptic:
      return fmt::format("generalized_elliptic(n={}, {}, seed={})", n, corr, seed);
    case EnsembleKind::rectangular_elliptic:
      return fmt::format("rectangular_elliptic(p={}, n={}, {}, seed={})", p, n, corr, seed);
  }
  return "unknown";
}

// ------------------------------------------------------------------ samplers

Matrix sample_elliptic(const EnsembleSpec& spec, Rng& rng) {
  const double r = spec.rho.constant_value();
  if (!(std::abs(r) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
  return fill_elliptic(spec.n, spec.n, rng, [r](int, int) { return r; });
}

Matrix sample_generalized_elliptic(const EnsembleSpec& spec, Rng& rng) {
  const auto& f = spec.rho;
  const double n = static_cast<double>(spec.n);
  // Tabulate f(d / n) once per distance d.
  std::vector<double> by_distance(static_cast<std::size_t>(spec.n));
  for (int d = 0; d < spec.n; ++d) {
    const double v = f(d / n);
    if (!(std::abs(v) <= 1.0)) {
      throw DomainError("profile value " + std::to_string(v) + " outside [-1, 1]");
    }
    by_distance[static_cast<std::size_t>(d)] = v;
  }
  return fill_elliptic(spec.n, spec.n, rng, [&](int i, int j) {
    return by_distance[static_cast<std::size_t>(std::abs(i - j))];
  });
}

Matrix sample_rectangular_elliptic(const EnsembleSpec& spec, Rng& rng) {
  const double r = spec.rho.constant_value();
  if (!(std::abs(r) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
  return fill_elliptic(spec.p, spec.n, rng, [r](int, int) { return r; });
}

Matrix sample(const EnsembleSpec& spec, std::uint64_t replicate, std::uint64_t stream) {
  auto rng = make_rng(spec.seed, {replicate, stream});
  switch (spec.kind) {
    case EnsembleKind::square_elliptic:
      return sample_elliptic(spec, rng);
    case EnsembleKind::generalized_elliptic:
      return sample_generalized_elliptic(spec, rng);
    case EnsembleKind::rectangular_elliptic:
      return sample_rectangular_elliptic(spec, rng);
  }
  throw DomainError("unknown ensemble kind");
}

// ---------------------------------------------------------------- estimators

std::vector<MomentEstimate> estimate_star_moments(std::span<const EnsembleSpec> label_specs,
                                                  std::span<const StarWord> words, int reps,
                                                  const EstimatorOptions& options) {
  check_reps(reps);
  int labels_needed = 0;
  for (const auto& w : words) labels_needed = std::max(labels_needed, w.max_label());
  check_square_specs(label_specs, labels_needed, options.max_dimension);
  const int n = label_specs[0].n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(reps));
  for_each_replicate(reps, options.threads, [&](int r) {
    std::vector<Matrix> plain, star;
    for (int t = 1; t <= labels_needed; ++t) {
      Matrix a = sample(label_specs[static_cast<std::size_t>(t - 1)], static_cast<std::uint64_t>(r),
                        static_cast<std::uint64_t>(t)) *
                 scale;
      star.emplace_back(a.transpose());
      plain.push_back(std::move(a));
    }
    WordTracer tracer(std::move(plain), std::move(star));
    auto& out = per_rep[static_cast<std::size_t>(r)];
    out.reserve(words.size());
    for (const auto& w : words) out.push_back(tracer.normalized_trace(w));
  });

  std::vector<MomentEstimate> estimates;
  std::vector<double> column(static_cast<std::size_t>(reps));
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t r = 0; r < per_rep.size(); ++r) column[r] = per_rep[r][i];
    estimates.push_back(summarize(column, n));
  }
  return estimates;
}

MomentEstimate estimate_star_moment(std::span<const EnsembleSpec> label_specs, const StarWord& w,
                                    int reps, const EstimatorOptions& options) {
  return estimate_star_moments(label_specs, std::span(&w, 1), reps, options).front();
}

MomentEstimate estimate_star_moment(const EnsembleSpec& spec, const StarWord& w, int reps,
                                    const EstimatorOptions& options) {
  if (w.max_label() != 1) throw DomainError("word has labels beyond 1 but one ensemble was given");
  return estimate_star_moment(std::span(&spec, 1), w, reps, options);
}

MomentEstimate estimate_wishart_moment(const EnsembleSpec& spec, int k, int reps,
                                       const EstimatorOptions& options) {
  if (k < 1) throw DomainError("moment order must be positive");
  std::vector<int> labels(static_cast<std::size_t>(k), 1);
  return estimate_mixed_wishart_moment(std::span(&spec, 1), labels, reps, options);
}

MomentEstimate estimate_mixed_wishart_moment(std::span<const EnsembleSpec> label_specs,
                                             std::span<const int> labels, int reps,
                                             const EstimatorOptions& options) {
  check_reps(reps);
  if (labels.empty()) throw DomainError("need at least one factor");
  const int labels_needed = *std::max_element(labels.begin(), labels.end());
  if (*std::min_element(labels.begin(), labels.end()) < 1 ||
      labels_needed > static_cast<int>(label_specs.size())) {
    throw DomainError("factor labels must lie in 1.." + std::to_string(label_specs.size()));
  }
  for (const auto& s : label_specs) {
    s.validate(options.max_dimension);
    if (s.kind != EnsembleKind::rectangular_elliptic) {
      throw DomainError("Wishart moments need rectangular ensembles");
    }
    if (s.p != label_specs[0].p || s.n != label_specs[0].n) {
      throw DomainError("all rectangular factors must share p and n");
    }
  }
  const int p = label_specs[0].p;
  const double inv_n = 1.0 / static_cast<double>(label_specs[0].n);

  std::vector<double> values(static_cast<std::size_t>(reps));
  for_each_replicate(reps, options.threads, [&](int r) {
    std::vector<Matrix> wishart;
    for (int t = 1; t <= labels_needed; ++t) {
      const Matrix x = sample(label_specs[static_cast<std::size_t>(t - 1)],
                              static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(t));
      wishart.emplace_back((x * x.transpose()) * inv_n);
    }
    Matrix prod = wishart[static_cast<std::size_t>(labels[0] - 1)];
    for (std::size_t i = 1; i < labels.size(); ++i) {
      prod = prod * wishart[static_cast<std::size_t>(labels[i] - 1)];
    }
    values[static_cast<std::size_t>(r)] = prod.trace() / static_cast<double>(p);
  });
  return summarize(values, p);
}

MomentEstimate estimate_mixed_moment_with_deterministic(const EnsembleSpec& spec,
                                                        const StarWord& w,
                                                        std::span<const Matrix> deterministic,
                                                        int reps,
                                                        const EstimatorOptions& options) {
  check_reps(reps);
  check_square_specs(std::span(&spec, 1), w.max_label(), options.max_dimension);
  if (deterministic.size() != w.size()) {
    throw DomainError("expected one deterministic matrix per letter: word has " +
                      std::to_string(w.size()) + " letters, got " +
                      std::to_string(deterministic.size()));
  }
  const int n = spec.n;
  for (const auto& d : deterministic) {
    if (d.rows() != n || d.cols() != n) {
      throw DomainError(fmt::format("deterministic matrix is {}x{}, expected {}x{}", d.rows(),
                                    d.cols(), n, n));
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  std::vector<double> values(static_cast<std::size_t>(reps));
  for_each_replicate(reps, options.threads, [&](int r) {
    const Matrix a = sample(spec, static_cast<std::uint64_t>(r), 1) * scale;
    Matrix prod = Matrix::Identity(n, n);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i].exponent == Exponent::plain) {
        prod = prod * a;
      } else {
        prod = prod * a.transpose();
      }
      prod = prod * deterministic[i];
    }
    values[static_cast<std::size_t>(r)] = prod.trace() / static_cast<double>(n);
  });
  return summarize(values, n);
}

Matrix evaluate_product(const ProductSpec& spec, std::span<const Matrix> by_label, int n) {
  Matrix prod = Matrix::Identity(n, n);
  for (const auto& f : spec) {
    if (f.label < 1 || f.label > static_cast<int>(by_label.size())) {
      throw DomainError("unknown deterministic label " + std::to_string(f.label));
    }
    const Matrix& d = by_label[static_cast<std::size_t>(f.label - 1)];
    if (d.rows() != n || d.cols() != n) throw DomainError("deterministic matrix has wrong shape");
    if (f.exponent == Exponent::plain) {
      prod = prod * d;
    } else {
      prod = prod * d.transpose();
    }
  }
  return prod;
}

TraceOracle matrix_trace_oracle(std::vector<Matrix> by_label) {
  if (by_label.empty()) throw DomainError("trace oracle needs at least one matrix");
  const auto n = static_cast<int>(by_label.front().rows());
  return [mats = std::move(by_label), n](const ProductSpec& spec) -> std::complex<double> {
    return evaluate_product(spec, mats, n).trace() / static_cast<double>(n);
  };
}

// ------------------------------------------------------------------- spectra

SpectralSample compute_spectrum(const Matrix& m, bool symmetric,
                                std::optional<std::uint64_t> seed) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DomainError("spectrum needs a square matrix");
  const Eigen::MatrixXd a = m;
  const auto n = a.rows();
  const double norm = a.norm();
  const double tolerance = 1e-8 * std::max(norm, 1e-300);

  std::vector<Eigen::Index> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(i * (n - 1) / 4);
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  SpectralSample out;
  out.eigenvalues.reserve(static_cast<std::size_t>(n));
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) throw SolverError("symmetric eigensolver did not converge", seed);
    for (auto idx : probes) {
      const Eigen::VectorXd v = solver.eigenvectors().col(idx);
      const double residual = (a * v - solver.eigenvalues()(idx) * v).norm() / v.norm();
      if (!(residual <= tolerance)) throw SolverError("eigenpair residual too large", seed);
    }
    for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues.emplace_back(solver.eigenvalues()(i), 0.0);
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, true);
    if (solver.info() != Eigen::Success) throw SolverError("eigensolver did not converge", seed);
    const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
    for (auto idx : probes) {
      const Eigen::VectorXcd v = solver.eigenvectors().col(idx);
      const double residual = (ac * v - solver.eigenvalues()(idx) * v).norm() / v.norm();
      if (!(residual <= tolerance)) throw SolverError("eigenpair residual too large", seed);
    }
    for (Eigen::Index i = 0; i < n; ++i) out.eigenvalues.push_back(solver.eigenvalues()(i));
  }
  return out;
}

SpectralSample product_spectrum(std::span<const EnsembleSpec> specs, int max_dimension) {
  if (specs.size() < 2) throw DomainError("a product spectrum needs at least two factors");
  check_square_specs(specs, 0, max_dimension);
  const int n = specs[0].n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix prod = sample(specs[0], 0, 1) * scale;
  std::string source = specs[0].describe();
  for (std::size_t i = 1; i < specs.size(); ++i) {
    prod = prod * (sample(specs[i], 0, i + 1) * scale);
    source += " * " + specs[i].describe();
  }
  SpectralSample out = compute_spectrum(prod, false, specs[0].seed);
  out.source = std::move(source);
  out.normalization = fmt::format("product of {} factors A_i/sqrt(n)", specs.size());
  return out;
}

}  // namespace freelab
