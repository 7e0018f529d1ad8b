#pragma once

// Samplers for elliptic, generalised elliptic and rectangular elliptic
// Gaussian matrices, Monte Carlo estimators of normalised expected traces,
// and eigenvalue extraction.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freelab/freemoments.hpp"
#include "freelab/rng.hpp"
#include "freelab/spectrum.hpp"

namespace freelab {

enum class EnsembleKind { square_elliptic, generalized_elliptic, rectangular_elliptic };

/// Declarative description of a Gaussian elliptic ensemble.
///
/// Square ensembles are n x n; rectangular ones are p x n. For square
/// elliptic and rectangular ensembles `rho` is a constant profile; for the
/// generalised ensemble the pair (i, j) has correlation rho(|i - j| / n).
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::square_elliptic;
  int n = 1;
  int p = 0;
  RhoProfile rho = RhoProfile::constant(0.0);
  std::uint64_t seed = 0;

  static EnsembleSpec square_elliptic(int n, double rho, std::uint64_t seed = 0);
  static EnsembleSpec generalized_elliptic(int n, RhoProfile profile, std::uint64_t seed = 0);
  static EnsembleSpec rectangular_elliptic(int p, int n, double rho, std::uint64_t seed = 0);

  int rows() const noexcept { return kind == EnsembleKind::rectangular_elliptic ? p : n; }

  /// Throws DomainError if the spec breaks its invariants or exceeds the
  /// dimension cap.
  void validate(int max_dimension = 1200) const;
  std::string describe() const;
};

/// Mean and standard error of per-replicate normalised traces.
struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int reps = 0;
  int n = 0;
};

struct EstimatorOptions {
  int max_dimension = 1200;
  /// Worker threads for the replicate loop; 0 picks the hardware count.
  /// Results do not depend on this value.
  int threads = 0;
};

Matrix sample_elliptic(const EnsembleSpec& spec, Rng& rng);
Matrix sample_generalized_elliptic(const EnsembleSpec& spec, Rng& rng);
Matrix sample_rectangular_elliptic(const EnsembleSpec& spec, Rng& rng);

/// Draws replicate `replicate` of `spec` from the substream derived from
/// (spec.seed, replicate, stream). Unnormalised entries.
Matrix sample(const EnsembleSpec& spec, std::uint64_t replicate = 0, std::uint64_t stream = 0);

/// Estimates phi_n of the word evaluated at A/sqrt(n). Letter label t uses
/// an independent matrix drawn from `label_specs[t - 1]`.
MomentEstimate estimate_star_moment(std::span<const EnsembleSpec> label_specs, const StarWord& w,
                                    int reps, const EstimatorOptions& options = {});
MomentEstimate estimate_star_moment(const EnsembleSpec& spec, const StarWord& w, int reps,
                                    const EstimatorOptions& options = {});

/// Batch form: every word is evaluated on the same replicate matrices.
std::vector<MomentEstimate> estimate_star_moments(std::span<const EnsembleSpec> label_specs,
                                                  std::span<const StarWord> words, int reps,
                                                  const EstimatorOptions& options = {});

/// (1/p) Tr(Xbar^k) with Xbar = X X^T / n.
MomentEstimate estimate_wishart_moment(const EnsembleSpec& spec, int k, int reps,
                                       const EstimatorOptions& options = {});

/// (1/p) Tr(Xbar_{t1} ... Xbar_{tk}) with independent factors; factor label
/// t is drawn from `label_specs[t - 1]`.
MomentEstimate estimate_mixed_wishart_moment(std::span<const EnsembleSpec> label_specs,
                                             std::span<const int> labels, int reps,
                                             const EstimatorOptions& options = {});

/// phi_n(Abar^{x1} D1 Abar^{x2} D2 ... Abar^{xp} Dp) for concrete n x n
/// matrices D.
MomentEstimate estimate_mixed_moment_with_deterministic(const EnsembleSpec& spec,
                                                        const StarWord& w,
                                                        std::span<const Matrix> deterministic,
                                                        int reps,
                                                        const EstimatorOptions& options = {});

/// phi(product) = (1/n) Tr(product) over the given matrices; label t selects
/// `by_label[t - 1]`, star selects the transpose.
TraceOracle matrix_trace_oracle(std::vector<Matrix> by_label);

/// Product of the matrices named by `spec` (identity when empty).
Matrix evaluate_product(const ProductSpec& spec, std::span<const Matrix> by_label, int n);

/// All eigenvalues. The symmetric path uses a self-adjoint solver and
/// returns real eigenvalues. Five eigenpairs are checked for
/// |A v - lambda v| <= 1e-8 |A|; failures raise SolverError carrying `seed`.
SpectralSample compute_spectrum(const Matrix& m, bool symmetric,
                                std::optional<std::uint64_t> seed = std::nullopt);

/// Eigenvalues of Abar_1 ... Abar_k, factor i drawn from specs[i] with
/// Abar = A / sqrt(n). Needs k >= 2 square specs of equal n.
SpectralSample product_spectrum(std::span<const EnsembleSpec> specs, int max_dimension = 1200);

}  // namespace freelab
