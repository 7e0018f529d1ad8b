#pragma once

// Pair partitions, non-crossing set partitions and the permutations built
// from them. All indices are 1-based: a partition of size n acts on
// {1, ..., n}.

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace freelab {

/// Size caps for the exhaustive enumerators. Callers may raise them.
struct EnumerationLimits {
  int max_pair_size = 16;     // all pair partitions, (2k-1)!! growth
  int max_nc_pair_size = 24;  // non-crossing pair partitions, Catalan growth
  int max_nc_size = 14;       // non-crossing set partitions
};

/// A bijection on {1, ..., size}.
class Permutation {
 public:
  /// `image[i - 1]` is the image of i. Throws DomainError unless `image` is
  /// a bijection on {1, ..., image.size()}.
  explicit Permutation(std::vector<int> image);

  static Permutation identity(int size);
  /// The full cycle i -> i + 1 (mod size).
  static Permutation full_cycle(int size);

  int size() const noexcept { return static_cast<int>(image_.size()); }
  int operator()(int i) const { return image_[static_cast<std::size_t>(i - 1)]; }
  const std::vector<int>& images() const noexcept { return image_; }

  /// Cycles, each starting at its smallest element, ordered by that element.
  std::vector<std::vector<int>> cycles() const;
  int cycle_count() const;
  /// Sorted cycle lengths.
  std::vector<int> cycle_type() const;

  /// Cycle notation such as "(14325)(6)". Elements are space separated when
  /// the size exceeds 9.
  std::string to_string() const;

  /// (a * b)(i) = a(b(i)).
  friend Permutation operator*(const Permutation& a, const Permutation& b);
  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> image_;
};

/// A perfect matching of {1, ..., 2k}, stored as its fixed-point-free
/// involution.
class PairPartition {
 public:
  /// `mates[i - 1]` is the partner of i. Throws DomainError unless this is
  /// a fixed-point-free involution.
  static PairPartition from_mates(std::vector<int> mates);
  /// Builds from explicit pairs; every index in {1, ..., 2 * pairs.size()}
  /// must occur exactly once.
  static PairPartition from_pairs(std::span<const std::pair<int, int>> pairs);
  static PairPartition from_pairs(std::initializer_list<std::pair<int, int>> pairs);

  int size() const noexcept { return static_cast<int>(mate_.size()); }
  int pair_count() const noexcept { return size() / 2; }
  int mate(int i) const { return mate_[static_cast<std::size_t>(i - 1)]; }
  const std::vector<int>& mates() const noexcept { return mate_; }

  /// Pairs (r, s) with r < s, ordered by r.
  std::vector<std::pair<int, int>> pairs() const;
  /// The matching viewed as a permutation (product of transpositions).
  Permutation as_permutation() const { return Permutation(mate_); }

  /// "(13)(24)(56)"; elements space separated when the size exceeds 9.
  std::string to_string() const;

  friend bool operator==(const PairPartition&, const PairPartition&) = default;
  friend auto operator<=>(const PairPartition&, const PairPartition&) = default;

 private:
  explicit PairPartition(std::vector<int> mates) : mate_(std::move(mates)) {}
  std::vector<int> mate_;
};

/// A partition of {1, ..., size} in canonical form: blocks ordered by their
/// smallest element, elements ascending inside each block.
class SetPartition {
 public:
  /// Canonicalises `blocks`. Throws DomainError if they are not disjoint,
  /// contain an empty block, or do not cover {1, ..., size}.
  SetPartition(int size, std::vector<std::vector<int>> blocks);
  /// Block assignment form: `block_of[i - 1]` is an arbitrary block id of i.
  static SetPartition from_block_labels(std::span<const int> block_of);

  int size() const noexcept { return size_; }
  int block_count() const noexcept { return static_cast<int>(blocks_.size()); }
  const std::vector<std::vector<int>>& blocks() const noexcept { return blocks_; }

  std::string to_string() const;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;

 private:
  int size_;
  std::vector<std::vector<int>> blocks_;
};

/// True iff there are no a < b < c < d with a, c in one block and b, d in
/// another.
bool is_noncrossing(const PairPartition& p);
bool is_noncrossing(const SetPartition& p);

/// All pair partitions of {1, ..., two_k}, each exactly once, in
/// lexicographic order of (mate(1), ..., mate(two_k)).
std::vector<PairPartition> enumerate_pair_partitions(
    int two_k, const EnumerationLimits& limits = {});

/// The non-crossing pair partitions of {1, ..., two_k}, in the same order as
/// enumerate_pair_partitions.
std::vector<PairPartition> enumerate_nc_pair_partitions(
    int two_k, const EnumerationLimits& limits = {});

/// Calls `visit` once per non-crossing partition of {1, ..., n}. The span
/// holds block labels: `block_of[i - 1]` is the 0-based block index of i,
/// blocks numbered in order of their smallest element. The span is only
/// valid during the call.
void for_each_nc_partition(int n,
                           const std::function<void(std::span<const int>)>& visit,
                           const EnumerationLimits& limits = {});

/// All non-crossing partitions of {1, ..., n}.
std::vector<SetPartition> enumerate_nc_partitions(
    int n, const EnumerationLimits& limits = {});

/// r -> gamma(pi(r)) with gamma the full cycle on {1, ..., 2k}.
Permutation gamma_pi(const PairPartition& p);
/// r -> pi(gamma(r)).
Permutation pi_gamma(const PairPartition& p);

long long double_factorial_odd(int two_k);  // (two_k - 1)!!
long long catalan(int k);

}  // namespace freelab
