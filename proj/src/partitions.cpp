#include "freelab/partitions.hpp"

#include <algorithm>
#include <numeric>

#include "freelab/errors.hpp"

namespace freelab {

namespace {

std::string join_cycle(std::span<const int> elems, bool spaced) {
  std::string out = "(";
  for (std::size_t i = 0; i < elems.size(); ++i) {
    if (spaced && i > 0) out += ' ';
    out += std::to_string(elems[i]);
  }
  out += ')';
  return out;
}

void check_pair_size(int two_k, int cap, const char* what) {
  if (two_k <= 0 || two_k % 2 != 0) {
    throw DomainError(std::string(what) + ": size must be a positive even integer, got " +
                      std::to_string(two_k));
  }
  if (two_k > cap) throw EnumerationLimitError(what, two_k, cap);
}

// Extends `mate` by matching the smallest unmatched index. With `nc_only`,
// only partners that keep the matching non-crossing are tried.
void extend_matching(std::vector<int>& mate, bool nc_only,
                     std::vector<PairPartition>& out) {
  const int n = static_cast<int>(mate.size());
  int i = 0;
  while (i < n && mate[static_cast<std::size_t>(i)] != 0) ++i;
  if (i == n) {
    out.push_back(PairPartition::from_mates(mate));
    return;
  }
  for (int j = i + 1; j < n; ++j) {
    if (mate[static_cast<std::size_t>(j)] != 0) {
      // Everything matched beyond i is matched to an index below i, so
      // pairing i past j would cross.
      if (nc_only) break;
      continue;
    }
    if (nc_only && (j - i - 1) % 2 != 0) continue;
    mate[static_cast<std::size_t>(i)] = j + 1;
    mate[static_cast<std::size_t>(j)] = i + 1;
    extend_matching(mate, nc_only, out);
    mate[static_cast<std::size_t>(i)] = 0;
    mate[static_cast<std::size_t>(j)] = 0;
  }
}

void visit_nc(int next, int n, std::vector<int>& block_of, std::vector<int> open,
              int block_count, const std::function<void(std::span<const int>)>& visit) {
  if (next == n) {
    visit(std::span<const int>(block_of));
    return;
  }
  // Open a new block.
  block_of[static_cast<std::size_t>(next)] = block_count;
  {
    auto pushed = open;
    pushed.push_back(block_count);
    visit_nc(next + 1, n, block_of, std::move(pushed), block_count + 1, visit);
  }
  // Join an open block; every block opened after it is closed for good.
  for (std::size_t depth = open.size(); depth-- > 0;) {
    block_of[static_cast<std::size_t>(next)] = open[depth];
    std::vector<int> kept(open.begin(), open.begin() + static_cast<std::ptrdiff_t>(depth) + 1);
    visit_nc(next + 1, n, block_of, std::move(kept), block_count, visit);
  }
}

}  // namespace

// ---------------------------------------------------------------- Permutation

Permutation::Permutation(std::vector<int> image) : image_(std::move(image)) {
  const int n = static_cast<int>(image_.size());
  if (n == 0) throw DomainError("permutation must have positive size");
  std::vector<bool> seen(image_.size(), false);
  for (int v : image_) {
    if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)]) {
      throw DomainError("permutation image is not a bijection on {1,...," +
                        std::to_string(n) + "}");
    }
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
}

Permutation Permutation::identity(int size) {
  if (size < 1) throw DomainError("permutation must have positive size");
  std::vector<int> image(static_cast<std::size_t>(size));
  std::iota(image.begin(), image.end(), 1);
  return Permutation(std::move(image));
}

Permutation Permutation::full_cycle(int size) {
  if (size < 1) throw DomainError("permutation must have positive size");
  std::vector<int> image(static_cast<std::size_t>(size));
  for (int i = 1; i <= size; ++i) image[static_cast<std::size_t>(i - 1)] = i % size + 1;
  return Permutation(std::move(image));
}

std::vector<std::vector<int>> Permutation::cycles() const {
  std::vector<std::vector<int>> out;
  std::vector<bool> seen(image_.size(), false);
  for (int start = 1; start <= size(); ++start) {
    if (seen[static_cast<std::size_t>(start - 1)]) continue;
    std::vector<int> cycle;
    for (int i = start; !seen[static_cast<std::size_t>(i - 1)]; i = (*this)(i)) {
      seen[static_cast<std::size_t>(i - 1)] = true;
      cycle.push_back(i);
    }
    out.push_back(std::move(cycle));
  }
  return out;
}

int Permutation::cycle_count() const { return static_cast<int>(cycles().size()); }

std::vector<int> Permutation::cycle_type() const {
  std::vector<int> lengths;
  for (const auto& c : cycles()) lengths.push_back(static_cast<int>(c.size()));
  std::sort(lengths.begin(), lengths.end());
  return lengths;
}

std::string Permutation::to_string() const {
  std::string out;
  for (const auto& c : cycles()) out += join_cycle(c, size() > 9);
  return out;
}

Permutation operator*(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw DomainError("cannot compose permutations of different sizes");
  std::vector<int> image(static_cast<std::size_t>(a.size()));
  for (int i = 1; i <= a.size(); ++i) image[static_cast<std::size_t>(i - 1)] = a(b(i));
  return Permutation(std::move(image));
}

// -------------------------------------------------------------- PairPartition

PairPartition PairPartition::from_mates(std::vector<int> mates) {
  const int n = static_cast<int>(mates.size());
  if (n == 0 || n % 2 != 0) {
    throw DomainError("pair partition must have positive even size, got " + std::to_string(n));
  }
  for (int i = 1; i <= n; ++i) {
    const int j = mates[static_cast<std::size_t>(i - 1)];
    if (j < 1 || j > n || j == i || mates[static_cast<std::size_t>(j - 1)] != i) {
      throw DomainError("mate map is not a fixed-point-free involution at index " +
                        std::to_string(i));
    }
  }
  return PairPartition(std::move(mates));
}

PairPartition PairPartition::from_pairs(std::span<const std::pair<int, int>> pairs) {
  const int n = 2 * static_cast<int>(pairs.size());
  std::vector<int> mates(static_cast<std::size_t>(n), 0);
  for (auto [r, s] : pairs) {
    if (r < 1 || r > n || s < 1 || s > n || r == s || mates[static_cast<std::size_t>(r - 1)] ||
        mates[static_cast<std::size_t>(s - 1)]) {
      throw DomainError("invalid pair (" + std::to_string(r) + "," + std::to_string(s) +
                        ") in pair partition of size " + std::to_string(n));
    }
    mates[static_cast<std::size_t>(r - 1)] = s;
    mates[static_cast<std::size_t>(s - 1)] = r;
  }
  return from_mates(std::move(mates));
}

PairPartition PairPartition::from_pairs(std::initializer_list<std::pair<int, int>> pairs) {
  return from_pairs(std::span<const std::pair<int, int>>(pairs.begin(), pairs.size()));
}

std::vector<std::pair<int, int>> PairPartition::pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(mate_.size() / 2);
  for (int r = 1; r <= size(); ++r) {
    if (mate(r) > r) out.emplace_back(r, mate(r));
  }
  return out;
}

std::string PairPartition::to_string() const {
  std::string out;
  for (auto [r, s] : pairs()) {
    const int both[2] = {r, s};
    out += join_cycle(both, size() > 9);
  }
  return out;
}

// --------------------------------------------------------------- SetPartition

SetPartition::SetPartition(int size, std::vector<std::vector<int>> blocks)
    : size_(size), blocks_(std::move(blocks)) {
  if (size_ < 1) throw DomainError("set partition must have positive size");
  std::vector<bool> seen(static_cast<std::size_t>(size_), false);
  int covered = 0;
  for (auto& b : blocks_) {
    if (b.empty()) throw DomainError("set partition has an empty block");
    std::sort(b.begin(), b.end());
    for (int v : b) {
      if (v < 1 || v > size_ || seen[static_cast<std::size_t>(v - 1)]) {
        throw DomainError("set partition blocks are not disjoint subsets of {1,...," +
                          std::to_string(size_) + "}");
      }
      seen[static_cast<std::size_t>(v - 1)] = true;
      ++covered;
    }
  }
  if (covered != size_) throw DomainError("set partition blocks do not cover every index");
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

SetPartition SetPartition::from_block_labels(std::span<const int> block_of) {
  std::vector<std::vector<int>> blocks;
  std::vector<std::pair<int, std::size_t>> label_slot;
  for (std::size_t i = 0; i < block_of.size(); ++i) {
    auto it = std::find_if(label_slot.begin(), label_slot.end(),
                           [&](const auto& ls) { return ls.first == block_of[i]; });
    if (it == label_slot.end()) {
      label_slot.emplace_back(block_of[i], blocks.size());
      blocks.emplace_back();
      blocks.back().push_back(static_cast<int>(i + 1));
    } else {
      blocks[it->second].push_back(static_cast<int>(i + 1));
    }
  }
  return SetPartition(static_cast<int>(block_of.size()), std::move(blocks));
}

std::string SetPartition::to_string() const {
  std::string out;
  for (const auto& b : blocks_) out += join_cycle(b, size_ > 9);
  return out;
}

// ------------------------------------------------------------------ crossings

bool is_noncrossing(const PairPartition& p) {
  const auto pairs = p.pairs();
  for (std::size_t x = 0; x < pairs.size(); ++x) {
    for (std::size_t y = x + 1; y < pairs.size(); ++y) {
      auto [a, c] = pairs[x];
      auto [b, d] = pairs[y];
      if ((a < b && b < c && c < d) || (b < a && a < d && d < c)) return false;
    }
  }
  return true;
}

bool is_noncrossing(const SetPartition& p) {
  std::vector<int> block_of(static_cast<std::size_t>(p.size()));
  for (std::size_t b = 0; b < p.blocks().size(); ++b) {
    for (int v : p.blocks()[b]) block_of[static_cast<std::size_t>(v - 1)] = static_cast<int>(b);
  }
  // a < b < c < d with a, c in one block and b, d in another.
  const int n = p.size();
  for (int a = 1; a <= n; ++a) {
    for (int b = a + 1; b <= n; ++b) {
      const int ba = block_of[static_cast<std::size_t>(a - 1)];
      const int bb = block_of[static_cast<std::size_t>(b - 1)];
      if (ba == bb) continue;
      for (int c = b + 1; c <= n; ++c) {
        if (block_of[static_cast<std::size_t>(c - 1)] != ba) continue;
        for (int d = c + 1; d <= n; ++d) {
          if (block_of[static_cast<std::size_t>(d - 1)] == bb) return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------- enumerators

std::vector<PairPartition> enumerate_pair_partitions(int two_k, const EnumerationLimits& limits) {
  check_pair_size(two_k, limits.max_pair_size, "enumerate_pair_partitions");
  std::vector<PairPartition> out;
  out.reserve(static_cast<std::size_t>(double_factorial_odd(two_k)));
  std::vector<int> mate(static_cast<std::size_t>(two_k), 0);
  extend_matching(mate, false, out);
  return out;
}

std::vector<PairPartition> enumerate_nc_pair_partitions(int two_k,
                                                        const EnumerationLimits& limits) {
  check_pair_size(two_k, limits.max_nc_pair_size, "enumerate_nc_pair_partitions");
  std::vector<PairPartition> out;
  out.reserve(static_cast<std::size_t>(catalan(two_k / 2)));
  std::vector<int> mate(static_cast<std::size_t>(two_k), 0);
  extend_matching(mate, true, out);
  return out;
}

void for_each_nc_partition(int n, const std::function<void(std::span<const int>)>& visit,
                           const EnumerationLimits& limits) {
  if (n < 1) throw DomainError("non-crossing partitions need n >= 1, got " + std::to_string(n));
  if (n > limits.max_nc_size) throw EnumerationLimitError("enumerate_nc_partitions", n, limits.max_nc_size);
  std::vector<int> block_of(static_cast<std::size_t>(n), 0);
  visit_nc(0, n, block_of, {}, 0, visit);
}

std::vector<SetPartition> enumerate_nc_partitions(int n, const EnumerationLimits& limits) {
  std::vector<SetPartition> out;
  for_each_nc_partition(
      n, [&](std::span<const int> labels) { out.push_back(SetPartition::from_block_labels(labels)); },
      limits);
  return out;
}

// -------------------------------------------------------------- gamma and pi

Permutation gamma_pi(const PairPartition& p) {
  return Permutation::full_cycle(p.size()) * p.as_permutation();
}

Permutation pi_gamma(const PairPartition& p) {
  return p.as_permutation() * Permutation::full_cycle(p.size());
}

long long double_factorial_odd(int two_k) {
  long long out = 1;
  for (int m = two_k - 1; m > 1; m -= 2) out *= m;
  return out;
}

long long catalan(int k) {
  // C(k+1) = C(k) * 2(2k+1) / (k+2), exact in integers at every step.
  long long c = 1;
  for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

}  // namespace freelab
