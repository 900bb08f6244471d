#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pointproc/errors.hpp"
#include "pointproc/report.hpp"

namespace pointproc {

// A set partition of {1,...,n} in canonical form: every block ascending,
// blocks ordered by smallest element. Immutable value type.
class Partition {
 public:
  // Restricted growth string: rgs[0] = 0, rgs[i] <= 1 + max(rgs[0..i-1]).
  // Element i+1 belongs to block rgs[i]; block labels appear in first-touch
  // order, which is exactly the canonical block order.
  static Partition from_rgs(std::span<const int> rgs) {
    Partition p;
    p.block_of_.assign(rgs.begin(), rgs.end());
    int max_label = -1;
    for (std::size_t i = 0; i < rgs.size(); ++i) {
      if (rgs[i] < 0 || rgs[i] > max_label + 1)
        throw BoundError("invalid restricted growth string");
      max_label = std::max(max_label, rgs[i]);
      if (rgs[i] == static_cast<int>(p.blocks_.size())) p.blocks_.emplace_back();
      p.blocks_[rgs[i]].push_back(static_cast<int>(i) + 1);
    }
    return p;
  }

  // Blocks given with 1-based elements, in any order; canonicalized here.
  static Partition from_blocks(int n, std::vector<std::vector<int>> blocks) {
    std::vector<int> rgs(n, -1);
    for (auto& b : blocks) std::sort(b.begin(), b.end());
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (std::size_t l = 0; l < blocks.size(); ++l) {
      if (blocks[l].empty()) throw BoundError("blocks must be nonempty");
      for (int e : blocks[l]) {
        if (e < 1 || e > n || rgs[e - 1] != -1)
          throw BoundError("blocks must partition {1,...,n}");
        rgs[e - 1] = static_cast<int>(l);
      }
    }
    for (int v : rgs)
      if (v == -1) throw BoundError("blocks must cover {1,...,n}");
    return from_rgs(rgs);
  }

  int n() const { return static_cast<int>(block_of_.size()); }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  // 0-based block index of 1-based element e.
  int block_of(int e) const { return block_of_[e - 1]; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  std::span<const int> rgs() const { return block_of_; }

  bool operator==(const Partition& o) const { return block_of_ == o.block_of_; }
  bool operator<(const Partition& o) const { return block_of_ < o.block_of_; }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t l = 0; l < blocks_.size(); ++l) {
      s += (l ? ",{" : "{");
      for (std::size_t i = 0; i < blocks_[l].size(); ++i)
        s += (i ? "," : "") + std::to_string(blocks_[l][i]);
      s += "}";
    }
    return s + "}";
  }

 private:
  std::vector<int> block_of_;  // the RGS; element i+1 -> block index
  std::vector<std::vector<int>> blocks_;
};

inline constexpr int kMaxEnumerationN = 12;
inline constexpr int kMaxCountN = 20;

// Visit T_n (or T_n^k when k is given) in lexicographic RGS order without
// materializing the set; B_12 has 4.2 million members.
template <class Visitor>
void for_each_partition(int n, int k, Visitor&& visit) {
  if (n < 1 || n > kMaxEnumerationN)
    throw BoundError("partition enumeration supports 1 <= n <= " +
                     std::to_string(kMaxEnumerationN) + ", got " + std::to_string(n));
  if (k != 0 && (k < 1 || k > n)) throw BoundError("k must satisfy 1 <= k <= n");
  std::vector<int> rgs(n, 0);
  std::vector<int> maxv(n, 0);  // maxv[i] = max(rgs[0..i-1])
  for (;;) {
    if (k == 0 || *std::max_element(rgs.begin(), rgs.end()) + 1 == k)
      visit(Partition::from_rgs(rgs));
    int i = n - 1;
    while (i > 0 && rgs[i] == maxv[i] + 1) --i;
    if (i == 0) break;
    ++rgs[i];
    for (int j = i + 1; j < n; ++j) {
      maxv[j] = std::max(maxv[j - 1], rgs[j - 1]);
      rgs[j] = 0;
    }
  }
}

// All of T_n (or T_n^k), collected.
inline std::vector<Partition> enumerate_partitions(int n, int k = 0) {
  std::vector<Partition> out;
  for_each_partition(n, k, [&](const Partition& p) { out.push_back(p); });
  return out;
}

// Bell number B_n, or Stirling number of the second kind S(n,k).
// Recurrence-based, independent of the enumerator above. Exact for n <= 20.
inline std::uint64_t partition_count(int n, int k = 0) {
  if (n < 1 || n > kMaxCountN)
    throw BoundError("partition_count supports 1 <= n <= " + std::to_string(kMaxCountN) +
                     " (larger n would overflow the 64-bit count)");
  if (k != 0) {
    if (k < 1 || k > n) throw BoundError("k must satisfy 1 <= k <= n");
    // S(i,j) = j S(i-1,j) + S(i-1,j-1), rolled in place from high j to low.
    std::vector<std::uint64_t> row(static_cast<std::size_t>(n) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= n; ++i) {
      for (int j = i; j >= 1; --j)
        row[j] = static_cast<std::uint64_t>(j) * row[j] + row[j - 1];
      row[0] = 0;
    }
    return row[k];
  }
  // Bell triangle; the last entry of the (n-1)-th row is B_n.
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.back();
}

// The map Xi: remove the top element n+1 from its block, dropping the block
// if that empties it.
inline Partition project_partition(const Partition& p) {
  if (p.n() < 2) throw BoundError("project_partition requires n >= 2");
  auto rgs = p.rgs();
  std::vector<int> head(rgs.begin(), rgs.end() - 1);
  const int dropped = rgs.back();
  bool label_survives = false;
  for (int v : head)
    if (v == dropped) { label_survives = true; break; }
  if (!label_survives)
    for (int& v : head)
      if (v > dropped) --v;
  return Partition::from_rgs(head);
}

// The fiber of project_partition over p: p with {n+1} appended as a new
// singleton, then p with n+1 merged into each block in turn.
inline std::vector<Partition> partition_fibers(const Partition& p) {
  std::vector<Partition> out;
  out.reserve(static_cast<std::size_t>(p.block_count()) + 1);
  std::vector<int> rgs(p.rgs().begin(), p.rgs().end());
  rgs.push_back(p.block_count());
  out.push_back(Partition::from_rgs(rgs));
  for (int l = 0; l < p.block_count(); ++l) {
    rgs.back() = l;
    out.push_back(Partition::from_rgs(rgs));
  }
  return out;
}

// Both sides of the fiber decomposition of a sum over T_{n+1}: the left side
// runs over T_{n+1}, the right side rebuilds it from T_n via the fibers.
inline IdentityReport check_partition_recursion(int n,
                                                const std::function<double(const Partition&)>& f,
                                                double rel_tol = 1e-12) {
  if (n < 1 || n > 8) throw BoundError("check_partition_recursion requires 1 <= n <= 8");
  double lhs = 0.0;
  for (const Partition& p : enumerate_partitions(n + 1)) lhs += f(p);
  double singleton_terms = 0.0, merge_terms = 0.0;
  for (const Partition& p : enumerate_partitions(n)) {
    const auto fiber = partition_fibers(p);
    singleton_terms += f(fiber.front());
    for (std::size_t l = 1; l < fiber.size(); ++l) merge_terms += f(fiber[l]);
  }
  IdentityReport r = IdentityReport::exact("partition-recursion", lhs,
                                           singleton_terms + merge_terms, rel_tol);
  r.terms.push_back({"append-singleton", singleton_terms, 0.0});
  r.terms.push_back({"block-merge", merge_terms, 0.0});
  return r;
}

}  // namespace pointproc
