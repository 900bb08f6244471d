#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "pointproc/partitions.hpp"
#include "pointproc/rng.hpp"

using namespace pointproc;

namespace {

Partition P(int n, std::vector<std::vector<int>> blocks) {
  return Partition::from_blocks(n, std::move(blocks));
}

}  // namespace

TEST_CASE("enumeration fixtures") {
  const auto t1 = enumerate_partitions(1);
  REQUIRE(t1.size() == 1);
  CHECK(t1[0] == P(1, {{1}}));

  const auto t3 = enumerate_partitions(3);
  REQUIRE(t3.size() == 5);
  CHECK(t3[0] == P(3, {{1, 2, 3}}));
  CHECK(t3[1] == P(3, {{1, 2}, {3}}));
  CHECK(t3[2] == P(3, {{1, 3}, {2}}));
  CHECK(t3[3] == P(3, {{1}, {2, 3}}));
  CHECK(t3[4] == P(3, {{1}, {2}, {3}}));

  const auto t32 = enumerate_partitions(3, 2);
  REQUIRE(t32.size() == 3);
  CHECK(t32[0] == P(3, {{1, 2}, {3}}));
  CHECK(t32[1] == P(3, {{1, 3}, {2}}));
  CHECK(t32[2] == P(3, {{1}, {2, 3}}));
}

TEST_CASE("enumeration is canonical and duplicate free") {
  for (int n = 1; n <= 7; ++n) {
    const auto all = enumerate_partitions(n);
    std::set<Partition> seen(all.begin(), all.end());
    CHECK(seen.size() == all.size());
    for (const Partition& p : all) {
      CHECK(p.n() == n);
      int covered = 0;
      for (const auto& b : p.blocks()) {
        CHECK(!b.empty());
        CHECK(std::is_sorted(b.begin(), b.end()));
        covered += static_cast<int>(b.size());
      }
      CHECK(covered == n);
      for (std::size_t l = 1; l < p.blocks().size(); ++l)
        CHECK(p.blocks()[l - 1].front() < p.blocks()[l].front());
    }
  }
}

TEST_CASE("counts match recurrences") {
  CHECK(partition_count(1) == 1);
  CHECK(partition_count(4) == 15);
  CHECK(partition_count(4, 2) == 7);
  CHECK(partition_count(20) == 51724158235372ull);  // Bell(20)
  // Enumerator against the independent recurrences, per-k included.
  for (int n = 1; n <= 10; ++n) {
    CHECK(enumerate_partitions(n).size() == partition_count(n));
    std::uint64_t total = 0;
    for (int k = 1; k <= n; ++k) {
      CHECK(enumerate_partitions(n, k).size() == partition_count(n, k));
      total += partition_count(n, k);
    }
    CHECK(total == partition_count(n));
  }
}

TEST_CASE("bound errors") {
  CHECK_THROWS_AS(enumerate_partitions(0), BoundError);
  CHECK_THROWS_AS(enumerate_partitions(13), BoundError);
  CHECK_THROWS_AS(partition_count(21), BoundError);
  CHECK_THROWS_AS(partition_count(4, 5), BoundError);
}

TEST_CASE("streaming enumeration covers n = 12 without materializing") {
  std::uint64_t count = 0;
  for_each_partition(12, 0, [&](const Partition&) { ++count; });
  CHECK(count == partition_count(12));  // 4213597
  count = 0;
  for_each_partition(11, 4, [&](const Partition&) { ++count; });
  CHECK(count == partition_count(11, 4));
}

TEST_CASE("projection fixtures") {
  CHECK(project_partition(P(3, {{1, 3}, {2}})) == P(2, {{1}, {2}}));
  CHECK(project_partition(P(3, {{1, 2}, {3}})) == P(2, {{1, 2}}));
  CHECK(project_partition(P(3, {{1, 2, 3}})) == P(2, {{1, 2}}));
  CHECK_THROWS_AS(project_partition(P(1, {{1}})), BoundError);
}

TEST_CASE("fiber fixtures") {
  const auto f = partition_fibers(P(2, {{1}, {2}}));
  REQUIRE(f.size() == 3);
  CHECK(f[0] == P(3, {{1}, {2}, {3}}));
  CHECK(f[1] == P(3, {{1, 3}, {2}}));
  CHECK(f[2] == P(3, {{1}, {2, 3}}));

  const auto g = partition_fibers(P(2, {{1, 2}}));
  REQUIRE(g.size() == 2);
  CHECK(g[0] == P(3, {{1, 2}, {3}}));
  CHECK(g[1] == P(3, {{1, 2, 3}}));

  CHECK(partition_fibers(P(1, {{1}})).size() == 2);
}

TEST_CASE("fibers partition the next level") {
  for (int n = 1; n <= 7; ++n) {
    std::vector<Partition> rebuilt;
    for (const Partition& p : enumerate_partitions(n)) {
      const auto fiber = partition_fibers(p);
      CHECK(fiber.size() == static_cast<std::size_t>(p.block_count()) + 1);
      for (const Partition& q : fiber) {
        CHECK(project_partition(q) == p);
        rebuilt.push_back(q);
      }
    }
    auto expected = enumerate_partitions(n + 1);
    std::sort(rebuilt.begin(), rebuilt.end());
    std::sort(expected.begin(), expected.end());
    CHECK(rebuilt.size() == expected.size());
    CHECK(std::equal(rebuilt.begin(), rebuilt.end(), expected.begin()));
  }
}

TEST_CASE("recursion fixtures") {
  const auto ones = [](const Partition&) { return 1.0; };
  auto r = check_partition_recursion(2, ones);
  CHECK(r.pass);
  CHECK(r.lhs == doctest::Approx(5.0));
  CHECK(r.terms[0].value == doctest::Approx(2.0));
  CHECK(r.terms[1].value == doctest::Approx(3.0));

  r = check_partition_recursion(1, ones);
  CHECK(r.pass);
  CHECK(r.lhs == doctest::Approx(2.0));
  CHECK(r.terms[0].value == doctest::Approx(1.0));
  CHECK(r.terms[1].value == doctest::Approx(1.0));

  const auto blocks = [](const Partition& p) { return static_cast<double>(p.block_count()); };
  r = check_partition_recursion(3, blocks);
  CHECK(r.pass);
  // Independent tally over T_4.
  double direct = 0.0;
  for (const Partition& p : enumerate_partitions(4)) direct += p.block_count();
  CHECK(r.lhs == doctest::Approx(direct));
}

TEST_CASE("recursion holds for randomized functions") {
  // f drawn as a random table keyed by the canonical form.
  for (int n = 1; n <= 7; ++n) {
    const int reps = n <= 5 ? 250 : 60;
    for (int rep = 0; rep < reps; ++rep) {
      const std::uint64_t seed = 1000003ull * static_cast<std::uint64_t>(n) + rep;
      auto f = [seed](const Partition& p) {
        std::uint64_t h = seed;
        for (int v : p.rgs()) h = splitmix64(h += static_cast<std::uint64_t>(v) + 0x9E37ull);
        return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      };
      const auto r = check_partition_recursion(n, f, 1e-12);
      CHECK(r.pass);
    }
  }
}
