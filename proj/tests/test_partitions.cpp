#include <doctest.h>

#include <algorithm>
#include <set>

#include "ncq/errors.hpp"
#include "ncq/partitions.hpp"

using namespace ncq;
using namespace ncq::partitions;

namespace {

// Independent crossing test straight from the four-index pattern.
int brute_crossings(const PairPartition &s) {
    int c = 0;
    const int m = s.size();
    for (int r = 1; r <= m; ++r)
        for (int i = r + 1; i <= m; ++i)
            for (int j = i + 1; j <= m; ++j)
                for (int l = j + 1; l <= m; ++l)
                    if (s.partner(r) == j && s.partner(i) == l)
                        ++c;
    return c;
}

PairPartition make(int m, std::initializer_list<std::pair<int, int>> b) {
    std::vector<std::pair<int, int>> v(b);
    return PairPartition::from_blocks(m, v);
}

} // namespace

TEST_CASE("pair partition counts") {
    CHECK(enumerate_pair_partitions(2).size() == 1);
    CHECK(enumerate_pair_partitions(4).size() == 3);
    CHECK(enumerate_pair_partitions(6).size() == 15);
    CHECK_THROWS_AS(enumerate_pair_partitions(5), DomainError);
    CHECK_THROWS_AS(enumerate_pair_partitions(18), CapError);
    for (int m = 0; m <= 10; m += 2) {
        const auto all = enumerate_pair_partitions(m);
        CHECK(all.size() == double_factorial(m - 1));
        std::set<std::vector<std::pair<int, int>>> distinct;
        for (const auto &p : all) {
            std::vector<int> hits(static_cast<std::size_t>(m), 0);
            for (auto [a, b] : p.blocks()) {
                CHECK(a < b);
                ++hits[static_cast<std::size_t>(a - 1)];
                ++hits[static_cast<std::size_t>(b - 1)];
            }
            CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
            distinct.insert(p.blocks());
        }
        CHECK(distinct.size() == all.size());
        CHECK(std::is_sorted(all.begin(), all.end(), [](const auto &x, const auto &y) {
            return x.blocks() < y.blocks();
        }));
    }
}

TEST_CASE("set partition counts") {
    CHECK(enumerate_partitions(1).size() == 1);
    CHECK(enumerate_partitions(3).size() == 5);
    CHECK(enumerate_partitions(4).size() == 15);
    for (int m = 0; m <= 8; ++m)
        CHECK(enumerate_partitions(m).size() == bell_number(m));
    CHECK_THROWS_AS(enumerate_partitions(11), CapError);
    for (const auto &p : enumerate_partitions(5))
        for (std::size_t b = 1; b < p.blocks.size(); ++b)
            CHECK(p.blocks[b - 1].front() < p.blocks[b].front());
}

TEST_CASE("inversion sets") {
    CHECK(inversions(make(4, {{1, 2}, {3, 4}})).empty());
    const auto inv = inversions(make(4, {{1, 3}, {2, 4}}));
    REQUIRE(inv.size() == 1);
    CHECK(inv[0] == std::pair{2, 3});
    const auto s = make(6, {{1, 4}, {2, 6}, {3, 5}});
    CHECK(inversions(s).size() == 2);
    CHECK(brute_crossings(s) == 2);
}

TEST_CASE("crossing counts agree with brute force and reversal") {
    for (int m = 2; m <= 8; m += 2)
        for (const auto &s : enumerate_pair_partitions(m)) {
            const int c = crossing_count(s);
            CHECK(c == brute_crossings(s));
            CHECK(static_cast<int>(inversions(s).size()) == c);
            std::vector<int> rev(static_cast<std::size_t>(m));
            for (int i = 1; i <= m; ++i)
                rev[static_cast<std::size_t>(m - i)] = m + 1 - s.partner(i);
            CHECK(crossing_count(PairPartition::from_partners(rev)) == c);
        }
}

TEST_CASE("beta_q weights") {
    const auto nc = make(4, {{1, 2}, {3, 4}});
    const auto cr = make(4, {{1, 3}, {2, 4}});
    CHECK(beta_q(cr, 1.0) == 1.0);
    CHECK(beta_q(cr, -1.0) == -1.0);
    CHECK(beta_q(nc, 0.0) == 1.0);
    CHECK(beta_q(cr, 0.0) == 0.0);
}

TEST_CASE("t_mixed") {
    const auto cr = make(4, {{1, 3}, {2, 4}});
    const std::vector<double> q{0.3, -0.5, 0.3, -0.5};
    CHECK(*t_mixed(cr, q) == doctest::Approx((0.3 - 0.5) / 2).epsilon(1e-15));
    const std::vector<double> bad{0.3, -0.5, 0.2, -0.5};
    CHECK_FALSE(t_mixed(cr, bad).has_value());
    const auto nc = make(4, {{1, 4}, {2, 3}});
    const std::vector<double> qn{0.3, -0.5, -0.5, 0.3};
    CHECK(*t_mixed(nc, qn) == 1.0);
    for (int m = 2; m <= 8; m += 2)
        for (double qq : {-1.0, -0.3, 0.0, 0.5, 1.0}) {
            const std::vector<double> flat(static_cast<std::size_t>(m), qq);
            for (const auto &s : enumerate_pair_partitions(m))
                CHECK(std::abs(*t_mixed(s, flat) - beta_q(s, qq)) <= 1e-14);
        }
}

TEST_CASE("invalid pairings are rejected") {
    const std::vector<std::pair<int, int>> overlap{{1, 2}, {2, 3}};
    CHECK_THROWS_AS(PairPartition::from_blocks(4, overlap), DomainError);
    const std::vector<int> bad{2, 1, 4, 1};
    CHECK_THROWS_AS(PairPartition::from_partners(bad), DomainError);
}
