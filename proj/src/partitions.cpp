#include "ncq/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ncq/errors.hpp"

namespace ncq::partitions {

namespace {

void check_pair_size(int m, int cap) {
    if (m < 0 || m % 2 != 0)
        throw DomainError("pair partitions need an even point count, got " +
                          std::to_string(m));
    if (m > cap || m > kMaxPairPoints)
        throw CapError("pair partition size " + std::to_string(m) +
                       " exceeds cap " + std::to_string(std::min(cap, kMaxPairPoints)));
}

void pair_rec(std::array<int, kMaxPairPoints> &partner, int m,
              const std::function<void(const PairPartition &)> &f) {
    int a = 0;
    while (a < m && partner[static_cast<std::size_t>(a)] != 0)
        ++a;
    if (a == m) {
        f(PairPartition::from_partners(
            std::span<const int>(partner.data(), static_cast<std::size_t>(m))));
        return;
    }
    for (int b = a + 1; b < m; ++b) {
        if (partner[static_cast<std::size_t>(b)] != 0)
            continue;
        partner[static_cast<std::size_t>(a)] = b + 1;
        partner[static_cast<std::size_t>(b)] = a + 1;
        pair_rec(partner, m, f);
        partner[static_cast<std::size_t>(a)] = 0;
        partner[static_cast<std::size_t>(b)] = 0;
    }
}

} // namespace

PairPartition PairPartition::from_partners(std::span<const int> partner) {
    const int m = static_cast<int>(partner.size());
    check_pair_size(m, kMaxPairPoints);
    PairPartition p;
    p.m_ = m;
    for (int i = 1; i <= m; ++i) {
        const int j = partner[static_cast<std::size_t>(i - 1)];
        if (j < 1 || j > m || j == i || partner[static_cast<std::size_t>(j - 1)] != i)
            throw DomainError("invalid pairing at point " + std::to_string(i));
        p.partner_[static_cast<std::size_t>(i - 1)] = static_cast<std::uint8_t>(j);
    }
    return p;
}

PairPartition PairPartition::from_blocks(int m,
                                         std::span<const std::pair<int, int>> blocks) {
    check_pair_size(m, kMaxPairPoints);
    if (static_cast<int>(blocks.size()) * 2 != m)
        throw DomainError("pair partition needs m/2 blocks");
    std::vector<int> partner(static_cast<std::size_t>(m), 0);
    for (auto [a, b] : blocks) {
        if (a < 1 || b < 1 || a > m || b > m || a == b)
            throw DomainError("pair block out of range");
        if (partner[static_cast<std::size_t>(a - 1)] != 0 ||
            partner[static_cast<std::size_t>(b - 1)] != 0)
            throw DomainError("pair blocks overlap");
        partner[static_cast<std::size_t>(a - 1)] = b;
        partner[static_cast<std::size_t>(b - 1)] = a;
    }
    return from_partners(partner);
}

std::vector<std::pair<int, int>> PairPartition::blocks() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(m_ / 2));
    for (int i = 1; i <= m_; ++i)
        if (partner(i) > i)
            out.emplace_back(i, partner(i));
    return out;
}

Partition Partition::from_blocks(int m, std::vector<std::vector<int>> blocks) {
    if (m < 0)
        throw DomainError("negative partition size");
    std::vector<int> seen(static_cast<std::size_t>(m), 0);
    for (auto &b : blocks) {
        if (b.empty())
            throw DomainError("empty block");
        std::sort(b.begin(), b.end());
        for (int i : b) {
            if (i < 1 || i > m || seen[static_cast<std::size_t>(i - 1)]++)
                throw DomainError("blocks must be a disjoint cover of 1..m");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw DomainError("blocks must cover 1..m");
    std::sort(blocks.begin(), blocks.end(),
              [](const auto &x, const auto &y) { return x.front() < y.front(); });
    return Partition{m, std::move(blocks)};
}

std::vector<int> Partition::labels() const {
    std::vector<int> out(static_cast<std::size_t>(m), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int i : blocks[b])
            out[static_cast<std::size_t>(i - 1)] = static_cast<int>(b);
    return out;
}

std::uint64_t double_factorial(int n) {
    std::uint64_t r = 1;
    for (int k = n; k > 1; k -= 2)
        r *= static_cast<std::uint64_t>(k);
    return r;
}

std::uint64_t bell_number(int n) {
    if (n < 0 || n > 25)
        throw DomainError("bell_number: n out of range");
    // Bell triangle.
    std::vector<std::uint64_t> row{1};
    for (int i = 0; i < n; ++i) {
        std::vector<std::uint64_t> next{row.back()};
        for (auto v : row)
            next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

void for_each_pair_partition(int m,
                             const std::function<void(const PairPartition &)> &f,
                             int cap) {
    check_pair_size(m, cap);
    if (m == 0) {
        f(PairPartition::from_partners({}));
        return;
    }
    std::array<int, kMaxPairPoints> partner{};
    pair_rec(partner, m, f);
}

std::vector<PairPartition> enumerate_pair_partitions(int m, int cap) {
    check_pair_size(m, cap);
    std::vector<PairPartition> out;
    out.reserve(double_factorial(m - 1));
    for_each_pair_partition(m, [&](const PairPartition &p) { out.push_back(p); }, cap);
    return out;
}

void for_each_partition(int m, const std::function<void(const Partition &)> &f,
                        int cap) {
    if (m < 0)
        throw DomainError("negative partition size");
    if (m > cap || m > kMaxSetPoints)
        throw CapError("set partition size " + std::to_string(m) +
                       " exceeds cap " + std::to_string(std::min(cap, kMaxSetPoints)));
    // Restricted growth strings enumerate partitions ordered by least element.
    std::vector<int> rgs(static_cast<std::size_t>(m), 0);
    auto emit = [&] {
        Partition p;
        p.m = m;
        for (int i = 0; i < m; ++i) {
            const auto b = static_cast<std::size_t>(rgs[static_cast<std::size_t>(i)]);
            if (b == p.blocks.size())
                p.blocks.emplace_back();
            p.blocks[b].push_back(i + 1);
        }
        f(p);
    };
    std::function<void(int, int)> rec = [&](int i, int used) {
        if (i == m) {
            emit();
            return;
        }
        for (int b = 0; b <= used; ++b) {
            rgs[static_cast<std::size_t>(i)] = b;
            rec(i + 1, std::max(used, b + 1));
        }
    };
    if (m == 0)
        emit();
    else {
        rgs[0] = 0;
        rec(1, 1);
    }
}

std::vector<Partition> enumerate_partitions(int m, int cap) {
    std::vector<Partition> out;
    for_each_partition(m, [&](const Partition &p) { out.push_back(p); }, cap);
    return out;
}

InversionSet inversions(const PairPartition &sigma) {
    InversionSet out;
    const auto bl = sigma.blocks();
    for (std::size_t s = 0; s < bl.size(); ++s)
        for (std::size_t t = s + 1; t < bl.size(); ++t) {
            auto [a, b] = bl[s];
            auto [c, d] = bl[t];
            // Blocks are sorted by left endpoint, so a < c.
            if (c < b && b < d)
                out.emplace_back(c, b);
        }
    std::sort(out.begin(), out.end());
    return out;
}

int crossing_count(const PairPartition &sigma) {
    int count = 0;
    const int m = sigma.size();
    for (int a = 1; a <= m; ++a) {
        const int b = sigma.partner(a);
        if (b < a)
            continue;
        for (int c = a + 1; c < b; ++c) {
            const int d = sigma.partner(c);
            if (d > b)
                ++count;
        }
    }
    return count;
}

double beta_q(const PairPartition &sigma, double q) {
    const int k = crossing_count(sigma);
    return k == 0 ? 1.0 : std::pow(q, k);
}

std::optional<double> t_mixed(const PairPartition &sigma, std::span<const double> q) {
    const int m = sigma.size();
    if (static_cast<int>(q.size()) != m)
        throw DomainError("t_mixed: need one colour per point");
    const int p = sigma.block_count();
    if (p > kMaxMixedBlocks)
        throw CapError("t_mixed: more than " + std::to_string(kMaxMixedBlocks) +
                       " blocks");
    const auto bl = sigma.blocks();
    std::vector<double> colour(static_cast<std::size_t>(p));
    for (int s = 0; s < p; ++s) {
        auto [a, b] = bl[static_cast<std::size_t>(s)];
        if (q[static_cast<std::size_t>(a - 1)] != q[static_cast<std::size_t>(b - 1)])
            return std::nullopt;
        colour[static_cast<std::size_t>(s)] = q[static_cast<std::size_t>(a - 1)];
    }
    std::vector<std::pair<int, int>> crossing_blocks;
    for (int s = 0; s < p; ++s)
        for (int t = s + 1; t < p; ++t) {
            const int b = bl[static_cast<std::size_t>(s)].second;
            auto [c, d] = bl[static_cast<std::size_t>(t)];
            if (c < b && b < d)
                crossing_blocks.emplace_back(s, t);
        }
    if (crossing_blocks.empty())
        return 1.0;

    std::vector<int> rank(static_cast<std::size_t>(p));
    std::iota(rank.begin(), rank.end(), 0);
    double total = 0;
    std::uint64_t count = 0;
    do {
        double prod = 1;
        for (auto [s, t] : crossing_blocks) {
            const int later = rank[static_cast<std::size_t>(s)] > rank[static_cast<std::size_t>(t)] ? s : t;
            prod *= colour[static_cast<std::size_t>(later)];
        }
        total += prod;
        ++count;
    } while (std::next_permutation(rank.begin(), rank.end()));
    return total / static_cast<double>(count);
}

} // namespace ncq::partitions
