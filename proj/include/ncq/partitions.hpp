#pragma once

// Set partitions and pair partitions of {1..m}, crossing sets and the
// q-weights built on them. Points are labelled 1..m throughout.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace ncq::partitions {

inline constexpr int kMaxPairPoints = 16;
inline constexpr int kMaxSetPoints = 10;
inline constexpr int kMaxMixedBlocks = 8;

/// Perfect matching of {1..m}. Blocks are stored smaller element first,
/// sorted by that element.
class PairPartition {
  public:
    PairPartition() = default;

    /// Validates that `blocks` is a perfect matching of {1..m}.
    static PairPartition from_blocks(int m,
                                     std::span<const std::pair<int, int>> blocks);
    /// partner[i-1] is the point matched with i.
    static PairPartition from_partners(std::span<const int> partner);

    int size() const { return m_; }
    int block_count() const { return m_ / 2; }
    int partner(int i) const { return partner_[static_cast<std::size_t>(i - 1)]; }
    std::vector<std::pair<int, int>> blocks() const;

    bool operator==(const PairPartition &) const = default;
    auto operator<=>(const PairPartition &) const = default;

  private:
    int m_ = 0;
    std::array<std::uint8_t, kMaxPairPoints> partner_{};
};

/// Set partition of {1..m}; blocks sorted internally and ordered by least
/// element.
struct Partition {
    int m = 0;
    std::vector<std::vector<int>> blocks;

    static Partition from_blocks(int m, std::vector<std::vector<int>> blocks);
    /// label[i-1] = block index of point i (0-based, first-occurrence order).
    std::vector<int> labels() const;

    bool operator==(const Partition &) const = default;
};

/// Crossing pairs (i,j), i<j: {i,l} and {r,j} are blocks with r<i<j<l.
using InversionSet = std::vector<std::pair<int, int>>;

std::uint64_t double_factorial(int n); // (n)!!, with (-1)!! = 0!! = 1
std::uint64_t bell_number(int n);

std::vector<PairPartition> enumerate_pair_partitions(int m,
                                                     int cap = kMaxPairPoints);
/// Visits pair partitions in the same canonical order without storing them.
void for_each_pair_partition(int m,
                             const std::function<void(const PairPartition &)> &f,
                             int cap = kMaxPairPoints);

std::vector<Partition> enumerate_partitions(int m, int cap = kMaxSetPoints);
void for_each_partition(int m, const std::function<void(const Partition &)> &f,
                        int cap = kMaxSetPoints);

InversionSet inversions(const PairPartition &sigma);
int crossing_count(const PairPartition &sigma);

/// q^{|I(sigma)|}, with 0^0 = 1.
double beta_q(const PairPartition &sigma, double q);

/// Average over block orderings gamma of the product over crossings of the
/// colour of the block ranked later by gamma. `q` gives one value per point;
/// nullopt when q is not constant on some block.
std::optional<double> t_mixed(const PairPartition &sigma, std::span<const double> q);

} // namespace ncq::partitions
