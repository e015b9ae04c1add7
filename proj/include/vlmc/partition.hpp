#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vlmc/seqio.hpp"

namespace vlmc {

/// Canonical context ordering: by length, then lexicographically by symbol
/// index. Keeps every set/map iteration and serialization deterministic.
struct ContextOrder {
    bool operator()(const Context& a, const Context& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

using ContextSet = std::set<Context, ContextOrder>;

/// (sigma0, sigma1, sigma2): shared, first-source-only and second-source-only
/// contexts. Valid when sigma0 is disjoint from sigma1 and sigma2 and both
/// sigma0 u sigma1 and sigma0 u sigma2 are complete suffix-free trees.
struct JointPartition {
    ContextSet sigma0, sigma1, sigma2;

    bool operator==(const JointPartition& o) const {
        return sigma0 == o.sigma0 && sigma1 == o.sigma1 && sigma2 == o.sigma2;
    }
};

struct PartitionViolation {
    std::string condition; // "T1", "T2" or "T3"
    std::string detail;
    Context where;
};

std::optional<PartitionViolation> validate_context_tree(const ContextSet& tree, int alphabet_size);
std::optional<PartitionViolation> validate_partition(const JointPartition& part, int alphabet_size);

/// Throws std::invalid_argument when the partition is not valid.
void require_valid(const JointPartition& part, int alphabet_size);

int tree_depth(const ContextSet& tree);

namespace detail {

/// Suffix-oriented trie over a set of contexts. The walk from the root
/// consumes past symbols from the most recent backwards, so a terminal node
/// reached along a past identifies the context that is a suffix of it.
class ContextTrie {
  public:
    explicit ContextTrie(int alphabet_size);

    /// Inserts a context with an integer payload. Returns false when the
    /// insertion breaks suffix-freeness (the context is a suffix of an
    /// existing one or vice versa, or is a duplicate).
    bool insert(const Context& s, std::int32_t payload);

    struct Incomplete {
        Context at;     // partial context of the offending internal node
        Symbol missing; // absent child symbol
    };
    /// First internal node lacking a child, if any. Empty trie counts as
    /// incomplete at the root.
    std::optional<Incomplete> find_incomplete() const;

    /// Payload of the unique context that is a suffix of `past` (symbols
    /// oldest-first), or -1 when the walk falls off the tree.
    std::int32_t match_suffix(std::span<const Symbol> past) const;
    std::int32_t match_suffix(const Context& past) const;

    std::size_t size() const { return inserted_; }

  private:
    struct Node {
        std::int32_t terminal = -1;
        std::vector<std::int32_t> kid;
    };
    int alpha_;
    std::size_t inserted_ = 0;
    std::vector<Node> nodes_;
};

} // namespace detail
} // namespace vlmc
