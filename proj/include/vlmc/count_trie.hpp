#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vlmc/seqio.hpp"

namespace vlmc {

/// Transition counts N(s, a) for every context s observed in one sequence, up
/// to a depth bound. Nodes are materialized lazily: a node exists only if its
/// context occurred at least once as a past; absent nodes behave as all-zero.
///
/// Orientation: the child of node v along edge a is the context av, i.e. the
/// edge symbol is the next-older past symbol. The root is the empty context.
class CountTrie {
  public:
    CountTrie(const Sequence& seq, int alphabet_size, int depth_bound);

    int alphabet_size() const { return alpha_; }
    int depth_bound() const { return depth_bound_; }
    std::uint64_t seq_length() const { return n_; }
    std::size_t node_count() const { return kids_.size() / alpha_; }

    std::int32_t root() const { return 0; }
    std::int32_t child(std::int32_t node, Symbol a) const {
        return kids_[static_cast<std::size_t>(node) * alpha_ + a];
    }
    int depth(std::int32_t node) const { return depth_[node]; }

    /// (N(s,a))_a for the node's context.
    std::span<const std::uint32_t> counts(std::int32_t node) const {
        return {counts_.data() + static_cast<std::size_t>(node) * alpha_,
                static_cast<std::size_t>(alpha_)};
    }
    /// N(s) for the node's context.
    std::uint64_t total(std::int32_t node) const;

    /// Node for context s, or -1 when s never occurred. Throws std::out_of_range
    /// when |s| exceeds the depth bound.
    std::int32_t find(const Context& s) const;

    /// (N(s,a))_a, all zeros when s never occurred.
    std::vector<std::uint32_t> counts_of(const Context& s) const;

  private:
    std::int32_t ensure_child(std::int32_t node, Symbol a);

    int alpha_ = 0;
    int depth_bound_ = 0;
    std::uint64_t n_ = 0;
    std::vector<std::uint32_t> counts_; // node-major, alpha_ per node
    std::vector<std::int32_t> kids_;    // node-major, alpha_ per node, -1 = absent
    std::vector<std::int32_t> depth_;
};

/// Depth bound used when none is requested: n v m - 1 as allowed by the
/// criterion's support, capped at 24 to keep the candidate set small.
int default_depth_bound(std::uint64_t n, std::uint64_t m);

} // namespace vlmc
