#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "vlmc/count_trie.hpp"
#include "vlmc/partition.hpp"
#include "vlmc/scoring.hpp"

namespace vlmc {

/// Per-candidate-node scores of the bottom-up pass. vx/vy are the best
/// penalized single-tree scores of the subtree rooted at the node, vxy the
/// best joint score; chi_x/chi_y in {0,1} (keep as leaf / expand), chi_xy in
/// {1,2,3} (shared leaf / split sources / expand).
struct ScoreTable {
    struct Entry {
        Context context;
        double vx, vy, vxy;
        std::uint8_t chi_x, chi_y, chi_xy;
    };
    std::vector<Entry> entries; // canonical context order
};

/// Fitted conditional distribution per context; disengaged when the context
/// has zero counts and the empirical conditional is undefined.
using ThetaMap = std::map<Context, std::optional<std::vector<double>>, ContextOrder>;

struct SingleFit {
    ContextSet tree;
    ThetaMap theta;
    double score; // maximized penalized likelihood
};

struct EstimationResult {
    JointPartition partition;
    ThetaMap theta0, theta1, theta2;
    double score; // root value of the joint recursion
    std::optional<ScoreTable> scores;
};

/// Single-sample context-tree maximization: the complete tree of depth <= D
/// maximizing the penalized likelihood. Ties prefer the leaf, yielding the
/// minimal maximizer.
SingleFit fit_single(const CountTrie& trie, const PenaltyConfig& pen, int depth);

/// Joint estimation of (sigma0, sigma1, sigma2) over both samples by the
/// two-pass recursion: bottom-up scores, then top-down reconstruction.
EstimationResult fit_joint(const CountTrie& tx, const CountTrie& ty, const PenaltyConfig& pen,
                           int depth, bool keep_scores = false);

/// Exhaustive maximizer over all valid partitions of depth <= D, for
/// validation; feasible only for tiny depths.
EstimationResult oracle_fit_joint(const CountTrie& tx, const CountTrie& ty,
                                  const PenaltyConfig& pen, int depth);

/// All complete trees over the alphabet with depth <= D (enumeration guard
/// throws when the count explodes).
std::vector<ContextSet> enumerate_complete_trees(int alphabet_size, int depth);

} // namespace vlmc
