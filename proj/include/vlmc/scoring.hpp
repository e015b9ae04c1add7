#pragma once

#include <cstdint>
#include <span>

#include "vlmc/count_trie.hpp"
#include "vlmc/partition.hpp"

namespace vlmc {

// All likelihood-level quantities in one place, all in base-2 logs, with the
// conventions 0*log(0/p) = 0 and (0/n)^0 = 1 (empty products score 0).

/// Multiplier for the per-context penalty pen(k) = lambda * log2(k).
struct PenaltyConfig {
    double lambda = 1.0;

    /// Effective per-context penalty applied in the criterion for a sample of
    /// size k: ((|A|-1)/2) * lambda * log2(k).
    double beta(std::uint64_t k, int alphabet_size) const;
};

/// sum_a N(s,a) * log2(N(s,a) / N(s)); 0 for the all-zero vector.
double log_ml_term(std::span<const std::uint32_t> counts);

/// log_ml_term of the componentwise sum of the two count vectors.
double log_ml_pooled(std::span<const std::uint32_t> counts_x,
                     std::span<const std::uint32_t> counts_y);

/// Pseudo log-likelihood of a valid partition: per-context maximum-likelihood
/// terms from the first sample over sigma1, from the second over sigma2, and
/// pooled over sigma0.
double pseudo_log_likelihood(const JointPartition& part, const CountTrie& tx, const CountTrie& ty);

/// Penalized criterion: pseudo log-likelihood minus
/// |sigma0|*beta(n+m) + |sigma1|*beta(n) + |sigma2|*beta(m).
double criterion(const JointPartition& part, const CountTrie& tx, const CountTrie& ty,
                 const PenaltyConfig& pen);

/// log2 of the Krichevsky-Trofimov probability of a string with the given
/// symbol counts, computed in log-Gamma space. Equals the add-half sequential
/// predictor product.
double kt_log_prob(std::span<const std::uint32_t> counts);
double kt_log_prob_pooled(std::span<const std::uint32_t> counts_x,
                          std::span<const std::uint32_t> counts_y);

/// log2 KT probability of the pair of samples under a valid partition,
/// including the uniform boundary factors for positions preceding any
/// full-length context occurrence.
double kt_joint_log_prob(const JointPartition& part, const CountTrie& tx, const CountTrie& ty);

/// Slack of the KT-vs-likelihood code-length bound (right side minus left
/// side); non-negative on every input.
double lemma1_gap(const JointPartition& part, const CountTrie& tx, const CountTrie& ty);

} // namespace vlmc
