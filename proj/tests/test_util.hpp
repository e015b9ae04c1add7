#pragma once

#include <random>
#include <vector>

#include "vlmc/estimators.hpp"
#include "vlmc/partition.hpp"
#include "vlmc/seqio.hpp"

namespace testutil {

inline vlmc::Sequence random_sequence(std::mt19937_64& rng, int n, int alpha) {
    vlmc::Sequence seq(static_cast<std::size_t>(n));
    for (auto& s : seq) s = static_cast<vlmc::Symbol>(rng() % static_cast<unsigned>(alpha));
    return seq;
}

/// Binary sequence from an order-1 chain with P(1|0)=p01, P(1|1)=p11.
inline vlmc::Sequence random_markov_sequence(std::mt19937_64& rng, int n, double p01, double p11) {
    vlmc::Sequence seq;
    seq.reserve(static_cast<std::size_t>(n));
    auto coin = [&](double p) {
        return (static_cast<double>(rng() >> 11) * 0x1.0p-53) < p ? vlmc::Symbol{1} : vlmc::Symbol{0};
    };
    seq.push_back(coin(0.5));
    for (int i = 1; i < n; ++i) seq.push_back(coin(seq.back() ? p11 : p01));
    return seq;
}

/// Every (sigma0, sigma1, sigma2) satisfying the partition conditions with
/// depth <= D, from the complete-tree enumeration.
inline std::vector<vlmc::JointPartition> enumerate_partitions(int alpha, int depth) {
    const auto trees = vlmc::enumerate_complete_trees(alpha, depth);
    std::vector<vlmc::JointPartition> out;
    for (const auto& tau1 : trees)
        for (const auto& tau2 : trees) {
            std::vector<vlmc::Context> common;
            for (const auto& s : tau1)
                if (tau2.count(s)) common.push_back(s);
            const std::size_t masks = std::size_t{1} << common.size();
            for (std::size_t mask = 0; mask < masks; ++mask) {
                vlmc::JointPartition part;
                for (std::size_t i = 0; i < common.size(); ++i)
                    if (mask & (std::size_t{1} << i)) part.sigma0.insert(common[i]);
                for (const auto& s : tau1)
                    if (!part.sigma0.count(s)) part.sigma1.insert(s);
                for (const auto& s : tau2)
                    if (!part.sigma0.count(s)) part.sigma2.insert(s);
                out.push_back(std::move(part));
            }
        }
    return out;
}

} // namespace testutil
