#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "vlmc/partition.hpp"
#include "vlmc/seqio.hpp"

namespace vlmc {

/// A complete context tree together with one distribution over the alphabet
/// per context: a stationary variable-length Markov source.
struct ProbabilisticContextTree {
    Alphabet alphabet;
    std::map<Context, std::vector<double>, ContextOrder> theta;

    int depth() const;

    /// Validates completeness/suffix-freeness of the tree and that every
    /// theta row is a distribution (within tol of summing to 1).
    static ProbabilisticContextTree create(Alphabet alphabet,
                                           std::map<Context, std::vector<double>, ContextOrder> theta,
                                           double tol = 1e-12);
};

/// The unique context of the model that is a suffix of `past` (oldest symbol
/// first). Requires |past| >= depth of the tree.
Context lookup_context(const ProbabilisticContextTree& model, const Context& past);

/// Finite-order Markov chain over length-`order` states equivalent to the
/// source, with its stationary distribution.
struct MarkovEmbedding {
    int order = 1;
    int alphabet_size = 0;
    std::size_t state_count = 0;
    std::vector<double> transition; // state-major, alphabet_size per state
    std::vector<double> pi;

    Context state_string(std::size_t idx) const;
    std::size_t state_index(const Context& s) const;
    std::size_t next_state(std::size_t idx, Symbol a) const;
};

/// Embeds the source as an order-max(1, depth) chain; `order` may request a
/// higher order. The stationary distribution is computed by damped power
/// iteration (dense solve fallback for small chains) and is exact-zero
/// outside the unique closed communicating class; more than one closed class
/// is an error.
MarkovEmbedding embed_markov(const ProbabilisticContextTree& model, int order = 0);

/// Draws the first depth symbols from the stationary distribution, then
/// iterates the per-context conditionals. Deterministic given the seed.
Sequence sample(const ProbabilisticContextTree& model, std::size_t n, std::uint64_t seed);

/// Reusable sampler: embedding and context index are built once.
class ModelSampler {
  public:
    explicit ModelSampler(const ProbabilisticContextTree& model);
    Sequence draw(std::size_t n, std::mt19937_64& rng) const;
    const MarkovEmbedding& embedding() const { return emb_; }

  private:
    int alpha_;
    int depth_;
    detail::ContextTrie index_;
    std::vector<std::vector<double>> theta_cum_; // per context, cumulative
    MarkovEmbedding emb_;
    std::vector<double> pi_cum_;
};

/// Kullback-Leibler divergence rate in bits per symbol between two sources on
/// the same alphabet: sum_w pi_p(w) KL(p(.|w) || q(.|w)) over pasts w of
/// length max(depth_p, depth_q, min_order). +infinity when q puts zero mass
/// where p does not, on a pi_p-positive state.
double kl_rate(const ProbabilisticContextTree& p, const ProbabilisticContextTree& q,
               int min_order = 0);

} // namespace vlmc
