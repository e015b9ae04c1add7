#include "vlmc/scoring.hpp"

#include <cmath>
#include <stdexcept>

namespace vlmc {

namespace {

const double kLn2 = std::log(2.0);

void require_same_alphabet(const CountTrie& tx, const CountTrie& ty) {
    if (tx.alphabet_size() != ty.alphabet_size())
        throw std::invalid_argument("count tries built over different alphabets");
}

} // namespace

double PenaltyConfig::beta(std::uint64_t k, int alphabet_size) const {
    if (lambda <= 0.0)
        throw std::invalid_argument("penalty multiplier must be positive");
    if (k == 0)
        throw std::invalid_argument("penalty argument must be >= 1");
    return 0.5 * (alphabet_size - 1) * lambda * std::log2(static_cast<double>(k));
}

double log_ml_term(std::span<const std::uint32_t> counts) {
    std::uint64_t total = 0;
    for (std::uint32_t c : counts) total += c;
    if (total == 0) return 0.0;
    const double lt = std::log2(static_cast<double>(total));
    double ll = 0.0;
    for (std::uint32_t c : counts)
        if (c > 0) ll += static_cast<double>(c) * (std::log2(static_cast<double>(c)) - lt);
    return ll;
}

double log_ml_pooled(std::span<const std::uint32_t> counts_x,
                     std::span<const std::uint32_t> counts_y) {
    if (counts_x.size() != counts_y.size())
        throw std::invalid_argument("count vectors of different sizes");
    std::uint64_t total = 0;
    for (std::size_t a = 0; a < counts_x.size(); ++a)
        total += static_cast<std::uint64_t>(counts_x[a]) + counts_y[a];
    if (total == 0) return 0.0;
    const double lt = std::log2(static_cast<double>(total));
    double ll = 0.0;
    for (std::size_t a = 0; a < counts_x.size(); ++a) {
        const std::uint64_t c = static_cast<std::uint64_t>(counts_x[a]) + counts_y[a];
        if (c > 0) ll += static_cast<double>(c) * (std::log2(static_cast<double>(c)) - lt);
    }
    return ll;
}

double pseudo_log_likelihood(const JointPartition& part, const CountTrie& tx, const CountTrie& ty) {
    require_same_alphabet(tx, ty);
    require_valid(part, tx.alphabet_size());
    double ll = 0.0;
    for (const Context& s : part.sigma1) ll += log_ml_term(tx.counts_of(s));
    for (const Context& s : part.sigma2) ll += log_ml_term(ty.counts_of(s));
    for (const Context& s : part.sigma0) ll += log_ml_pooled(tx.counts_of(s), ty.counts_of(s));
    return ll;
}

double criterion(const JointPartition& part, const CountTrie& tx, const CountTrie& ty,
                 const PenaltyConfig& pen) {
    const double ll = pseudo_log_likelihood(part, tx, ty);
    const int alpha = tx.alphabet_size();
    const std::uint64_t n = tx.seq_length();
    const std::uint64_t m = ty.seq_length();
    return ll - static_cast<double>(part.sigma0.size()) * pen.beta(n + m, alpha)
              - static_cast<double>(part.sigma1.size()) * pen.beta(n, alpha)
              - static_cast<double>(part.sigma2.size()) * pen.beta(m, alpha);
}

namespace {

double kt_from_totals(std::span<const std::uint64_t> counts) {
    const int alpha = static_cast<int>(counts.size());
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    if (total == 0) return 0.0;
    double s = std::lgamma(0.5 * alpha) - alpha * std::lgamma(0.5) -
               std::lgamma(static_cast<double>(total) + 0.5 * alpha);
    for (std::uint64_t c : counts) s += std::lgamma(static_cast<double>(c) + 0.5);
    return s / kLn2;
}

} // namespace

double kt_log_prob(std::span<const std::uint32_t> counts) {
    std::vector<std::uint64_t> c(counts.begin(), counts.end());
    return kt_from_totals(c);
}

double kt_log_prob_pooled(std::span<const std::uint32_t> counts_x,
                          std::span<const std::uint32_t> counts_y) {
    if (counts_x.size() != counts_y.size())
        throw std::invalid_argument("count vectors of different sizes");
    std::vector<std::uint64_t> c(counts_x.size());
    for (std::size_t a = 0; a < c.size(); ++a)
        c[a] = static_cast<std::uint64_t>(counts_x[a]) + counts_y[a];
    return kt_from_totals(c);
}

double kt_joint_log_prob(const JointPartition& part, const CountTrie& tx, const CountTrie& ty) {
    require_same_alphabet(tx, ty);
    require_valid(part, tx.alphabet_size());
    const double log_alpha = std::log2(static_cast<double>(tx.alphabet_size()));

    double lp = 0.0;
    std::uint64_t covered_x = 0, covered_y = 0;
    for (const Context& s : part.sigma0) {
        const auto cx = tx.counts_of(s);
        const auto cy = ty.counts_of(s);
        lp += kt_log_prob_pooled(cx, cy);
        for (std::uint32_t c : cx) covered_x += c;
        for (std::uint32_t c : cy) covered_y += c;
    }
    for (const Context& s : part.sigma1) {
        const auto cx = tx.counts_of(s);
        lp += kt_log_prob(cx);
        for (std::uint32_t c : cx) covered_x += c;
    }
    for (const Context& s : part.sigma2) {
        const auto cy = ty.counts_of(s);
        lp += kt_log_prob(cy);
        for (std::uint32_t c : cy) covered_y += c;
    }
    // Positions whose past is shorter than every matching context are scored
    // by the uniform memoryless source.
    const std::uint64_t boundary_x = tx.seq_length() - covered_x;
    const std::uint64_t boundary_y = ty.seq_length() - covered_y;
    lp -= static_cast<double>(boundary_x + boundary_y) * log_alpha;
    return lp;
}

double lemma1_gap(const JointPartition& part, const CountTrie& tx, const CountTrie& ty) {
    require_same_alphabet(tx, ty);
    require_valid(part, tx.alphabet_size());
    const int alpha = tx.alphabet_size();
    const double n = static_cast<double>(tx.seq_length());
    const double m = static_cast<double>(ty.seq_length());

    ContextSet tau1 = part.sigma0;
    tau1.insert(part.sigma1.begin(), part.sigma1.end());
    ContextSet tau2 = part.sigma0;
    tau2.insert(part.sigma2.begin(), part.sigma2.end());

    const double ell = pseudo_log_likelihood(part, tx, ty);
    auto size_term = [](const ContextSet& sigma, double k) {
        if (sigma.empty()) return 0.0;
        const double t = static_cast<double>(sigma.size());
        return t * std::log2(k / t);
    };
    const double rhs =
        -ell +
        static_cast<double>(tree_depth(tau1) + tree_depth(tau2) + part.sigma0.size() +
                            part.sigma1.size() + part.sigma2.size()) *
            std::log2(static_cast<double>(alpha)) +
        0.5 * (alpha - 1) *
            (size_term(part.sigma0, n + m) + size_term(part.sigma1, n) + size_term(part.sigma2, m));
    const double lhs = -kt_joint_log_prob(part, tx, ty);
    return rhs - lhs;
}

} // namespace vlmc
