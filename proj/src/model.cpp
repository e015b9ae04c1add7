#include "vlmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vlmc {

namespace {

constexpr std::size_t kStateGuard = std::size_t{1} << 20;
constexpr double kPiResidual = 1e-12;
constexpr std::size_t kPiMaxIter = 1000000;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick_from_cum(const std::vector<double>& cum, double u) {
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cum.begin());
    return std::min(i, cum.size() - 1);
}

// Strongly connected components (iterative Tarjan) over the positive
// transition graph; used to reject chains without a unique stationary
// distribution and to zero the stationary mass of transient states.
std::vector<std::int32_t> closed_class_mask(const MarkovEmbedding& emb) {
    const std::size_t n = emb.state_count;
    const int alpha = emb.alphabet_size;
    std::vector<std::int32_t> comp(n, -1), low(n), num(n, -1);
    std::vector<std::int32_t> stack, call_node;
    std::vector<int> call_edge;
    std::vector<std::uint8_t> on_stack(n, 0);
    std::int32_t counter = 0, ncomp = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (num[root] >= 0) continue;
        call_node.assign(1, static_cast<std::int32_t>(root));
        call_edge.assign(1, 0);
        num[root] = low[root] = counter++;
        stack.push_back(static_cast<std::int32_t>(root));
        on_stack[root] = 1;
        while (!call_node.empty()) {
            const std::int32_t u = call_node.back();
            int& e = call_edge.back();
            if (e < alpha) {
                const int a = e++;
                if (emb.transition[static_cast<std::size_t>(u) * alpha + a] <= 0.0) continue;
                const std::int32_t w =
                    static_cast<std::int32_t>(emb.next_state(static_cast<std::size_t>(u),
                                                             static_cast<Symbol>(a)));
                if (num[w] < 0) {
                    num[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call_node.push_back(w);
                    call_edge.push_back(0);
                } else if (on_stack[w]) {
                    low[u] = std::min(low[u], num[w]);
                }
                continue;
            }
            if (low[u] == num[u]) {
                for (;;) {
                    const std::int32_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = ncomp;
                    if (w == u) break;
                }
                ++ncomp;
            }
            call_node.pop_back();
            call_edge.pop_back();
            if (!call_node.empty()) {
                const std::int32_t p = call_node.back();
                low[p] = std::min(low[p], low[u]);
            }
        }
    }

    std::vector<std::uint8_t> closed(static_cast<std::size_t>(ncomp), 1);
    for (std::size_t u = 0; u < n; ++u)
        for (int a = 0; a < alpha; ++a) {
            if (emb.transition[u * alpha + a] <= 0.0) continue;
            const std::size_t w = emb.next_state(u, static_cast<Symbol>(a));
            if (comp[w] != comp[u]) closed[comp[u]] = 0;
        }
    std::int32_t nclosed = 0, the_class = -1;
    for (std::int32_t c = 0; c < ncomp; ++c)
        if (closed[c]) {
            ++nclosed;
            the_class = c;
        }
    if (nclosed != 1)
        throw std::runtime_error("chain is reducible: " + std::to_string(nclosed) +
                                 " closed classes, stationary distribution is not unique");
    std::vector<std::int32_t> mask(n, 0);
    for (std::size_t u = 0; u < n; ++u)
        if (comp[u] == the_class) mask[u] = 1;
    return mask;
}

void apply_kernel(const MarkovEmbedding& emb, const std::vector<double>& pi,
                  std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const int alpha = emb.alphabet_size;
    for (std::size_t i = 0; i < emb.state_count; ++i) {
        const double w = pi[i];
        if (w == 0.0) continue;
        for (int a = 0; a < alpha; ++a) {
            const double p = emb.transition[i * alpha + a];
            if (p > 0.0) out[emb.next_state(i, static_cast<Symbol>(a))] += w * p;
        }
    }
}

double kernel_residual(const std::vector<double>& next, const std::vector<double>& pi) {
    double r = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) r = std::max(r, std::abs(next[i] - pi[i]));
    return r;
}

// pi (P^T - I) = 0 with sum(pi) = 1, by Gaussian elimination.
std::vector<double> stationary_dense(const MarkovEmbedding& emb) {
    const std::size_t n = emb.state_count;
    const int alpha = emb.alphabet_size;
    std::vector<double> m(n * (n + 1), 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return m[r * (n + 1) + c]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (int a = 0; a < alpha; ++a) {
            const double p = emb.transition[i * alpha + a];
            if (p > 0.0) at(emb.next_state(i, static_cast<Symbol>(a)), i) += p;
        }
        at(i, i) -= 1.0;
    }
    for (std::size_t c = 0; c < n; ++c) at(n - 1, c) = 1.0;
    at(n - 1, n) = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
        if (std::abs(at(piv, col)) < 1e-14)
            throw std::runtime_error("stationary distribution solve failed (singular system)");
        if (piv != col)
            for (std::size_t c = 0; c <= n; ++c) std::swap(at(piv, c), at(col, c));
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = at(r, col) / at(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c <= n; ++c) at(r, c) -= f * at(col, c);
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = at(i, n) / at(i, i);
    return pi;
}

double kl_row(const double* p, const double* q, int alpha) {
    double s = 0.0;
    for (int a = 0; a < alpha; ++a) {
        if (p[a] <= 0.0) continue;
        if (q[a] <= 0.0) return std::numeric_limits<double>::infinity();
        s += p[a] * std::log2(p[a] / q[a]);
    }
    return s;
}

} // namespace

int ProbabilisticContextTree::depth() const {
    return theta.empty() ? 0 : static_cast<int>(theta.rbegin()->first.size());
}

ProbabilisticContextTree ProbabilisticContextTree::create(
    Alphabet alphabet, std::map<Context, std::vector<double>, ContextOrder> theta, double tol) {
    const int alpha = alphabet.size();
    ContextSet tree;
    for (const auto& [ctx, row] : theta) {
        tree.insert(ctx);
        if (static_cast<int>(row.size()) != alpha)
            throw std::invalid_argument("theta row size does not match the alphabet");
        double sum = 0.0;
        for (double p : row) {
            if (p < 0.0) throw std::invalid_argument("theta entries must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::invalid_argument("theta row does not sum to 1");
    }
    if (auto v = validate_context_tree(tree, alpha))
        throw std::invalid_argument("context set is not a complete tree: " + v->detail);
    ProbabilisticContextTree model;
    model.alphabet = std::move(alphabet);
    model.theta = std::move(theta);
    return model;
}

Context lookup_context(const ProbabilisticContextTree& model, const Context& past) {
    if (static_cast<int>(past.size()) < model.depth())
        throw std::invalid_argument("past shorter than the model depth");
    detail::ContextTrie trie(model.alphabet.size());
    std::vector<const Context*> ctxs;
    for (const auto& [ctx, row] : model.theta) {
        trie.insert(ctx, static_cast<std::int32_t>(ctxs.size()));
        ctxs.push_back(&ctx);
    }
    const std::int32_t hit = trie.match_suffix(past);
    if (hit < 0) throw std::logic_error("no context matches the past");
    return *ctxs[static_cast<std::size_t>(hit)];
}

Context MarkovEmbedding::state_string(std::size_t idx) const {
    Context s(static_cast<std::size_t>(order), '\0');
    for (int j = order - 1; j >= 0; --j) {
        s[static_cast<std::size_t>(j)] = static_cast<char>(idx % alphabet_size);
        idx /= static_cast<std::size_t>(alphabet_size);
    }
    return s;
}

std::size_t MarkovEmbedding::state_index(const Context& s) const {
    std::size_t idx = 0;
    for (char c : s) idx = idx * alphabet_size + static_cast<unsigned char>(c);
    return idx;
}

std::size_t MarkovEmbedding::next_state(std::size_t idx, Symbol a) const {
    const std::size_t mod = state_count / static_cast<std::size_t>(alphabet_size);
    return (idx % mod) * static_cast<std::size_t>(alphabet_size) + a;
}

MarkovEmbedding embed_markov(const ProbabilisticContextTree& model, int order) {
    const int alpha = model.alphabet.size();
    const int d = std::max({1, model.depth(), order});

    std::size_t states = 1;
    for (int j = 0; j < d; ++j) {
        states *= static_cast<std::size_t>(alpha);
        if (states > kStateGuard)
            throw std::runtime_error("state space exceeds the embedding guard (2^20)");
    }

    MarkovEmbedding emb;
    emb.order = d;
    emb.alphabet_size = alpha;
    emb.state_count = states;
    emb.transition.assign(states * static_cast<std::size_t>(alpha), 0.0);

    detail::ContextTrie trie(alpha);
    std::vector<const std::vector<double>*> rows;
    for (const auto& [ctx, row] : model.theta) {
        trie.insert(ctx, static_cast<std::int32_t>(rows.size()));
        rows.push_back(&row);
    }
    for (std::size_t idx = 0; idx < states; ++idx) {
        const Context w = emb.state_string(idx);
        const std::int32_t hit = trie.match_suffix(w);
        if (hit < 0) throw std::logic_error("no context matches a state");
        const std::vector<double>& row = *rows[static_cast<std::size_t>(hit)];
        for (int a = 0; a < alpha; ++a) emb.transition[idx * alpha + a] = row[a];
    }

    const std::vector<std::int32_t> mask = closed_class_mask(emb);

    std::vector<double> pi(states, 1.0 / static_cast<double>(states));
    std::vector<double> next(states, 0.0);
    bool converged = false;
    for (std::size_t it = 0; it < kPiMaxIter; ++it) {
        apply_kernel(emb, pi, next);
        if (kernel_residual(next, pi) <= kPiResidual) {
            converged = true;
            break;
        }
        // Damped update: same fixpoint, converges for periodic chains too.
        for (std::size_t i = 0; i < states; ++i) pi[i] = 0.5 * (pi[i] + next[i]);
    }
    if (!converged) {
        if (states <= 4096)
            pi = stationary_dense(emb);
        else
            throw std::runtime_error("stationary distribution did not converge");
    }

    double total = 0.0;
    for (std::size_t i = 0; i < states; ++i) {
        if (!mask[i] || pi[i] < 0.0) pi[i] = 0.0;
        total += pi[i];
    }
    if (total <= 0.0) throw std::runtime_error("stationary distribution collapsed to zero");
    for (double& p : pi) p /= total;

    apply_kernel(emb, pi, next);
    if (kernel_residual(next, pi) > 1e-10)
        throw std::runtime_error("stationary distribution residual above tolerance");
    emb.pi = std::move(pi);
    return emb;
}

ModelSampler::ModelSampler(const ProbabilisticContextTree& model)
    : alpha_(model.alphabet.size()),
      depth_(model.depth()),
      index_(model.alphabet.size()),
      emb_(embed_markov(model)) {
    for (const auto& [ctx, row] : model.theta) {
        index_.insert(ctx, static_cast<std::int32_t>(theta_cum_.size()));
        std::vector<double> cum(row.size());
        double acc = 0.0;
        for (std::size_t a = 0; a < row.size(); ++a) {
            acc += row[a];
            cum[a] = acc;
        }
        theta_cum_.push_back(std::move(cum));
    }
    pi_cum_.resize(emb_.state_count);
    double acc = 0.0;
    for (std::size_t i = 0; i < emb_.state_count; ++i) {
        acc += emb_.pi[i];
        pi_cum_[i] = acc;
    }
}

Sequence ModelSampler::draw(std::size_t n, std::mt19937_64& rng) const {
    Sequence out;
    out.reserve(n);
    if (depth_ > 0) {
        const std::size_t state = pick_from_cum(pi_cum_, uniform01(rng));
        const Context w = emb_.state_string(state);
        for (std::size_t j = 0; j < w.size() && out.size() < n; ++j)
            out.push_back(static_cast<Symbol>(static_cast<unsigned char>(w[j])));
    }
    while (out.size() < n) {
        const std::size_t lo = out.size() - static_cast<std::size_t>(depth_);
        const std::int32_t hit =
            index_.match_suffix({out.data() + lo, static_cast<std::size_t>(depth_)});
        if (hit < 0) throw std::logic_error("no context matches the sampled past");
        out.push_back(static_cast<Symbol>(
            pick_from_cum(theta_cum_[static_cast<std::size_t>(hit)], uniform01(rng))));
    }
    return out;
}

Sequence sample(const ProbabilisticContextTree& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample length must be >= 1");
    ModelSampler sampler(model);
    std::mt19937_64 rng(seed);
    return sampler.draw(n, rng);
}

double kl_rate(const ProbabilisticContextTree& p, const ProbabilisticContextTree& q,
               int min_order) {
    if (p.alphabet != q.alphabet)
        throw std::invalid_argument("models are defined over different alphabets");
    const int alpha = p.alphabet.size();
    const int d = std::max({p.depth(), q.depth(), min_order});
    if (d == 0)
        return kl_row(p.theta.begin()->second.data(), q.theta.begin()->second.data(), alpha);

    const MarkovEmbedding emb = embed_markov(p, d);
    detail::ContextTrie qtrie(alpha);
    std::vector<const std::vector<double>*> qrows;
    for (const auto& [ctx, row] : q.theta) {
        qtrie.insert(ctx, static_cast<std::int32_t>(qrows.size()));
        qrows.push_back(&row);
    }
    double rate = 0.0;
    for (std::size_t idx = 0; idx < emb.state_count; ++idx) {
        if (emb.pi[idx] <= 0.0) continue;
        const Context w = emb.state_string(idx);
        const std::int32_t hit = qtrie.match_suffix(w);
        if (hit < 0) throw std::logic_error("no context matches a state");
        const double r = kl_row(&emb.transition[idx * alpha],
                                qrows[static_cast<std::size_t>(hit)]->data(), alpha);
        if (std::isinf(r)) return r;
        rate += emb.pi[idx] * r;
    }
    return rate;
}

} // namespace vlmc
