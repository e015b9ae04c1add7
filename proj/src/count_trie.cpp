#include "vlmc/count_trie.hpp"

#include <algorithm>
#include <stdexcept>

namespace vlmc {

CountTrie::CountTrie(const Sequence& seq, int alphabet_size, int depth_bound)
    : alpha_(alphabet_size), depth_bound_(depth_bound), n_(seq.size()) {
    if (alphabet_size < 2 || alphabet_size > kMaxAlphabetSize)
        throw std::invalid_argument("alphabet size out of range");
    if (depth_bound < 0)
        throw std::invalid_argument("depth bound must be >= 0");
    if (seq.empty())
        throw std::invalid_argument("sequence must be non-empty");
    for (Symbol s : seq)
        if (s >= alpha_)
            throw std::invalid_argument("sequence symbol out of alphabet range");

    counts_.assign(alpha_, 0);
    kids_.assign(alpha_, -1);
    depth_.assign(1, 0);

    const std::int64_t n = static_cast<std::int64_t>(seq.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const Symbol next = seq[static_cast<std::size_t>(i)];
        ++counts_[next];
        std::int32_t node = 0;
        const std::int64_t dmax = std::min<std::int64_t>(depth_bound_, i);
        for (std::int64_t d = 1; d <= dmax; ++d) {
            const Symbol older = seq[static_cast<std::size_t>(i - d)];
            node = ensure_child(node, older);
            ++counts_[static_cast<std::size_t>(node) * alpha_ + next];
        }
    }
}

std::int32_t CountTrie::ensure_child(std::int32_t node, Symbol a) {
    std::int32_t& slot = kids_[static_cast<std::size_t>(node) * alpha_ + a];
    if (slot < 0) {
        const std::int32_t fresh = static_cast<std::int32_t>(node_count());
        slot = fresh;
        depth_.push_back(depth_[node] + 1);
        counts_.insert(counts_.end(), alpha_, 0);
        kids_.insert(kids_.end(), alpha_, -1);
        return fresh;
    }
    return slot;
}

std::uint64_t CountTrie::total(std::int32_t node) const {
    std::uint64_t t = 0;
    for (std::uint32_t c : counts(node)) t += c;
    return t;
}

std::int32_t CountTrie::find(const Context& s) const {
    if (static_cast<int>(s.size()) > depth_bound_)
        throw std::out_of_range("context longer than the trie depth bound");
    std::int32_t node = 0;
    // Walk from the most recent symbol (last char) toward the oldest.
    for (auto it = s.rbegin(); it != s.rend(); ++it) {
        const Symbol a = static_cast<Symbol>(static_cast<unsigned char>(*it));
        if (a >= alpha_)
            throw std::invalid_argument("context symbol out of alphabet range");
        node = child(node, a);
        if (node < 0) return -1;
    }
    return node;
}

std::vector<std::uint32_t> CountTrie::counts_of(const Context& s) const {
    const std::int32_t node = find(s);
    if (node < 0) return std::vector<std::uint32_t>(alpha_, 0);
    auto sp = counts(node);
    return std::vector<std::uint32_t>(sp.begin(), sp.end());
}

int default_depth_bound(std::uint64_t n, std::uint64_t m) {
    const std::uint64_t top = std::max(n, m);
    const std::uint64_t d = top > 0 ? top - 1 : 0;
    return static_cast<int>(std::min<std::uint64_t>(d, 24));
}

} // namespace vlmc
