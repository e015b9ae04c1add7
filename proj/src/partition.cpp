#include "vlmc/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace vlmc {

namespace detail {

ContextTrie::ContextTrie(int alphabet_size) : alpha_(alphabet_size) {
    nodes_.push_back(Node{-1, std::vector<std::int32_t>(alpha_, -1)});
}

bool ContextTrie::insert(const Context& s, std::int32_t payload) {
    std::int32_t node = 0;
    for (auto it = s.rbegin(); it != s.rend(); ++it) {
        if (nodes_[node].terminal >= 0) return false; // existing context is a proper suffix
        const Symbol a = static_cast<Symbol>(static_cast<unsigned char>(*it));
        std::int32_t next = nodes_[node].kid[a];
        if (next < 0) {
            next = static_cast<std::int32_t>(nodes_.size());
            nodes_[node].kid[a] = next;
            nodes_.push_back(Node{-1, std::vector<std::int32_t>(alpha_, -1)});
        }
        node = next;
    }
    if (nodes_[node].terminal >= 0) return false; // duplicate
    for (std::int32_t k : nodes_[node].kid)
        if (k >= 0) return false; // s is a proper suffix of an existing context
    nodes_[node].terminal = payload;
    ++inserted_;
    return true;
}

std::optional<ContextTrie::Incomplete> ContextTrie::find_incomplete() const {
    if (inserted_ == 0) return Incomplete{Context{}, 0};
    // Iterative walk carrying the partial context (most recent symbols known
    // so far); node paths read root-to-node as recent-to-old.
    struct Item { std::int32_t node; Context partial; };
    std::vector<Item> stack{{0, Context{}}};
    while (!stack.empty()) {
        auto [node, partial] = std::move(stack.back());
        stack.pop_back();
        if (nodes_[node].terminal >= 0) continue;
        for (Symbol a = 0; a < alpha_; ++a) {
            const std::int32_t k = nodes_[node].kid[a];
            if (k < 0) return Incomplete{partial, a};
            Context next(1, static_cast<char>(a));
            next += partial;
            stack.push_back({k, std::move(next)});
        }
    }
    return std::nullopt;
}

std::int32_t ContextTrie::match_suffix(std::span<const Symbol> past) const {
    std::int32_t node = 0;
    if (nodes_[node].terminal >= 0) return nodes_[node].terminal;
    for (std::size_t i = past.size(); i-- > 0;) {
        const std::int32_t k = nodes_[node].kid[past[i]];
        if (k < 0) return -1;
        node = k;
        if (nodes_[node].terminal >= 0) return nodes_[node].terminal;
    }
    return -1;
}

std::int32_t ContextTrie::match_suffix(const Context& past) const {
    return match_suffix(std::span<const Symbol>(
        reinterpret_cast<const Symbol*>(past.data()), past.size()));
}

} // namespace detail

namespace {

std::optional<PartitionViolation> check_tree(const ContextSet& tree, int alphabet_size,
                                             const char* condition) {
    for (const Context& s : tree)
        for (char c : s)
            if (static_cast<unsigned char>(c) >= alphabet_size)
                return PartitionViolation{condition, "context symbol out of alphabet range", s};
    detail::ContextTrie trie(alphabet_size);
    for (const Context& s : tree)
        if (!trie.insert(s, 0))
            return PartitionViolation{condition, "context set is not suffix-free", s};
    if (tree.empty())
        return PartitionViolation{condition, "tree is empty", Context{}};
    if (auto inc = trie.find_incomplete())
        return PartitionViolation{condition,
                                  "internal node missing child symbol " + std::to_string(inc->missing),
                                  inc->at};
    return std::nullopt;
}

} // namespace

std::optional<PartitionViolation> validate_context_tree(const ContextSet& tree, int alphabet_size) {
    return check_tree(tree, alphabet_size, "T2");
}

std::optional<PartitionViolation> validate_partition(const JointPartition& part, int alphabet_size) {
    for (const Context& s : part.sigma1)
        if (part.sigma0.count(s))
            return PartitionViolation{"T1", "context in both sigma0 and sigma1", s};
    for (const Context& s : part.sigma2)
        if (part.sigma0.count(s))
            return PartitionViolation{"T1", "context in both sigma0 and sigma2", s};

    ContextSet tau1 = part.sigma0;
    tau1.insert(part.sigma1.begin(), part.sigma1.end());
    if (auto v = check_tree(tau1, alphabet_size, "T2")) return v;

    ContextSet tau2 = part.sigma0;
    tau2.insert(part.sigma2.begin(), part.sigma2.end());
    if (auto v = check_tree(tau2, alphabet_size, "T3")) return v;
    return std::nullopt;
}

void require_valid(const JointPartition& part, int alphabet_size) {
    if (auto v = validate_partition(part, alphabet_size))
        throw std::invalid_argument("invalid partition (" + v->condition + "): " + v->detail);
}

int tree_depth(const ContextSet& tree) {
    int d = 0;
    for (const Context& s : tree) d = std::max(d, static_cast<int>(s.size()));
    return d;
}

} // namespace vlmc
