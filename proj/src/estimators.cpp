#include "vlmc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vlmc {

namespace {

std::optional<std::vector<double>> normalize(std::span<const std::uint32_t> counts) {
    std::uint64_t total = 0;
    for (std::uint32_t c : counts) total += c;
    if (total == 0) return std::nullopt;
    std::vector<double> p(counts.size());
    for (std::size_t a = 0; a < counts.size(); ++a)
        p[a] = static_cast<double>(counts[a]) / static_cast<double>(total);
    return p;
}

std::optional<std::vector<double>> normalize_pooled(std::span<const std::uint32_t> cx,
                                                    std::span<const std::uint32_t> cy) {
    std::uint64_t total = 0;
    for (std::size_t a = 0; a < cx.size(); ++a)
        total += static_cast<std::uint64_t>(cx[a]) + cy[a];
    if (total == 0) return std::nullopt;
    std::vector<double> p(cx.size());
    for (std::size_t a = 0; a < cx.size(); ++a)
        p[a] = static_cast<double>(static_cast<std::uint64_t>(cx[a]) + cy[a]) /
               static_cast<double>(total);
    return p;
}

// Candidate nodes observed in either sample, merged into one |A|-ary view.
// Nodes are appended in breadth-first order, so a reverse index sweep visits
// children before parents.
struct JointView {
    int alpha = 0;
    std::vector<std::int32_t> kids; // node-major, alpha per node
    std::vector<std::int32_t> nx, ny, parent;
    std::vector<std::int32_t> depth;
    std::vector<Symbol> edge;

    std::size_t size() const { return nx.size(); }
    std::int32_t kid(std::size_t node, Symbol a) const { return kids[node * alpha + a]; }

    Context context_of(std::size_t k) const {
        Context s;
        for (std::int32_t cur = static_cast<std::int32_t>(k); cur > 0; cur = parent[cur])
            s.push_back(static_cast<char>(edge[cur]));
        return s;
    }
};

JointView build_joint_view(const CountTrie& tx, const CountTrie& ty, int depth) {
    JointView v;
    v.alpha = tx.alphabet_size();
    v.nx.push_back(tx.root());
    v.ny.push_back(ty.root());
    v.parent.push_back(-1);
    v.edge.push_back(0);
    v.depth.push_back(0);
    v.kids.insert(v.kids.end(), v.alpha, -1);
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v.depth[k] >= depth) continue;
        for (int a = 0; a < v.alpha; ++a) {
            const std::int32_t cx = v.nx[k] >= 0 ? tx.child(v.nx[k], static_cast<Symbol>(a)) : -1;
            const std::int32_t cy = v.ny[k] >= 0 ? ty.child(v.ny[k], static_cast<Symbol>(a)) : -1;
            if (cx < 0 && cy < 0) continue;
            const std::int32_t idx = static_cast<std::int32_t>(v.size());
            v.nx.push_back(cx);
            v.ny.push_back(cy);
            v.parent.push_back(static_cast<std::int32_t>(k));
            v.edge.push_back(static_cast<Symbol>(a));
            v.depth.push_back(v.depth[k] + 1);
            v.kids.insert(v.kids.end(), v.alpha, -1);
            v.kids[k * v.alpha + a] = idx;
        }
    }
    return v;
}

struct JointScores {
    std::vector<double> vx, vy, vxy;
    std::vector<std::uint8_t> chix, chiy, chixy;
    // Closed-form values of any node unobserved in both samples: its subtree
    // carries no likelihood mass, so only the penalties differ.
    double ux, uy, uxy;
    std::uint8_t uchixy;
};

JointScores score_pass(const JointView& v, const CountTrie& tx, const CountTrie& ty,
                       const PenaltyConfig& pen, int depth) {
    const int alpha = v.alpha;
    const double bn = pen.beta(tx.seq_length(), alpha);
    const double bm = pen.beta(ty.seq_length(), alpha);
    const double bnm = pen.beta(tx.seq_length() + ty.seq_length(), alpha);

    JointScores s;
    s.ux = -bn;
    s.uy = -bm;
    if (-bnm >= s.ux + s.uy) {
        s.uxy = -bnm;
        s.uchixy = 1;
    } else {
        s.uxy = s.ux + s.uy;
        s.uchixy = 2;
    }
    const std::size_t nn = v.size();
    s.vx.resize(nn);
    s.vy.resize(nn);
    s.vxy.resize(nn);
    s.chix.resize(nn);
    s.chiy.resize(nn);
    s.chixy.resize(nn);

    for (std::size_t k = nn; k-- > 0;) {
        double lx = 0.0, ly = 0.0, lxy = 0.0;
        if (v.nx[k] >= 0 && v.ny[k] >= 0) {
            lx = log_ml_term(tx.counts(v.nx[k]));
            ly = log_ml_term(ty.counts(v.ny[k]));
            lxy = log_ml_pooled(tx.counts(v.nx[k]), ty.counts(v.ny[k]));
        } else if (v.nx[k] >= 0) {
            lx = log_ml_term(tx.counts(v.nx[k]));
            lxy = lx;
        } else if (v.ny[k] >= 0) {
            ly = log_ml_term(ty.counts(v.ny[k]));
            lxy = ly;
        }
        const double rx = lx - bn;
        const double ry = ly - bm;
        const double rxy = lxy - bnm;

        if (v.depth[k] == depth) {
            s.vx[k] = rx;
            s.chix[k] = 0;
            s.vy[k] = ry;
            s.chiy[k] = 0;
            if (rxy >= rx + ry) {
                s.vxy[k] = rxy;
                s.chixy[k] = 1;
            } else {
                s.vxy[k] = rx + ry;
                s.chixy[k] = 2;
            }
            continue;
        }

        double sx = 0.0, sy = 0.0, sxy = 0.0;
        for (int a = 0; a < alpha; ++a) {
            const std::int32_t c = v.kid(k, static_cast<Symbol>(a));
            if (c >= 0) {
                sx += s.vx[c];
                sy += s.vy[c];
                sxy += s.vxy[c];
            } else {
                sx += s.ux;
                sy += s.uy;
                sxy += s.uxy;
            }
        }
        if (rx >= sx) {
            s.vx[k] = rx;
            s.chix[k] = 0;
        } else {
            s.vx[k] = sx;
            s.chix[k] = 1;
        }
        if (ry >= sy) {
            s.vy[k] = ry;
            s.chiy[k] = 0;
        } else {
            s.vy[k] = sy;
            s.chiy[k] = 1;
        }
        const double o2 = s.vx[k] + s.vy[k];
        if (rxy >= o2 && rxy >= sxy) {
            s.vxy[k] = rxy;
            s.chixy[k] = 1;
        } else if (o2 >= sxy) {
            s.vxy[k] = o2;
            s.chixy[k] = 2;
        } else {
            s.vxy[k] = sxy;
            s.chixy[k] = 3;
        }
    }
    return s;
}

enum class Walk : std::uint8_t { joint, single_x, single_y };

struct WalkItem {
    Walk kind;
    std::int32_t node; // view index, -1 = unobserved in both samples
    Context ctx;
};

EstimationResult reconstruct(const JointView& v, const JointScores& s, const CountTrie& tx,
                             const CountTrie& ty) {
    EstimationResult out;
    auto theta_x = [&](std::int32_t k) -> std::optional<std::vector<double>> {
        if (k < 0 || v.nx[k] < 0) return std::nullopt;
        return normalize(tx.counts(v.nx[k]));
    };
    auto theta_y = [&](std::int32_t k) -> std::optional<std::vector<double>> {
        if (k < 0 || v.ny[k] < 0) return std::nullopt;
        return normalize(ty.counts(v.ny[k]));
    };
    auto theta_xy = [&](std::int32_t k) -> std::optional<std::vector<double>> {
        if (k < 0) return std::nullopt;
        if (v.nx[k] >= 0 && v.ny[k] >= 0)
            return normalize_pooled(tx.counts(v.nx[k]), ty.counts(v.ny[k]));
        if (v.nx[k] >= 0) return normalize(tx.counts(v.nx[k]));
        if (v.ny[k] >= 0) return normalize(ty.counts(v.ny[k]));
        return std::nullopt;
    };

    std::vector<WalkItem> stack{{Walk::joint, 0, Context{}}};
    while (!stack.empty()) {
        WalkItem it = std::move(stack.back());
        stack.pop_back();
        const std::int32_t k = it.node;
        switch (it.kind) {
            case Walk::joint: {
                const std::uint8_t chi = k >= 0 ? s.chixy[k] : s.uchixy;
                if (chi == 1) {
                    out.partition.sigma0.insert(it.ctx);
                    out.theta0[it.ctx] = theta_xy(k);
                } else if (chi == 2) {
                    stack.push_back({Walk::single_x, k, it.ctx});
                    stack.push_back({Walk::single_y, k, it.ctx});
                } else {
                    for (int a = 0; a < v.alpha; ++a) {
                        Context next(1, static_cast<char>(a));
                        next += it.ctx;
                        stack.push_back({Walk::joint, v.kid(k, static_cast<Symbol>(a)), std::move(next)});
                    }
                }
                break;
            }
            case Walk::single_x: {
                if (k < 0 || s.chix[k] == 0) {
                    out.partition.sigma1.insert(it.ctx);
                    out.theta1[it.ctx] = theta_x(k);
                } else {
                    for (int a = 0; a < v.alpha; ++a) {
                        Context next(1, static_cast<char>(a));
                        next += it.ctx;
                        stack.push_back({Walk::single_x, v.kid(k, static_cast<Symbol>(a)), std::move(next)});
                    }
                }
                break;
            }
            case Walk::single_y: {
                if (k < 0 || s.chiy[k] == 0) {
                    out.partition.sigma2.insert(it.ctx);
                    out.theta2[it.ctx] = theta_y(k);
                } else {
                    for (int a = 0; a < v.alpha; ++a) {
                        Context next(1, static_cast<char>(a));
                        next += it.ctx;
                        stack.push_back({Walk::single_y, v.kid(k, static_cast<Symbol>(a)), std::move(next)});
                    }
                }
                break;
            }
        }
    }
    out.score = s.vxy[0];
    return out;
}

void check_depth(const CountTrie& trie, int depth) {
    if (depth < 0 || depth > trie.depth_bound())
        throw std::invalid_argument("estimation depth exceeds the trie depth bound");
}

} // namespace

SingleFit fit_single(const CountTrie& trie, const PenaltyConfig& pen, int depth) {
    check_depth(trie, depth);
    const int alpha = trie.alphabet_size();
    const double beta = pen.beta(trie.seq_length(), alpha);
    const std::size_t nn = trie.node_count();
    std::vector<double> v(nn, 0.0);
    std::vector<std::uint8_t> chi(nn, 0);

    for (std::size_t k = nn; k-- > 0;) {
        const std::int32_t node = static_cast<std::int32_t>(k);
        const int d = trie.depth(node);
        if (d > depth) continue;
        const double r = log_ml_term(trie.counts(node)) - beta;
        if (d == depth) {
            v[k] = r;
            chi[k] = 0;
            continue;
        }
        double se = 0.0;
        for (int a = 0; a < alpha; ++a) {
            const std::int32_t c = trie.child(node, static_cast<Symbol>(a));
            se += c >= 0 ? v[c] : -beta;
        }
        if (r >= se) {
            v[k] = r;
            chi[k] = 0;
        } else {
            v[k] = se;
            chi[k] = 1;
        }
    }

    SingleFit fit;
    fit.score = v[0];
    std::vector<std::pair<std::int32_t, Context>> stack{{0, Context{}}};
    while (!stack.empty()) {
        auto [node, ctx] = std::move(stack.back());
        stack.pop_back();
        if (node < 0 || chi[node] == 0) {
            fit.tree.insert(ctx);
            fit.theta[ctx] = node >= 0 ? normalize(trie.counts(node)) : std::nullopt;
            continue;
        }
        for (int a = 0; a < alpha; ++a) {
            Context next(1, static_cast<char>(a));
            next += ctx;
            stack.push_back({trie.child(node, static_cast<Symbol>(a)), std::move(next)});
        }
    }
    return fit;
}

EstimationResult fit_joint(const CountTrie& tx, const CountTrie& ty, const PenaltyConfig& pen,
                           int depth, bool keep_scores) {
    if (tx.alphabet_size() != ty.alphabet_size())
        throw std::invalid_argument("count tries built over different alphabets");
    check_depth(tx, depth);
    check_depth(ty, depth);

    const JointView view = build_joint_view(tx, ty, depth);
    const JointScores scores = score_pass(view, tx, ty, pen, depth);
    EstimationResult result = reconstruct(view, scores, tx, ty);

    if (keep_scores) {
        ScoreTable table;
        table.entries.reserve(view.size());
        for (std::size_t k = 0; k < view.size(); ++k)
            table.entries.push_back({view.context_of(k), scores.vx[k], scores.vy[k], scores.vxy[k],
                                     scores.chix[k], scores.chiy[k], scores.chixy[k]});
        std::sort(table.entries.begin(), table.entries.end(),
                  [](const ScoreTable::Entry& a, const ScoreTable::Entry& b) {
                      return ContextOrder{}(a.context, b.context);
                  });
        result.scores = std::move(table);
    }
    return result;
}

std::vector<ContextSet> enumerate_complete_trees(int alphabet_size, int depth) {
    if (alphabet_size < 2)
        throw std::invalid_argument("alphabet size out of range");
    double count = 1.0;
    for (int d = 1; d <= depth; ++d) {
        count = 1.0 + std::pow(count, alphabet_size);
        if (count > 100.0)
            throw std::invalid_argument("enumeration bound exceeded for depth " +
                                        std::to_string(depth));
    }

    std::vector<ContextSet> out;
    out.push_back(ContextSet{Context{}});
    if (depth == 0) return out;

    const std::vector<ContextSet> subs = enumerate_complete_trees(alphabet_size, depth - 1);
    std::vector<std::size_t> pick(alphabet_size, 0);
    for (;;) {
        ContextSet tree;
        for (int a = 0; a < alphabet_size; ++a)
            for (const Context& u : subs[pick[a]]) {
                Context s = u;
                s.push_back(static_cast<char>(a));
                tree.insert(std::move(s));
            }
        out.push_back(std::move(tree));
        int pos = alphabet_size - 1;
        while (pos >= 0 && ++pick[pos] == subs.size()) pick[pos--] = 0;
        if (pos < 0) break;
    }
    return out;
}

namespace {

std::string partition_key(const JointPartition& p) {
    std::string key;
    auto add = [&key](const ContextSet& s) {
        for (const Context& c : s) {
            key.push_back(static_cast<char>(c.size()));
            key += c;
        }
        key.push_back('\x7f');
    };
    add(p.sigma0);
    add(p.sigma1);
    add(p.sigma2);
    return key;
}

} // namespace

EstimationResult oracle_fit_joint(const CountTrie& tx, const CountTrie& ty,
                                  const PenaltyConfig& pen, int depth) {
    if (tx.alphabet_size() != ty.alphabet_size())
        throw std::invalid_argument("count tries built over different alphabets");
    check_depth(tx, depth);
    check_depth(ty, depth);
    const int alpha = tx.alphabet_size();
    const std::vector<ContextSet> trees = enumerate_complete_trees(alpha, depth);

    double best = -std::numeric_limits<double>::infinity();
    JointPartition best_part;
    std::size_t best_union = 0;
    std::string best_key;
    bool have = false;
    const double tol = 1e-9;

    for (const ContextSet& tau1 : trees) {
        for (const ContextSet& tau2 : trees) {
            std::vector<Context> common;
            for (const Context& s : tau1)
                if (tau2.count(s)) common.push_back(s);
            if (common.size() > 20)
                throw std::invalid_argument("enumeration bound exceeded");
            const std::size_t masks = std::size_t{1} << common.size();
            for (std::size_t mask = 0; mask < masks; ++mask) {
                JointPartition part;
                for (std::size_t i = 0; i < common.size(); ++i)
                    if (mask & (std::size_t{1} << i)) part.sigma0.insert(common[i]);
                for (const Context& s : tau1)
                    if (!part.sigma0.count(s)) part.sigma1.insert(s);
                for (const Context& s : tau2)
                    if (!part.sigma0.count(s)) part.sigma2.insert(s);

                const double c = criterion(part, tx, ty, pen);
                ContextSet uni = part.sigma0;
                uni.insert(part.sigma1.begin(), part.sigma1.end());
                uni.insert(part.sigma2.begin(), part.sigma2.end());
                const std::size_t usz = uni.size();
                if (!have || c > best + tol) {
                    have = true;
                    best = c;
                    best_part = part;
                    best_union = usz;
                    best_key = partition_key(part);
                } else if (c >= best - tol) {
                    const std::string key = partition_key(part);
                    if (usz < best_union || (usz == best_union && key < best_key)) {
                        best = std::max(best, c);
                        best_part = part;
                        best_union = usz;
                        best_key = key;
                    }
                }
            }
        }
    }

    EstimationResult out;
    out.partition = best_part;
    out.score = best;
    for (const Context& s : best_part.sigma0) {
        auto cx = tx.counts_of(s);
        auto cy = ty.counts_of(s);
        out.theta0[s] = normalize_pooled(cx, cy);
    }
    for (const Context& s : best_part.sigma1) out.theta1[s] = normalize(tx.counts_of(s));
    for (const Context& s : best_part.sigma2) out.theta2[s] = normalize(ty.counts_of(s));
    return out;
}

} // namespace vlmc
