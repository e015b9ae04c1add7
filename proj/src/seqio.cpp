#include "vlmc/seqio.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vlmc {

Alphabet::Alphabet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 2)
        throw std::invalid_argument("alphabet must contain at least 2 symbols");
    if (tokens_.size() > static_cast<std::size_t>(kMaxAlphabetSize))
        throw std::invalid_argument("alphabet exceeds " + std::to_string(kMaxAlphabetSize) + " symbols");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        const std::string& tok = tokens_[i];
        if (tok.empty())
            throw std::invalid_argument("alphabet token must be non-empty");
        for (char c : tok)
            if (std::isspace(static_cast<unsigned char>(c)))
                throw std::invalid_argument("alphabet token contains whitespace: '" + tok + "'");
        auto [it, inserted] = index_.emplace(tok, static_cast<Symbol>(i));
        if (!inserted)
            throw std::invalid_argument("duplicate alphabet token: '" + tok + "'");
    }
}

std::optional<Symbol> Alphabet::encode(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool Alphabet::single_char_tokens() const {
    for (const auto& t : tokens_)
        if (t.size() != 1) return false;
    return true;
}

namespace {

std::vector<std::string> split_tokens(std::string_view text, SeqFileMode mode) {
    std::vector<std::string> out;
    if (mode == SeqFileMode::tokenized) {
        std::string cur;
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) out.push_back(std::move(cur));
    } else {
        for (char c : text) {
            if (c == '\n' || c == '\r') continue;
            out.emplace_back(1, c);
        }
    }
    return out;
}

} // namespace

std::pair<Sequence, Alphabet> decode_text(std::string_view text,
                                          const std::optional<Alphabet>& alphabet,
                                          SeqFileMode mode) {
    const std::vector<std::string> toks = split_tokens(text, mode);
    if (toks.empty())
        throw std::runtime_error("empty sequence: no symbols found");

    Sequence seq;
    seq.reserve(toks.size());
    if (alphabet.has_value()) {
        for (const auto& t : toks) {
            auto s = alphabet->encode(t);
            if (!s.has_value())
                throw std::runtime_error("unknown token '" + t + "' (not in supplied alphabet)");
            seq.push_back(*s);
        }
        return {std::move(seq), *alphabet};
    }

    // Infer the alphabet in first-seen order.
    std::vector<std::string> tokens;
    std::unordered_map<std::string, Symbol> index;
    for (const auto& t : toks) {
        auto it = index.find(t);
        if (it == index.end()) {
            if (tokens.size() >= static_cast<std::size_t>(kMaxAlphabetSize))
                throw std::runtime_error("inferred alphabet exceeds " +
                                         std::to_string(kMaxAlphabetSize) + " symbols");
            index.emplace(t, static_cast<Symbol>(tokens.size()));
            it = index.find(t);
            tokens.push_back(t);
        }
        seq.push_back(it->second);
    }
    if (tokens.size() < 2)
        throw std::runtime_error("inferred alphabet has fewer than 2 symbols");
    return {std::move(seq), Alphabet(std::move(tokens))};
}

std::pair<Sequence, Alphabet> load_sequence(const std::string& path,
                                            const std::optional<Alphabet>& alphabet,
                                            SeqFileMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open sequence file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return decode_text(buf.str(), alphabet, mode);
}

void write_sequence(const std::string& path, const Sequence& seq, const Alphabet& alphabet) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    const std::size_t per_line = 64;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] >= alphabet.size())
            throw std::runtime_error("symbol index out of range for alphabet");
        out << alphabet.token(seq[i]);
        out << (((i + 1) % per_line == 0 || i + 1 == seq.size()) ? '\n' : ' ');
    }
    if (!out)
        throw std::runtime_error("failed writing sequence file: " + path);
}

std::string context_display(const Context& ctx, const Alphabet& alphabet) {
    std::string out;
    const bool compact = alphabet.single_char_tokens();
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        const Symbol a = static_cast<Symbol>(static_cast<unsigned char>(ctx[i]));
        if (a >= alphabet.size())
            throw std::runtime_error("context symbol out of range for alphabet");
        if (i > 0 && !compact) out.push_back(' ');
        out += alphabet.token(a);
    }
    return out;
}

Context context_parse(std::string_view text, const Alphabet& alphabet) {
    Context ctx;
    if (alphabet.single_char_tokens()) {
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            auto s = alphabet.encode(std::string_view(&c, 1));
            if (!s.has_value())
                throw std::runtime_error("unknown symbol '" + std::string(1, c) + "' in context");
            ctx.push_back(static_cast<char>(*s));
        }
    } else {
        std::istringstream iss{std::string(text)};
        for (std::string tok; iss >> tok;) {
            auto s = alphabet.encode(tok);
            if (!s.has_value())
                throw std::runtime_error("unknown token '" + tok + "' in context");
            ctx.push_back(static_cast<char>(*s));
        }
    }
    return ctx;
}

} // namespace vlmc
