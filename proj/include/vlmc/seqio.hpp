#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace vlmc {

/// Symbol index into an Alphabet (0 .. |A|-1).
using Symbol = std::uint8_t;

/// Encoded sample: a plain array of symbol indices.
using Sequence = std::vector<Symbol>;

/// A candidate context, stored as raw symbol indices with the oldest symbol
/// first and the most recent past symbol last.
using Context = std::string;

constexpr int kMaxAlphabetSize = 255;

class Alphabet {
  public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(Symbol a) const { return tokens_[a]; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::optional<Symbol> encode(std::string_view tok) const;
    bool single_char_tokens() const;

    bool operator==(const Alphabet& other) const { return tokens_ == other.tokens_; }
    bool operator!=(const Alphabet& other) const { return !(*this == other); }

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, Symbol> index_;
};

enum class SeqFileMode { tokenized, chars };

/// Decode raw file text into a sequence. When no alphabet is supplied, one is
/// inferred in first-seen order. Newlines separate symbols in both modes and
/// are never symbols themselves.
std::pair<Sequence, Alphabet> decode_text(std::string_view text,
                                          const std::optional<Alphabet>& alphabet,
                                          SeqFileMode mode);

std::pair<Sequence, Alphabet> load_sequence(const std::string& path,
                                            const std::optional<Alphabet>& alphabet,
                                            SeqFileMode mode = SeqFileMode::tokenized);

/// Writes whitespace-separated tokens; load_sequence(tokenized) inverts this.
void write_sequence(const std::string& path, const Sequence& seq, const Alphabet& alphabet);

/// Human-readable form of a context: tokens concatenated when every token is a
/// single character, otherwise joined with spaces.
std::string context_display(const Context& ctx, const Alphabet& alphabet);
Context context_parse(std::string_view text, const Alphabet& alphabet);

} // namespace vlmc
