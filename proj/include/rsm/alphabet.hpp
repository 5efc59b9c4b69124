#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rsm {

using Symbol = std::uint32_t;

/// Past words are stored most recent first: w[0] is the symbol at time -1.
using Word = std::vector<Symbol>;
using WordView = std::span<const Symbol>;

class FiniteAlphabet {
public:
    FiniteAlphabet() = default;
    explicit FiniteAlphabet(std::vector<std::string> labels);

    /// Alphabet with labels "0", "1", ..., "k-1".
    static FiniteAlphabet numbered(std::size_t k, std::size_t first = 0);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(Symbol s) const;
    const std::vector<std::string>& labels() const { return labels_; }
    Symbol index_of(std::string_view label) const;
    bool contains(std::string_view label) const;

    bool operator==(const FiniteAlphabet& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Symbol> index_;
};

/// Comma separated labels, most recent first. The empty word is "".
std::string format_word(const FiniteAlphabet& alphabet, WordView w);
Word parse_word(const FiniteAlphabet& alphabet, std::string_view text);

/// k^length, throwing Unsupported when it exceeds `limit`.
std::size_t word_count(std::size_t k, std::size_t length, std::size_t limit = std::size_t(1) << 32);

/// Mixed-radix index sum_j w[j] k^j, so the index of a prefix is index mod k^c.
std::size_t word_index(WordView w, std::size_t k);
Word word_at(std::size_t index, std::size_t length, std::size_t k);

/// Calls f(WordView) for every word of the given length in index order.
template <class F>
void for_each_word(std::size_t k, std::size_t length, F&& f) {
    std::size_t total = word_count(k, length);
    Word w(length, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        f(WordView(w));
        for (std::size_t j = 0; j < length; ++j) {
            if (++w[j] < k) break;
            w[j] = 0;
        }
    }
}

inline WordView prefix(WordView w, std::size_t n) { return w.first(n < w.size() ? n : w.size()); }

}  // namespace rsm
