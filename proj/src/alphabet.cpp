#include "rsm/alphabet.hpp"

#include "rsm/errors.hpp"

namespace rsm {

FiniteAlphabet::FiniteAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw Error(ErrorCode::Precondition, "alphabet must contain at least one symbol");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const std::string& l = labels_[i];
        if (l.empty() || l.find(',') != std::string::npos)
            throw Error(ErrorCode::Precondition, "alphabet label '" + l + "' is empty or contains a comma");
        if (!index_.emplace(l, static_cast<Symbol>(i)).second)
            throw Error(ErrorCode::Precondition, "duplicate alphabet label '" + l + "'");
    }
}

FiniteAlphabet FiniteAlphabet::numbered(std::size_t k, std::size_t first) {
    std::vector<std::string> labels;
    labels.reserve(k);
    for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(first + i));
    return FiniteAlphabet(std::move(labels));
}

const std::string& FiniteAlphabet::label(Symbol s) const {
    if (s >= labels_.size())
        throw Error(ErrorCode::AlphabetMismatch, "symbol index " + std::to_string(s) + " out of range");
    return labels_[s];
}

Symbol FiniteAlphabet::index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) throw Error(ErrorCode::AlphabetMismatch, "unknown symbol '" + std::string(label) + "'");
    return it->second;
}

bool FiniteAlphabet::contains(std::string_view label) const { return index_.count(std::string(label)) > 0; }

std::string format_word(const FiniteAlphabet& alphabet, WordView w) {
    std::string out;
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (j) out += ',';
        out += alphabet.label(w[j]);
    }
    return out;
}

Word parse_word(const FiniteAlphabet& alphabet, std::string_view text) {
    Word w;
    if (text.empty()) return w;
    std::size_t start = 0;
    while (true) {
        auto comma = text.find(',', start);
        std::string_view part = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        w.push_back(alphabet.index_of(part));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return w;
}

std::size_t word_count(std::size_t k, std::size_t length, std::size_t limit) {
    std::size_t total = 1;
    for (std::size_t j = 0; j < length; ++j) {
        if (k != 0 && total > limit / k)
            throw Error(ErrorCode::Unsupported, "word enumeration of " + std::to_string(k) + "^" +
                                                    std::to_string(length) + " words exceeds the enumeration limit");
        total *= k;
    }
    return total;
}

std::size_t word_index(WordView w, std::size_t k) {
    std::size_t idx = 0;
    for (std::size_t j = w.size(); j-- > 0;) idx = idx * k + w[j];
    return idx;
}

Word word_at(std::size_t index, std::size_t length, std::size_t k) {
    Word w(length);
    for (std::size_t j = 0; j < length; ++j) {
        w[j] = static_cast<Symbol>(index % k);
        index /= k;
    }
    return w;
}

}  // namespace rsm
