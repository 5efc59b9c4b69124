#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsm/alphabet.hpp"
#include "rsm/distribution.hpp"
#include "rsm/word_measure.hpp"

namespace rsm {

enum class WordFilter { positive_only, all_words };

/// Finite measure bounding every conditional law from above.
template <class T>
class DominatingMeasure {
public:
    DominatingMeasure() = default;
    explicit DominatingMeasure(std::vector<T> mass) : mass_(std::move(mass)) {
        for (const T& x : mass_)
            if (x < 0) throw Error(ErrorCode::InvalidDistribution, "dominating measure has a negative entry");
    }
    static DominatingMeasure counting(std::size_t k) {
        return DominatingMeasure(std::vector<T>(k, ScalarTraits<T>::one()));
    }
    std::size_t size() const { return mass_.size(); }
    const T& operator[](Symbol a) const { return mass_[a]; }
    const std::vector<T>& masses() const { return mass_; }
    T total() const {
        T t = ScalarTraits<T>::zero();
        for (const T& x : mass_) t += x;
        return t;
    }
    /// Mass of the symbols whose 1-based index exceeds m.
    T tail_after(std::size_t m) const {
        T t = ScalarTraits<T>::zero();
        for (std::size_t a = m; a < mass_.size(); ++a) t += mass_[a];
        return t;
    }

private:
    std::vector<T> mass_;
};

/// A g-function: conditional law of the present given a finite past.
template <class T>
class ConditionalModel {
public:
    using Oracle = std::function<Distribution<T>(WordView)>;
    using Bound = std::function<T(std::size_t)>;

    struct Spec {
        std::string name;
        FiniteAlphabet alphabet;
        Oracle cond;
        Bound var_bound;                      // upper bound on var_n
        std::optional<std::size_t> order;     // finite memory, var_n = 0 for n >= order
        std::optional<DominatingMeasure<T>> dominating;
        std::optional<double> var_sum;        // declared sum of var_bound; +inf if divergent
        std::function<double(std::size_t)> ratio_bound;  // declared bound on Berbee's r_n
        std::function<bool(WordView)> positive;          // positive stationary probability of a past
        std::function<std::vector<Word>(std::size_t)> probe_words;  // custom scan family
        std::optional<StationaryWordMeasure<T>> stationary;       // depth = order
        std::map<std::string, std::string> metadata;
    };

    ConditionalModel() = default;
    explicit ConditionalModel(Spec spec);

    const std::string& name() const { return spec_.name; }
    const FiniteAlphabet& alphabet() const { return spec_.alphabet; }
    std::size_t alphabet_size() const { return spec_.alphabet.size(); }
    Distribution<T> cond(WordView w) const { return spec_.cond(w); }
    T var_bound(std::size_t n) const { return spec_.var_bound(n); }
    const std::optional<std::size_t>& order() const { return spec_.order; }
    const std::optional<DominatingMeasure<T>>& dominating() const { return spec_.dominating; }
    DominatingMeasure<T> dominating_or_counting() const {
        return spec_.dominating ? *spec_.dominating : DominatingMeasure<T>::counting(alphabet_size());
    }
    const std::optional<double>& var_sum() const { return spec_.var_sum; }
    bool has_ratio_bound() const { return static_cast<bool>(spec_.ratio_bound); }
    double ratio_bound(std::size_t n) const { return spec_.ratio_bound(n); }
    bool has_positivity() const { return static_cast<bool>(spec_.positive); }
    bool positive(WordView w) const { return !spec_.positive || spec_.positive(w); }
    bool has_probe_words() const { return static_cast<bool>(spec_.probe_words); }
    std::vector<Word> probe_words(std::size_t n) const { return spec_.probe_words(n); }
    const std::optional<StationaryWordMeasure<T>>& stationary() const { return spec_.stationary; }
    const std::map<std::string, std::string>& metadata() const { return spec_.metadata; }
    const Spec& spec() const { return spec_; }

    /// Number of recent symbols that actually influence a depth-n context.
    std::size_t context_length(std::size_t n) const { return spec_.order ? std::min(n, *spec_.order) : n; }

private:
    Spec spec_;
};

/// Past words scanned for sup/inf computations: the model's probe family when
/// present, otherwise all words, restricted to positive ones when requested.
template <class T>
std::vector<Word> scan_words(const ConditionalModel<T>& model, std::size_t length, WordFilter filter,
                             std::size_t limit = std::size_t(1) << 22);

/// Finite-order chain with rows indexed by the m most recent symbols.
template <class T>
class MarkovOrderM {
public:
    MarkovOrderM() = default;
    MarkovOrderM(FiniteAlphabet alphabet, std::size_t order, std::vector<Distribution<T>> rows);

    const FiniteAlphabet& alphabet() const { return alphabet_; }
    std::size_t order() const { return order_; }
    const Distribution<T>& row(WordView m_word) const;
    const Distribution<T>& row_at(std::size_t index) const { return rows_[index]; }
    const std::vector<Distribution<T>>& rows() const { return rows_; }
    std::size_t state_count() const { return rows_.size(); }

private:
    FiniteAlphabet alphabet_;
    std::size_t order_ = 0;
    std::vector<Distribution<T>> rows_;
};

/// Invariant depth-m word measure of the chain (depth 0 for order 0).
template <class T>
StationaryWordMeasure<T> stationary_markov(const MarkovOrderM<T>& chain,
                                           double tol = ScalarTraits<T>::default_tolerance());

/// Wraps a chain as a conditional model with exact variations. The stationary
/// measure is attached when it is unique.
template <class T>
ConditionalModel<T> to_model(const MarkovOrderM<T>& chain, std::optional<DominatingMeasure<T>> dominating = {},
                             std::string name = "chain",
                             std::optional<StationaryWordMeasure<T>> stationary = {});

template <class T>
struct VariationResult {
    T value{};
    bool exact = false;     // false: lower estimate from finite-depth pasts
    T declared_bound{};     // var_bound(k)
    std::size_t depth = 0;  // word length actually scanned
    std::optional<Word> witness;
};

template <class T>
VariationResult<T> variation(const ConditionalModel<T>& model, std::size_t k, std::size_t depth,
                             WordFilter filter = WordFilter::positive_only);

struct RatioResult {
    double log_ratio = 0.0;  // +inf when a positive value meets a zero
    bool infinite = false;
    bool exact = false;
    std::optional<double> declared_bound;
    std::size_t depth = 0;
};

template <class T>
RatioResult ratio_coeff(const ConditionalModel<T>& model, std::size_t n, std::size_t depth,
                        WordFilter filter = WordFilter::positive_only);

/// Berbee coefficients r_0..r_{max_n}.
struct RatioCoefficients {
    std::vector<double> r;
    bool exact = false;
    double at(std::size_t n) const { return n < r.size() ? r[n] : (exact ? 0.0 : r.back()); }
};

template <class T>
RatioCoefficients ratio_coefficients(const ConditionalModel<T>& model, std::size_t max_n, std::size_t depth,
                                     WordFilter filter = WordFilter::positive_only);

}  // namespace rsm
