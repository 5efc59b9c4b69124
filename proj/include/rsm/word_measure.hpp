#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rsm/alphabet.hpp"
#include "rsm/distribution.hpp"

namespace rsm {

/// Measure on words of a fixed depth, stored densely by word_index.
template <class T>
class StationaryWordMeasure {
public:
    StationaryWordMeasure() = default;
    StationaryWordMeasure(FiniteAlphabet alphabet, std::size_t depth, std::vector<T> mass,
                          double tol = ScalarTraits<T>::default_tolerance());

    const FiniteAlphabet& alphabet() const { return alphabet_; }
    std::size_t depth() const { return depth_; }
    const T& mass(WordView w) const;
    const T& mass_at(std::size_t index) const { return mass_[index]; }
    const std::vector<T>& masses() const { return mass_; }

    /// Law of the most recent `c` symbols.
    StationaryWordMeasure marginal_recent(std::size_t c) const;
    /// Law of the oldest `c` symbols, re-indexed as a depth-c word measure.
    StationaryWordMeasure marginal_oldest(std::size_t c) const;

private:
    FiniteAlphabet alphabet_;
    std::size_t depth_ = 0;
    std::vector<T> mass_;
};

template <class T>
struct StationarityReport {
    T discrepancy{};         // max |left marginal - right marginal|
    bool passed = false;
    std::optional<Word> witness;  // (depth-1)-word with the largest discrepancy
    T total{};
};

template <class T>
StationarityReport<T> check_stationary(const StationaryWordMeasure<T>& mu,
                                       double tol = ScalarTraits<T>::default_tolerance());

/// Joint law of (older extension symbol x, newer extension symbol y), cells[x * k + y].
template <class T>
struct JointLaw {
    std::size_t k = 0;
    std::vector<T> cells;
    T& at(Symbol x, Symbol y) { return cells[x * k + y]; }
    const T& at(Symbol x, Symbol y) const { return cells[x * k + y]; }
};

/// Given the middle word a (most recent first) and the conditional laws of the
/// older and newer extension symbols, returns a coupling of the two.
template <class T>
using CouplingRule =
    std::function<JointLaw<T>(WordView middle, const Distribution<T>& older, const Distribution<T>& newer)>;

template <class T>
CouplingRule<T> independent_coupling();

template <class T>
CouplingRule<T> maximal_coupling();

/// Couples through a transition oracle: C(x, y) = older(x) * cond(middle + x)(y).
template <class T>
CouplingRule<T> chain_coupling(std::function<Distribution<T>(WordView)> cond);

template <class T>
StationaryWordMeasure<T> extend_stationary(const StationaryWordMeasure<T>& mu, const CouplingRule<T>& rule,
                                           double tol = ScalarTraits<T>::default_tolerance());

}  // namespace rsm
