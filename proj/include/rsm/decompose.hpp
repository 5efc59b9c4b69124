#pragma once

#include <string>
#include <vector>

#include "rsm/representation.hpp"

namespace rsm {

struct DecomposeOptions {
    double residual_target = 1e-9;
    std::size_t k_max = 64;
    WordFilter filter = WordFilter::positive_only;
    std::size_t max_words = std::size_t(1) << 22;  // per-level enumeration guard
    std::size_t max_depth = 1 << 16;               // search limit for n_k
    double tolerance = -1.0;                       // < 0: backend default
};

/// Least M with sum over symbols of 1-based index > M of mu strictly below gamma/10.
template <class T>
std::size_t choose_M(const DominatingMeasure<T>& mu, const T& gamma);

/// General variant: deterministic tables, n_k from 2 var(n_k) <= 9 gamma / (10 M).
template <class T>
RandomMarkovRepresentation<T> decompose(const ConditionalModel<T>& model, const DecomposeOptions& opts = {});

/// Finite expected look-back variant with the (1 - 1/M^2) cap.
template <class T>
RandomMarkovRepresentation<T> decompose_finite_expectation(const ConditionalModel<T>& model,
                                                           const DecomposeOptions& opts = {});

/// 2 M^2 (1 + sum var) with M the alphabet size.
template <class T>
double finite_expectation_bound(const ConditionalModel<T>& model);

struct VerifyOptions {
    std::size_t depth = 0;  // 0: smallest admissible depth
    double tolerance = -1.0;
    WordFilter filter = WordFilter::positive_only;
};

struct VerifyFailure {
    std::string invariant;
    std::string witness;
    std::string detail;
};

template <class T>
struct LookbackCheck {
    std::size_t n = 0;
    T lhs{};   // sup_w tv(cond(w), cond(n-past of w)) or measured var(n)
    T rhs{};   // P(L_0 > n) or 2 P(L_0 > n)
    bool ok = true;
};

template <class T>
struct VerifyReport {
    bool passed = true;
    bool exact = false;  // finite order and depth >= order
    std::size_t depth = 0;
    std::size_t words_checked = 0;
    T residual{};
    T max_gap{};  // max over words of sum_a |cond - mixture|
    std::vector<LookbackCheck<T>> tv_lookback;
    std::vector<LookbackCheck<T>> necessity;
    std::vector<VerifyFailure> failures;
};

template <class T>
VerifyReport<T> verify_representation(const ConditionalModel<T>& model, const RandomMarkovRepresentation<T>& rep,
                                      const VerifyOptions& opts = {});

template <class T>
struct CollapseRow {
    std::size_t depth = 0;
    T value{};  // inf over scanned words of max_a cond(w)[a]
    Word witness;
    std::size_t words = 0;
};

template <class T>
std::vector<CollapseRow<T>> demonstrate_collapse(const ConditionalModel<T>& model,
                                                 const std::vector<std::size_t>& depths);

}  // namespace rsm
