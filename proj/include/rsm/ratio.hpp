#pragma once

#include <vector>

#include "rsm/representation.hpp"

namespace rsm {

/// Level depths and masses of the ratio construction.
template <class T>
struct RatioLevels {
    std::vector<T> p;
    std::vector<std::size_t> n;          // non-decreasing, n[i] >= 1
    std::vector<double> threshold;       // p_1 / 2, then p_i / (2 S_i)
    std::vector<double> deviation;       // exp(r(n_i)) - 1 actually used
    T residual{};                        // 1 - sum p

    std::size_t size() const { return p.size(); }
    /// S_i = p_1 + ... + p_i (1-based i), S_0 = 0.
    T partial_sum(std::size_t i) const;
};

/// p_i = 2^-i for i < count; the last level also takes the tail when fold_tail is set.
template <class T>
std::vector<T> dyadic_masses(std::size_t count, bool fold_tail = true);

/// For each level the least n >= max(1, n_{i-1}) with exp(r(m)) - 1 below the threshold for all
/// probed m >= n. Throws CannotCertify when the coefficients never get that small.
template <class T>
RatioLevels<T> choose_levels(const RatioCoefficients& rc, const std::vector<T>& p);

/// tau_i on the past w (i is 1-based); throws TauNegative on a negative entry.
template <class T>
Distribution<T> tau(const ConditionalModel<T>& model, const RatioLevels<T>& levels, std::size_t i, WordView w,
                    double tol = ScalarTraits<T>::default_tolerance());

struct RatioOptions {
    std::size_t probe_depth = 12;    // ratio coefficients are probed for n <= probe_depth
    std::size_t scan_depth = 0;      // word length for measured coefficients (0: order or probe depth)
    WordFilter filter = WordFilter::positive_only;
    double tolerance = -1.0;
};

/// Representation with P(L = n_i) = p_i and general tables tau_i.
template <class T>
RandomMarkovRepresentation<T> ratio_decompose(const ConditionalModel<T>& model, const std::vector<T>& p,
                                              const RatioOptions& opts = {}, RatioLevels<T>* levels_out = nullptr);

/// Coefficients used by ratio_decompose: measured values, raised to the declared bound when one exists.
template <class T>
RatioCoefficients ratio_bounds_for(const ConditionalModel<T>& model, const RatioOptions& opts);

}  // namespace rsm
