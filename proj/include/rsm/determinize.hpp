#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsm/representation.hpp"

namespace rsm {

/// First `depth` binary digits of q in [0,1]; dyadic q > 0 uses the expansion ending in ones.
template <class T>
std::vector<std::uint8_t> canonical_digits(const T& q, std::size_t depth);

/// Digits for a two-way split with P(one) = q: {zero branch, one branch}.
/// The one branch is canonical and the zero branch is its complement.
template <class T>
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> split_digits(const T& q, std::size_t depth);

/// Value of a digit prefix, sum_k d_k 2^-k.
template <class T>
T digits_value(const std::vector<std::uint8_t>& digits);

enum class IndexFamily { prime, balister };

IndexFamily parse_family(const std::string& name);
std::string family_name(IndexFamily f);

/// i-th prime, 1-based.
std::uint64_t nth_prime(std::uint64_t i);

/// j-th smallest element (1-based) of the Balister set B_i.
std::uint64_t balister_element(std::uint64_t i, std::uint64_t j);

/// B_i^n in increasing order, generated by the set recursion.
std::vector<std::uint64_t> balister_level(std::uint64_t i, std::size_t n);

class IndexFunction {
public:
    IndexFunction(IndexFamily family, std::size_t arity);

    IndexFamily family() const { return family_; }
    std::size_t arity() const { return arity_; }

    /// F(i_0, ..., i_n); throws Overflow when the value leaves 64 bits.
    std::uint64_t operator()(std::span<const std::uint64_t> args) const;

    /// j-th smallest element of B_i.
    std::uint64_t f1(std::uint64_t i, std::uint64_t j) const;

    /// Prime family only: (m, e) with F = q_m^e, where m = F_{n-1}(i_0..i_{n-1}) and e = i_n.
    /// Distinct keys are distinct integers by unique factorization.
    std::pair<std::uint64_t, std::uint64_t> prime_key(std::span<const std::uint64_t> args) const;

private:
    IndexFamily family_;
    std::size_t arity_;
};

struct FWeight {
    double partial = 0.0;     // sum_{j <= depth} F_1(i0, j) 2^-j
    double tail_bound = 0.0;  // bound on the rest (Balister only)
    double total = 0.0;
    double bound = 0.0;       // 35 i0
    bool bound_claimed = false;
    bool within_bound = false;
    bool diverges = false;    // terms do not decay (prime family)
};

FWeight f_weight(const IndexFunction& f, std::uint64_t i0, std::size_t depth);

template <class T>
struct DeterminizeAccounting {
    std::uint64_t base_depth = 0;
    T base_mass{};
    T conserved{};  // total mass of the new levels built from this base level
    T gap{};        // base_mass - conserved
    std::size_t new_levels = 0;
};

template <class T>
struct DeterminizeResult {
    RandomMarkovRepresentation<T> rep;
    std::vector<DeterminizeAccounting<T>> accounting;
    std::size_t digit_depth = 0;
    std::size_t bits = 0;
    double base_expected_lookback = 0.0;
    /// Base levels merged by depth; used for reconstruction.
    RandomMarkovRepresentation<T> merged_base;
};

template <class T>
DeterminizeResult<T> determinize(const RandomMarkovRepresentation<T>& rep, const IndexFunction& f,
                                 std::size_t digit_depth = 40, double tol = ScalarTraits<T>::default_tolerance());

/// max over base level, context and symbol of |determinized mixture - base table value|.
template <class T>
T reconstruction_error(const DeterminizeResult<T>& result);

struct ExpectedLookbackCheck {
    double partial = 0.0;     // sum of F * mass over the built levels
    double bound = 0.0;       // 35^n E[L]
    bool infinite = false;    // E[L-hat] diverges (prime family)
    bool vacuous = false;     // base E[L] infinite
    bool satisfied = false;
};

template <class T>
ExpectedLookbackCheck det_expected_lookback(const DeterminizeResult<T>& result, const IndexFunction& f,
                                            std::optional<double> base_expected = {});

}  // namespace rsm
