#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rsm/model.hpp"

namespace rsm {

enum class TableKind { deterministic, general };

/// Where a determinized level came from: base depth and digit positions.
struct LevelOrigin {
    std::uint64_t base_depth = 0;
    std::vector<std::uint64_t> digits;
};

/// One level of a representation: depth n_k, mass p_k and table values
/// looked up on the c most recent symbols of the past (c <= n_k).
template <class T>
class TableFunction {
public:
    using Functional = std::function<Distribution<T>(WordView)>;

    static TableFunction deterministic(std::uint64_t depth, T mass, std::size_t context, std::size_t alphabet_size,
                                       std::vector<Symbol> assignment);
    static TableFunction general(std::uint64_t depth, T mass, std::size_t context, std::size_t alphabet_size,
                                 std::vector<Distribution<T>> values);
    static TableFunction functional(std::uint64_t depth, T mass, std::size_t context, std::size_t alphabet_size,
                                    Functional f);

    std::uint64_t depth() const { return depth_; }
    const T& mass() const { return mass_; }
    std::size_t context() const { return context_; }
    std::size_t alphabet_size() const { return k_; }
    TableKind storage_kind() const {
        return std::holds_alternative<std::vector<Symbol>>(store_) ? TableKind::deterministic : TableKind::general;
    }
    bool is_explicit() const { return !std::holds_alternative<Functional>(store_); }
    std::size_t entry_count() const;

    /// Normalized table values at the past (only its context prefix is read).
    Distribution<T> value(WordView past) const;
    Distribution<T> value_at(std::size_t context_index) const;
    /// Assigned symbol for deterministic storage.
    Symbol symbol_at(std::size_t context_index) const { return std::get<std::vector<Symbol>>(store_)[context_index]; }
    const std::vector<Symbol>& symbols() const { return std::get<std::vector<Symbol>>(store_); }
    /// Adds mass * value(past) into acc.
    void add_contribution(WordView past, std::vector<T>& acc) const;

    std::optional<LevelOrigin> origin;

    TableFunction with_mass(T m) const {
        TableFunction t = *this;
        t.mass_ = std::move(m);
        return t;
    }

private:
    std::uint64_t depth_ = 0;
    T mass_{};
    std::size_t context_ = 0;
    std::size_t k_ = 0;
    std::variant<std::vector<Symbol>, std::vector<Distribution<T>>, Functional> store_;
};

/// Law of the look-back distance L_0.
template <class T>
struct LookBackDistribution {
    std::vector<std::pair<std::uint64_t, T>> levels;
    T residual{};

    /// P(L_0 > n), counting the residual as an unbounded look-back.
    T tail(std::uint64_t n) const;
    T mass_total() const;
    double expected() const;
};

template <class T>
struct LevelDiagnostics {
    T r{};
    T var_at_n{};
    std::optional<Word> witness;
    T gamma{};
    std::size_t M = 0;
    bool capped = false;  // variant (b): r came from the (1 - 1/M^2) cap
};

struct IndexFunctionInfo {
    std::string family;
    std::size_t arity = 0;
};

template <class T>
struct RandomMarkovRepresentation {
    FiniteAlphabet alphabet;
    TableKind kind = TableKind::deterministic;  // claimed kind, checked by verification
    std::vector<TableFunction<T>> tables;
    T residual{};
    std::vector<LevelDiagnostics<T>> diagnostics;
    std::optional<IndexFunctionInfo> index_function;
    std::map<std::string, std::string> notes;

    LookBackDistribution<T> lookback() const;
    double expected_lookback() const;
    std::size_t max_context() const;
    std::uint64_t max_depth() const;
    bool complete(double tol = 0.0) const { return le_tol(residual, ScalarTraits<T>::zero(), tol); }
};

/// Builds a representation whose residual is 1 - sum of masses.
template <class T>
RandomMarkovRepresentation<T> make_representation(FiniteAlphabet alphabet, TableKind kind,
                                                  std::vector<TableFunction<T>> tables);

/// A complete representation together with the model it represents.
template <class T>
class CompleteRMP {
public:
    CompleteRMP(RandomMarkovRepresentation<T> rep, std::shared_ptr<const ConditionalModel<T>> base = {},
                double tol = ScalarTraits<T>::default_tolerance());
    const RandomMarkovRepresentation<T>& representation() const { return rep_; }
    const std::shared_ptr<const ConditionalModel<T>>& base() const { return base_; }

private:
    RandomMarkovRepresentation<T> rep_;
    std::shared_ptr<const ConditionalModel<T>> base_;
};

/// cond(w) minus the contributions of the given tables.
template <class T>
SubMeasure<T> leftover(const ConditionalModel<T>& model, const std::vector<TableFunction<T>>& tables, WordView w,
                       double tol = ScalarTraits<T>::default_tolerance());

}  // namespace rsm
