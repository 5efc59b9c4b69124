#pragma once

#include <span>
#include <string>
#include <vector>

#include "rsm/alphabet.hpp"
#include "rsm/errors.hpp"
#include "rsm/numeric.hpp"

namespace rsm {

/// Probability law on a finite alphabet, indexed by symbol.
template <class T>
class Distribution {
public:
    Distribution() = default;
    explicit Distribution(std::vector<T> mass, double tol = ScalarTraits<T>::default_tolerance())
        : mass_(std::move(mass)) {
        if (mass_.empty()) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
        T total = ScalarTraits<T>::zero();
        for (std::size_t a = 0; a < mass_.size(); ++a) {
            if (mass_[a] < 0 && !is_zero_tol(mass_[a], tol))
                throw Error(ErrorCode::InvalidDistribution,
                            "negative mass " + format_value(mass_[a]) + " at symbol " + std::to_string(a));
            total += mass_[a];
        }
        if (!eq_tol(total, ScalarTraits<T>::one(), tol))
            throw Error(ErrorCode::InvalidDistribution, "total mass " + format_value(total) + " differs from 1");
    }

    static Distribution point(std::size_t k, Symbol a) {
        std::vector<T> m(k, ScalarTraits<T>::zero());
        m.at(a) = ScalarTraits<T>::one();
        return Distribution(std::move(m));
    }
    static Distribution uniform(std::size_t k) {
        std::vector<T> m(k, T(ScalarTraits<T>::one() / T(static_cast<long>(k))));
        if constexpr (!ScalarTraits<T>::exact) return Distribution(std::move(m), 1e-9);
        return Distribution(std::move(m));
    }

    std::size_t size() const { return mass_.size(); }
    const T& operator[](Symbol a) const { return mass_[a]; }
    std::span<const T> masses() const { return mass_; }
    const std::vector<T>& vec() const { return mass_; }
    bool operator==(const Distribution& o) const { return mass_ == o.mass_; }

private:
    std::vector<T> mass_;
};

/// Nonnegative measure with total at most one (a leftover measure).
template <class T>
class SubMeasure {
public:
    SubMeasure() = default;
    explicit SubMeasure(std::vector<T> mass) : mass_(std::move(mass)) {}
    static SubMeasure zeros(std::size_t k) { return SubMeasure(std::vector<T>(k, ScalarTraits<T>::zero())); }

    std::size_t size() const { return mass_.size(); }
    const T& operator[](Symbol a) const { return mass_[a]; }
    T& operator[](Symbol a) { return mass_[a]; }
    std::span<const T> masses() const { return mass_; }
    T total() const {
        T t = ScalarTraits<T>::zero();
        for (const T& x : mass_) t += x;
        return t;
    }

private:
    std::vector<T> mass_;
};

template <class T>
T tv_distance(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::AlphabetMismatch, "distributions over alphabets of size " + std::to_string(a.size()) +
                                                     " and " + std::to_string(b.size()));
    T s = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < a.size(); ++i) s += abs_value(T(a[i] - b[i]));
    return T(s / T(2));
}

/// Half the L1 distance.
template <class T>
T tv_distance(const Distribution<T>& a, const Distribution<T>& b) {
    return tv_distance<T>(a.masses(), b.masses());
}

}  // namespace rsm
