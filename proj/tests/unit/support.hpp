#pragma once

#include <random>
#include <string>
#include <vector>

#include "rsm/catalog.hpp"

namespace rsm::testing {

inline Rational q(const char* text) { return parse_rational(text); }

inline Distribution<Rational> dist(std::initializer_list<const char*> xs) {
    std::vector<Rational> v;
    for (const char* x : xs) v.push_back(q(x));
    return Distribution<Rational>(v);
}

// Random strictly positive row with small integer weights, exact.
inline Distribution<Rational> random_row(std::mt19937_64& rng, std::size_t k, int lo = 1, int hi = 9) {
    std::uniform_int_distribution<int> pick(lo, hi);
    std::vector<long> w(k);
    long total = 0;
    for (auto& x : w) total += (x = pick(rng));
    std::vector<Rational> m;
    for (long x : w) {
        Rational r(x, total);
        r.canonicalize();
        m.push_back(r);
    }
    return Distribution<Rational>(m);
}

inline MarkovOrderM<Rational> random_chain(std::mt19937_64& rng, std::size_t k, std::size_t order, int lo = 1,
                                           int hi = 9) {
    std::vector<Distribution<Rational>> rows;
    std::size_t states = word_count(k, order);
    for (std::size_t s = 0; s < states; ++s) rows.push_back(random_row(rng, k, lo, hi));
    return MarkovOrderM<Rational>(FiniteAlphabet::numbered(k), order, rows);
}

// Sum over levels of mass * table value on the past w, computed directly from the tables.
template <class T>
std::vector<T> mixture(const RandomMarkovRepresentation<T>& rep, WordView w) {
    std::vector<T> acc(rep.alphabet.size(), ScalarTraits<T>::zero());
    for (const auto& t : rep.tables) {
        Distribution<T> d = t.value(w);
        for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += t.mass() * d[a];
    }
    return acc;
}

}  // namespace rsm::testing
