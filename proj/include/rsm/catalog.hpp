#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsm/representation.hpp"

namespace rsm {

template <class T>
struct CatalogEntry {
    std::string name;
    std::size_t truncation = 0;
    std::shared_ptr<const ConditionalModel<T>> model;
    std::optional<MarkovOrderM<T>> chain;
    std::optional<RandomMarkovRepresentation<T>> representation;
    std::map<std::string, std::string> metadata;
};

/// Names accepted by example().
std::vector<std::string> example_names();

/// Builds a catalog example; `truncation` overrides the default truncation level.
template <class T>
CatalogEntry<T> example(std::string_view name, std::optional<std::size_t> truncation = {});

template <class T>
MarkovOrderM<T> two_state_chain();

/// i.i.d. chain on {0,1} with P(0) = p0.
template <class T>
MarkovOrderM<T> bernoulli_chain(const T& p0);

template <class T>
MarkovOrderM<T> rmnodom_chain(std::size_t n);

template <class T>
MarkovOrderM<T> not_determ_chain(std::size_t n);

template <class T>
MarkovOrderM<T> two_step_chain(std::size_t n);

/// Look-back masses of the truncated rm-notMarkov example: 2^-k for k < t, tail at t.
template <class T>
std::vector<T> rm_not_markov_masses(std::size_t t);

/// Bounded-depth oracle for the random-walk-in-bins example with bins 1..k.
template <class T>
ConditionalModel<T> rwbins_model(std::size_t bins);

/// Positive-probability band pasts used to probe rwbins at depth n.
std::vector<Word> rwbins_probe_words(std::size_t bins, std::size_t n);

/// Alphabet index of the rwbins symbol (bin b, position y).
Symbol rwbins_symbol(std::size_t b, std::size_t y);

}  // namespace rsm
