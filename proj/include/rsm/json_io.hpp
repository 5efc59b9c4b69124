#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "rsm/determinize.hpp"
#include "rsm/representation.hpp"

namespace rsm {

using json = nlohmann::ordered_json;

/// Exact values are written as "p/q" strings, floating ones as shortest decimals.
template <class T>
json value_to_json(const T& x);

/// Accepts strings ("p/q", decimals) and JSON numbers. `where` is a JSON pointer used in errors.
template <class T>
T value_from_json(const json& j, const std::string& where);

json alphabet_to_json(const FiniteAlphabet& a);
FiniteAlphabet alphabet_from_json(const json& j, const std::string& where);

template <class T>
json measure_to_json(const StationaryWordMeasure<T>& m);
template <class T>
StationaryWordMeasure<T> measure_from_json(const json& j);

/// Chain spec with optional dominating measure and name.
template <class T>
struct ChainSpec {
    std::string name = "chain";
    MarkovOrderM<T> chain;
    std::optional<DominatingMeasure<T>> dominating;
};

template <class T>
json chain_to_json(const MarkovOrderM<T>& chain, const std::optional<DominatingMeasure<T>>& dominating = {},
                   const std::string& name = "");
template <class T>
ChainSpec<T> chain_from_json(const json& j);

/// Functional tables are written out entry by entry.
template <class T>
json representation_to_json(const RandomMarkovRepresentation<T>& rep);
template <class T>
RandomMarkovRepresentation<T> representation_from_json(const json& j);

/// Parses text, reporting syntax errors as Parse errors.
json parse_json_text(const std::string& text, const std::string& source);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace rsm
