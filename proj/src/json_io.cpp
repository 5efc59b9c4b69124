#include "rsm/json_io.hpp"

#include <fstream>
#include <sstream>

namespace rsm {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::Parse, (where.empty() ? std::string("/") : where) + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where + "/" + key, "missing field");
    return *it;
}

std::size_t size_from_json(const json& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        fail(where, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

Word word_from_key(const FiniteAlphabet& a, const std::string& key, const std::string& where) {
    try {
        return parse_word(a, key);
    } catch (const Error& e) {
        fail(where, std::string("bad word '") + key + "': " + e.what());
    }
}

// escapes '/' and '~' in a key used inside a JSON pointer
std::string pointer_key(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

}  // namespace

template <class T>
json value_to_json(const T& x) {
    return format_value(x);
}

template <class T>
T value_from_json(const json& j, const std::string& where) {
    try {
        if (j.is_string()) return parse_value<T>(j.get<std::string>());
        if (j.is_number_integer()) return T(j.get<long>());
        if (j.is_number_float()) return ScalarTraits<T>::from_double(j.get<double>());
    } catch (const Error& e) {
        fail(where, e.what());
    }
    fail(where, "expected a number or a numeric string");
}

json alphabet_to_json(const FiniteAlphabet& a) { return json(a.labels()); }

FiniteAlphabet alphabet_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "alphabet must be an array of labels");
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].is_string())
            labels.push_back(j[i].get<std::string>());
        else if (j[i].is_number_integer())
            labels.push_back(std::to_string(j[i].get<long long>()));
        else
            fail(where + "/" + std::to_string(i), "label must be a string");
    }
    try {
        return FiniteAlphabet(std::move(labels));
    } catch (const Error& e) {
        fail(where, e.what());
    }
}

template <class T>
json measure_to_json(const StationaryWordMeasure<T>& m) {
    json j;
    j["alphabet"] = alphabet_to_json(m.alphabet());
    j["depth"] = m.depth();
    json mass = json::object();
    const std::size_t k = m.alphabet().size();
    for (std::size_t idx = 0; idx < m.masses().size(); ++idx)
        mass[format_word(m.alphabet(), word_at(idx, m.depth(), k))] = value_to_json(m.mass_at(idx));
    j["mass"] = std::move(mass);
    return j;
}

template <class T>
StationaryWordMeasure<T> measure_from_json(const json& j) {
    FiniteAlphabet a = alphabet_from_json(field(j, "alphabet", ""), "/alphabet");
    std::size_t depth = size_from_json(field(j, "depth", ""), "/depth");
    const std::size_t k = a.size();
    std::vector<T> mass(word_count(k, depth), ScalarTraits<T>::zero());
    const json& m = field(j, "mass", "");
    if (!m.is_object()) fail("/mass", "expected an object keyed by words");
    for (const auto& [key, v] : m.items()) {
        std::string where = "/mass/" + pointer_key(key);
        Word w = word_from_key(a, key, where);
        if (w.size() != depth) fail(where, "word length differs from depth " + std::to_string(depth));
        mass[word_index(w, k)] = value_from_json<T>(v, where);
    }
    try {
        return StationaryWordMeasure<T>(std::move(a), depth, std::move(mass),
                                        ScalarTraits<T>::exact ? 0.0 : 1e-9);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse) throw;
        throw Error(e.code(), std::string("/mass: ") + e.what());
    }
}

template <class T>
json chain_to_json(const MarkovOrderM<T>& chain, const std::optional<DominatingMeasure<T>>& dominating,
                   const std::string& name) {
    json j;
    if (!name.empty()) j["name"] = name;
    j["alphabet"] = alphabet_to_json(chain.alphabet());
    j["order"] = chain.order();
    json rows = json::object();
    const std::size_t k = chain.alphabet().size();
    for (std::size_t idx = 0; idx < chain.state_count(); ++idx) {
        json row = json::array();
        for (Symbol a = 0; a < k; ++a) row.push_back(value_to_json(chain.row_at(idx)[a]));
        rows[format_word(chain.alphabet(), word_at(idx, chain.order(), k))] = std::move(row);
    }
    j["rows"] = std::move(rows);
    if (dominating) {
        json d = json::array();
        for (const auto& x : dominating->masses()) d.push_back(value_to_json(x));
        j["dominating"] = std::move(d);
    }
    return j;
}

template <class T>
ChainSpec<T> chain_from_json(const json& j) {
    ChainSpec<T> spec;
    if (j.contains("name")) {
        if (!j["name"].is_string()) fail("/name", "expected a string");
        spec.name = j["name"].get<std::string>();
    }
    FiniteAlphabet a = alphabet_from_json(field(j, "alphabet", ""), "/alphabet");
    const std::size_t order = size_from_json(field(j, "order", ""), "/order");
    const std::size_t k = a.size();
    const std::size_t states = word_count(k, order, std::size_t(1) << 24);
    std::vector<std::optional<Distribution<T>>> rows(states);
    const json& r = field(j, "rows", "");
    if (!r.is_object()) fail("/rows", "expected an object keyed by m-words");
    for (const auto& [key, v] : r.items()) {
        std::string where = "/rows/" + pointer_key(key);
        Word w = word_from_key(a, key, where);
        if (w.size() != order) fail(where, "row key must have " + std::to_string(order) + " symbols");
        if (!v.is_array() || v.size() != k) fail(where, "row must list " + std::to_string(k) + " probabilities");
        std::vector<T> p;
        for (std::size_t s = 0; s < k; ++s) p.push_back(value_from_json<T>(v[s], where + "/" + std::to_string(s)));
        try {
            rows[word_index(w, k)] = Distribution<T>(std::move(p), ScalarTraits<T>::exact ? 0.0 : 1e-9);
        } catch (const Error& e) {
            fail(where, e.what());
        }
    }
    std::vector<Distribution<T>> full;
    for (std::size_t idx = 0; idx < states; ++idx) {
        if (!rows[idx]) fail("/rows", "missing row for '" + format_word(a, word_at(idx, order, k)) + "'");
        full.push_back(std::move(*rows[idx]));
    }
    if (j.contains("dominating")) {
        const json& d = j["dominating"];
        if (!d.is_array() || d.size() != k) fail("/dominating", "expected " + std::to_string(k) + " values");
        std::vector<T> m;
        for (std::size_t s = 0; s < k; ++s) m.push_back(value_from_json<T>(d[s], "/dominating/" + std::to_string(s)));
        try {
            spec.dominating = DominatingMeasure<T>(std::move(m));
        } catch (const Error& e) {
            fail("/dominating", e.what());
        }
    }
    spec.chain = MarkovOrderM<T>(std::move(a), order, std::move(full));
    return spec;
}

template <class T>
json representation_to_json(const RandomMarkovRepresentation<T>& rep) {
    const std::size_t k = rep.alphabet.size();
    json j;
    j["alphabet"] = alphabet_to_json(rep.alphabet);
    j["kind"] = rep.kind == TableKind::deterministic ? "deterministic" : "general";
    if (rep.index_function)
        j["index_function"] = {{"family", rep.index_function->family}, {"arity", rep.index_function->arity}};
    json levels = json::array();
    for (const auto& t : rep.tables) {
        json lv;
        lv["n"] = t.depth();
        lv["p"] = value_to_json(t.mass());
        lv["context"] = t.context();
        if (t.origin) lv["origin"] = {{"base_depth", t.origin->base_depth}, {"digits", t.origin->digits}};
        json table = json::object();
        const std::size_t words = word_count(k, t.context(), std::size_t(1) << 24);
        for (std::size_t idx = 0; idx < words; ++idx) {
            std::string key = format_word(rep.alphabet, word_at(idx, t.context(), k));
            if (t.storage_kind() == TableKind::deterministic) {
                table[key] = rep.alphabet.label(t.symbol_at(idx));
            } else {
                Distribution<T> d = t.value_at(idx);
                json row = json::array();
                for (Symbol a = 0; a < k; ++a) row.push_back(value_to_json(d[a]));
                table[key] = std::move(row);
            }
        }
        lv["table"] = std::move(table);
        levels.push_back(std::move(lv));
    }
    j["levels"] = std::move(levels);
    j["residual"] = value_to_json(rep.residual);
    j["expected_lookback"] = rep.expected_lookback();
    json diags = json::array();
    for (const auto& d : rep.diagnostics) {
        json e;
        e["r"] = value_to_json(d.r);
        e["var_at_n"] = value_to_json(d.var_at_n);
        if (d.witness) e["witness"] = format_word(rep.alphabet, *d.witness);
        e["gamma"] = value_to_json(d.gamma);
        e["M"] = d.M;
        e["capped"] = d.capped;
        diags.push_back(std::move(e));
    }
    j["diagnostics"] = {{"levels", std::move(diags)}, {"notes", rep.notes}};
    return j;
}

template <class T>
RandomMarkovRepresentation<T> representation_from_json(const json& j) {
    FiniteAlphabet a = alphabet_from_json(field(j, "alphabet", ""), "/alphabet");
    const std::size_t k = a.size();
    TableKind kind = TableKind::deterministic;
    if (j.contains("kind")) {
        std::string s = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
        if (s == "general")
            kind = TableKind::general;
        else if (s != "deterministic")
            fail("/kind", "expected \"deterministic\" or \"general\"");
    }
    const json& levels = field(j, "levels", "");
    if (!levels.is_array()) fail("/levels", "expected an array");
    std::vector<TableFunction<T>> tables;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::string base = "/levels/" + std::to_string(i);
        const json& lv = levels[i];
        std::size_t n = size_from_json(field(lv, "n", base), base + "/n");
        T p = value_from_json<T>(field(lv, "p", base), base + "/p");
        const json& table = field(lv, "table", base);
        if (!table.is_object()) fail(base + "/table", "expected an object keyed by words");
        std::size_t context = 0;
        if (lv.contains("context")) {
            context = size_from_json(lv["context"], base + "/context");
        } else if (!table.empty()) {
            context = word_from_key(a, table.begin().key(), base + "/table").size();
        }
        const std::size_t words = word_count(k, context, std::size_t(1) << 24);
        std::vector<std::optional<Symbol>> det(words);
        std::vector<std::optional<Distribution<T>>> gen(words);
        bool deterministic_entries = true;
        for (const auto& [key, v] : table.items()) {
            std::string where = base + "/table/" + pointer_key(key);
            Word w = word_from_key(a, key, where);
            if (w.size() != context) fail(where, "word length differs from context " + std::to_string(context));
            std::size_t idx = word_index(w, k);
            if (v.is_string() && a.contains(v.template get<std::string>())) {
                det[idx] = a.index_of(v.template get<std::string>());
                gen[idx] = Distribution<T>::point(k, *det[idx]);
            } else if (v.is_array()) {
                deterministic_entries = false;
                if (v.size() != k) fail(where, "expected " + std::to_string(k) + " table values");
                std::vector<T> m;
                for (std::size_t s = 0; s < k; ++s) m.push_back(value_from_json<T>(v[s], where + "/" + std::to_string(s)));
                try {
                    gen[idx] = Distribution<T>(std::move(m), ScalarTraits<T>::exact ? 0.0 : 1e-9);
                } catch (const Error& e) {
                    fail(where, e.what());
                }
            } else {
                fail(where, "expected a symbol label or an array of table values");
            }
        }
        for (std::size_t idx = 0; idx < words; ++idx)
            if (!gen[idx]) fail(base + "/table", "missing word '" + format_word(a, word_at(idx, context, k)) + "'");
        try {
            TableFunction<T> t = [&] {
                if (deterministic_entries) {
                    std::vector<Symbol> s;
                    for (auto& x : det) s.push_back(*x);
                    return TableFunction<T>::deterministic(n, p, context, k, std::move(s));
                }
                std::vector<Distribution<T>> d;
                for (auto& x : gen) d.push_back(std::move(*x));
                return TableFunction<T>::general(n, p, context, k, std::move(d));
            }();
            if (lv.contains("origin")) {
                const json& o = lv["origin"];
                LevelOrigin origin;
                origin.base_depth = size_from_json(field(o, "base_depth", base + "/origin"), base + "/origin/base_depth");
                const json& digits = field(o, "digits", base + "/origin");
                if (!digits.is_array()) fail(base + "/origin/digits", "expected an array");
                for (const auto& d : digits) origin.digits.push_back(d.get<std::uint64_t>());
                t.origin = std::move(origin);
            }
            tables.push_back(std::move(t));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Parse) throw;
            fail(base, e.what());
        }
    }
    auto rep = make_representation(a, kind, std::move(tables));
    if (j.contains("residual")) {
        T declared = value_from_json<T>(j["residual"], "/residual");
        if (!eq_tol(declared, rep.residual, ScalarTraits<T>::exact ? 0.0 : 1e-9))
            fail("/residual", "declared residual " + format_value(declared) + " differs from 1 - sum p = " +
                                  format_value(rep.residual));
    }
    if (j.contains("index_function")) {
        const json& f = j["index_function"];
        IndexFunctionInfo info;
        info.family = field(f, "family", "/index_function").get<std::string>();
        info.arity = size_from_json(field(f, "arity", "/index_function"), "/index_function/arity");
        rep.index_function = info;
    }
    if (j.contains("diagnostics") && j["diagnostics"].contains("notes")) {
        for (const auto& [key, v] : j["diagnostics"]["notes"].items())
            if (v.is_string()) rep.notes[key] = v.template get<std::string>();
    }
    return rep;
}

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, source + ": " + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Parse, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Parse, "cannot write " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

#define RSM_INSTANTIATE(T)                                                                          \
    template json value_to_json<T>(const T&);                                                       \
    template T value_from_json<T>(const json&, const std::string&);                                 \
    template json measure_to_json<T>(const StationaryWordMeasure<T>&);                              \
    template StationaryWordMeasure<T> measure_from_json<T>(const json&);                            \
    template json chain_to_json<T>(const MarkovOrderM<T>&, const std::optional<DominatingMeasure<T>>&, \
                                   const std::string&);                                             \
    template ChainSpec<T> chain_from_json<T>(const json&);                                          \
    template json representation_to_json<T>(const RandomMarkovRepresentation<T>&);                  \
    template RandomMarkovRepresentation<T> representation_from_json<T>(const json&);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
