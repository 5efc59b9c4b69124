#include "rsm/representation.hpp"

#include <algorithm>

namespace rsm {

namespace {

void check_context(std::size_t context, std::uint64_t depth) {
    if (context > depth)
        throw Error(ErrorCode::Precondition, "table context " + std::to_string(context) + " exceeds its depth " +
                                                 std::to_string(depth));
}

}  // namespace

template <class T>
TableFunction<T> TableFunction<T>::deterministic(std::uint64_t depth, T mass, std::size_t context,
                                                 std::size_t alphabet_size, std::vector<Symbol> assignment) {
    check_context(context, depth);
    if (assignment.size() != word_count(alphabet_size, context))
        throw Error(ErrorCode::InconsistentTables, "deterministic table has " + std::to_string(assignment.size()) +
                                                       " entries for context " + std::to_string(context));
    for (Symbol s : assignment)
        if (s >= alphabet_size) throw Error(ErrorCode::AlphabetMismatch, "table symbol out of range");
    TableFunction t;
    t.depth_ = depth;
    t.mass_ = std::move(mass);
    t.context_ = context;
    t.k_ = alphabet_size;
    t.store_ = std::move(assignment);
    return t;
}

template <class T>
TableFunction<T> TableFunction<T>::general(std::uint64_t depth, T mass, std::size_t context,
                                           std::size_t alphabet_size, std::vector<Distribution<T>> values) {
    check_context(context, depth);
    if (values.size() != word_count(alphabet_size, context))
        throw Error(ErrorCode::InconsistentTables, "general table has " + std::to_string(values.size()) +
                                                       " entries for context " + std::to_string(context));
    for (const auto& d : values)
        if (d.size() != alphabet_size) throw Error(ErrorCode::AlphabetMismatch, "table value over a wrong alphabet");
    TableFunction t;
    t.depth_ = depth;
    t.mass_ = std::move(mass);
    t.context_ = context;
    t.k_ = alphabet_size;
    t.store_ = std::move(values);
    return t;
}

template <class T>
TableFunction<T> TableFunction<T>::functional(std::uint64_t depth, T mass, std::size_t context,
                                              std::size_t alphabet_size, Functional f) {
    check_context(context, depth);
    TableFunction t;
    t.depth_ = depth;
    t.mass_ = std::move(mass);
    t.context_ = context;
    t.k_ = alphabet_size;
    t.store_ = std::move(f);
    return t;
}

template <class T>
std::size_t TableFunction<T>::entry_count() const {
    if (auto* s = std::get_if<std::vector<Symbol>>(&store_)) return s->size();
    if (auto* d = std::get_if<std::vector<Distribution<T>>>(&store_)) return d->size();
    return 0;
}

template <class T>
Distribution<T> TableFunction<T>::value_at(std::size_t idx) const {
    if (auto* s = std::get_if<std::vector<Symbol>>(&store_)) return Distribution<T>::point(k_, (*s)[idx]);
    if (auto* d = std::get_if<std::vector<Distribution<T>>>(&store_)) return (*d)[idx];
    Word w = word_at(idx, context_, k_);
    return std::get<Functional>(store_)(w);
}

template <class T>
Distribution<T> TableFunction<T>::value(WordView past) const {
    if (past.size() < context_)
        throw Error(ErrorCode::DepthTooSmall, "table lookup on a past of length " + std::to_string(past.size()) +
                                                  " needs " + std::to_string(context_) + " symbols");
    if (auto* f = std::get_if<Functional>(&store_)) return (*f)(past.first(context_));
    return value_at(word_index(past.first(context_), k_));
}

template <class T>
void TableFunction<T>::add_contribution(WordView past, std::vector<T>& acc) const {
    if (past.size() < context_)
        throw Error(ErrorCode::DepthTooSmall, "table lookup on a past of length " + std::to_string(past.size()) +
                                                  " needs " + std::to_string(context_) + " symbols");
    if (auto* s = std::get_if<std::vector<Symbol>>(&store_)) {
        acc[(*s)[word_index(past.first(context_), k_)]] += mass_;
        return;
    }
    Distribution<T> d = value(past);
    for (Symbol a = 0; a < k_; ++a)
        if (d[a] != 0) acc[a] += mass_ * d[a];
}

template <class T>
T LookBackDistribution<T>::tail(std::uint64_t n) const {
    T t = residual;
    for (const auto& [depth, p] : levels)
        if (depth > n) t += p;
    return t;
}

template <class T>
T LookBackDistribution<T>::mass_total() const {
    T t = ScalarTraits<T>::zero();
    for (const auto& lv : levels) t += lv.second;
    return t;
}

template <class T>
double LookBackDistribution<T>::expected() const {
    double e = 0.0;
    for (const auto& [depth, p] : levels) e += static_cast<double>(depth) * to_double(p);
    return e;
}

template <class T>
LookBackDistribution<T> RandomMarkovRepresentation<T>::lookback() const {
    LookBackDistribution<T> lb;
    for (const auto& t : tables) lb.levels.push_back({t.depth(), t.mass()});
    lb.residual = residual;
    return lb;
}

template <class T>
double RandomMarkovRepresentation<T>::expected_lookback() const {
    return lookback().expected();
}

template <class T>
std::size_t RandomMarkovRepresentation<T>::max_context() const {
    std::size_t c = 0;
    for (const auto& t : tables) c = std::max(c, t.context());
    return c;
}

template <class T>
std::uint64_t RandomMarkovRepresentation<T>::max_depth() const {
    std::uint64_t d = 0;
    for (const auto& t : tables) d = std::max(d, t.depth());
    return d;
}

template <class T>
RandomMarkovRepresentation<T> make_representation(FiniteAlphabet alphabet, TableKind kind,
                                                  std::vector<TableFunction<T>> tables) {
    RandomMarkovRepresentation<T> rep;
    rep.alphabet = std::move(alphabet);
    rep.kind = kind;
    rep.tables = std::move(tables);
    T total = ScalarTraits<T>::zero();
    for (const auto& t : rep.tables) {
        if (t.mass() < 0) throw Error(ErrorCode::InvalidDistribution, "negative level mass");
        if (t.alphabet_size() != rep.alphabet.size()) throw Error(ErrorCode::AlphabetMismatch, "table alphabet");
        total += t.mass();
    }
    rep.residual = ScalarTraits<T>::one() - total;
    if (rep.residual < 0 && !is_zero_tol(rep.residual, ScalarTraits<T>::default_tolerance()))
        throw Error(ErrorCode::InvalidDistribution, "level masses sum above 1");
    return rep;
}

template <class T>
CompleteRMP<T>::CompleteRMP(RandomMarkovRepresentation<T> rep, std::shared_ptr<const ConditionalModel<T>> base,
                            double tol)
    : rep_(std::move(rep)), base_(std::move(base)) {
    if (!rep_.complete(tol))
        throw Error(ErrorCode::IncompleteRepresentation, "representation residual " + format_value(rep_.residual) +
                                                             " is above tolerance");
    if (rep_.tables.empty()) throw Error(ErrorCode::IncompleteRepresentation, "representation has no levels");
}

template <class T>
SubMeasure<T> leftover(const ConditionalModel<T>& model, const std::vector<TableFunction<T>>& tables, WordView w,
                       double tol) {
    std::size_t need = 0;
    for (const auto& t : tables) need = std::max(need, t.context());
    if (w.size() < need)
        throw Error(ErrorCode::DepthTooSmall, "leftover needs a past of length at least " + std::to_string(need));
    Distribution<T> c = model.cond(w);
    std::vector<T> acc(c.size(), ScalarTraits<T>::zero());
    for (const auto& t : tables) t.add_contribution(w, acc);
    std::vector<T> out(c.size());
    for (Symbol a = 0; a < c.size(); ++a) {
        out[a] = c[a] - acc[a];
        if (out[a] < 0 && !is_zero_tol(out[a], tol))
            throw Error(ErrorCode::InconsistentTables, "tables exceed the conditional law at word '" +
                                                           format_word(model.alphabet(), w) + "', symbol '" +
                                                           model.alphabet().label(a) + "'");
    }
    return SubMeasure<T>(std::move(out));
}

#define RSM_INSTANTIATE(T)                                                                                    \
    template class TableFunction<T>;                                                                          \
    template struct LookBackDistribution<T>;                                                                  \
    template struct RandomMarkovRepresentation<T>;                                                            \
    template class CompleteRMP<T>;                                                                            \
    template RandomMarkovRepresentation<T> make_representation<T>(FiniteAlphabet, TableKind,                  \
                                                                  std::vector<TableFunction<T>>);             \
    template SubMeasure<T> leftover<T>(const ConditionalModel<T>&, const std::vector<TableFunction<T>>&, WordView, \
                                       double);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
