#include "rsm/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "rsm/parallel.hpp"

namespace rsm {

namespace {

template <class T>
double tol_of(double requested) {
    return requested >= 0 ? requested : ScalarTraits<T>::default_tolerance();
}

template <class T>
struct LevelScan {
    std::vector<T> best;
    std::vector<Symbol> arg;
    std::vector<char> positive;
    T r{};
    std::size_t witness = 0;
    bool any_positive = false;
};

// For every context word of length c: max_a and argmax_a of the leftover.
template <class T>
LevelScan<T> scan_level(const ConditionalModel<T>& model, const std::vector<TableFunction<T>>& tables, std::size_t c,
                        const DecomposeOptions& opts, double tol) {
    const std::size_t k = model.alphabet_size();
    const std::size_t count = word_count(k, c, opts.max_words);
    LevelScan<T> s;
    s.best.assign(count, ScalarTraits<T>::zero());
    s.arg.assign(count, 0);
    s.positive.assign(count, 0);
    bool filter = opts.filter == WordFilter::positive_only && model.has_positivity();
    parallel_for(count, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            Word w = word_at(idx, c, k);
            bool pos = !filter || model.positive(w);
            s.positive[idx] = pos;
            Distribution<T> d = model.cond(w);
            std::vector<T> acc(k, ScalarTraits<T>::zero());
            for (const auto& t : tables) t.add_contribution(w, acc);
            std::vector<T> left(k);
            T top = d[0] - acc[0];
            for (Symbol a = 0; a < k; ++a) {
                left[a] = d[a] - acc[a];
                if (pos && left[a] < 0 && !is_zero_tol(left[a], tol))
                    throw Error(ErrorCode::InconsistentTables, "negative leftover at word '" +
                                                                   format_word(model.alphabet(), w) + "'");
                if (left[a] > top) top = left[a];
            }
            // ties (within tolerance in float mode) go to the lowest symbol index
            Symbol arg = 0;
            while (!eq_tol(left[arg], top, tol)) ++arg;
            s.best[idx] = left[arg];
            s.arg[idx] = arg;
        }
    }, 64);
    for (std::size_t idx = 0; idx < count; ++idx) {
        if (!s.positive[idx]) continue;
        if (!s.any_positive || s.best[idx] < s.r) {
            s.r = s.best[idx];
            s.witness = idx;
            s.any_positive = true;
        }
    }
    if (!s.any_positive)
        throw Error(ErrorCode::Precondition, "no positive-probability past of length " + std::to_string(c));
    return s;
}

template <class T>
void require_finite(const ConditionalModel<T>& model) {
    if (model.alphabet_size() == 0) throw Error(ErrorCode::Unsupported, "empty alphabet");
}

}  // namespace

template <class T>
std::size_t choose_M(const DominatingMeasure<T>& mu, const T& gamma) {
    if (!(gamma > 0)) throw Error(ErrorCode::Precondition, "gamma must be positive, got " + format_value(gamma));
    T limit = gamma / T(10);
    for (std::size_t m = 1; m <= mu.size(); ++m)
        if (mu.tail_after(m) < limit) return m;
    return std::max<std::size_t>(mu.size(), 1);
}

template <class T>
RandomMarkovRepresentation<T> decompose(const ConditionalModel<T>& model, const DecomposeOptions& opts) {
    require_finite(model);
    const double tol = tol_of<T>(opts.tolerance);
    const std::size_t k = model.alphabet_size();
    const auto mu = model.dominating_or_counting();
    const T target = ScalarTraits<T>::from_double(opts.residual_target);
    std::vector<TableFunction<T>> tables;
    std::vector<LevelDiagnostics<T>> diags;
    T residual = ScalarTraits<T>::one();
    std::size_t prev_n = 0;
    for (std::size_t level = 1; level <= opts.k_max && residual > target; ++level) {
        T gamma = residual;
        std::size_t M = choose_M(mu, gamma);
        T threshold = T(9) * gamma / T(10 * static_cast<long>(M));
        std::size_t n = prev_n + 1;
        while (T(2) * model.var_bound(n) > threshold) {
            if (++n > opts.max_depth)
                throw Error(ErrorCode::NotUniformMartingale,
                            "no depth up to " + std::to_string(opts.max_depth) + " brings 2 var(n) below " +
                                format_value(threshold));
        }
        std::size_t c = model.context_length(n);
        LevelScan<T> scan = scan_level(model, tables, c, opts, tol);
        T var_n = model.var_bound(n);
        T p = scan.r - var_n;
        if (!(p > 0) || is_zero_tol(p, tol)) {
            if (is_zero_tol(residual, tol)) break;
            throw Error(ErrorCode::NotUniformMartingale,
                        "level " + std::to_string(level) + " at depth " + std::to_string(n) + " has mass " +
                            format_value(p) + " with residual " + format_value(residual) + " (witness '" +
                            format_word(model.alphabet(), word_at(scan.witness, c, k)) + "')");
        }
        tables.push_back(TableFunction<T>::deterministic(n, p, c, k, std::move(scan.arg)));
        LevelDiagnostics<T> d;
        d.r = scan.r;
        d.var_at_n = var_n;
        d.witness = word_at(scan.witness, c, k);
        d.gamma = gamma;
        d.M = M;
        diags.push_back(std::move(d));
        residual -= p;
        prev_n = n;
    }
    auto rep = make_representation(model.alphabet(), TableKind::deterministic, std::move(tables));
    rep.diagnostics = std::move(diags);
    rep.notes["variant"] = "a";
    rep.notes["model"] = model.name();
    return rep;
}

template <class T>
double finite_expectation_bound(const ConditionalModel<T>& model) {
    if (!model.var_sum() || !std::isfinite(*model.var_sum()))
        throw Error(ErrorCode::Precondition, "finite expected look-back needs a declared finite sum of variations");
    double m = static_cast<double>(model.alphabet_size());
    return 2.0 * m * m * (1.0 + *model.var_sum());
}

template <class T>
RandomMarkovRepresentation<T> decompose_finite_expectation(const ConditionalModel<T>& model,
                                                           const DecomposeOptions& opts) {
    require_finite(model);
    const double bound = finite_expectation_bound(model);
    const double tol = tol_of<T>(opts.tolerance);
    const std::size_t k = model.alphabet_size();
    const T target = ScalarTraits<T>::from_double(opts.residual_target);
    const T shrink = ScalarTraits<T>::one() - ScalarTraits<T>::one() / T(static_cast<long>(k * k));
    std::vector<TableFunction<T>> tables;
    std::vector<LevelDiagnostics<T>> diags;
    T residual = ScalarTraits<T>::one();
    T r_prev = ScalarTraits<T>::one();
    std::size_t prev_n = 1;
    for (std::size_t level = 1; level <= opts.k_max && residual > target; ++level) {
        T cap = shrink * r_prev;
        std::size_t n = prev_n + 1;
        LevelScan<T> scan;
        std::size_t scanned_c = static_cast<std::size_t>(-1);
        T r{};
        bool capped = false;
        while (true) {
            if (n > opts.max_depth)
                throw Error(ErrorCode::NotUniformMartingale,
                            "no depth up to " + std::to_string(opts.max_depth) + " satisfies the level rule");
            std::size_t c = model.context_length(n);
            if (c != scanned_c) {
                scan = scan_level(model, tables, c, opts, tol);
                scanned_c = c;
            }
            capped = cap < scan.r;
            r = capped ? cap : scan.r;
            if (r >= T(2) * model.var_bound(n)) break;
            ++n;
        }
        T var_n = model.var_bound(n);
        T p = r - var_n;
        if (!(p > 0) || is_zero_tol(p, tol)) {
            if (is_zero_tol(residual, tol)) break;
            throw Error(ErrorCode::NotUniformMartingale,
                        "level " + std::to_string(level) + " has mass " + format_value(p) + " with residual " +
                            format_value(residual));
        }
        std::size_t c = scanned_c;
        tables.push_back(TableFunction<T>::deterministic(n, p, c, k, std::move(scan.arg)));
        LevelDiagnostics<T> d;
        d.r = r;
        d.var_at_n = var_n;
        d.witness = word_at(scan.witness, c, k);
        d.gamma = residual;
        d.M = k;
        d.capped = capped;
        diags.push_back(std::move(d));
        residual -= p;
        r_prev = r;
        prev_n = n;
    }
    auto rep = make_representation(model.alphabet(), TableKind::deterministic, std::move(tables));
    rep.diagnostics = std::move(diags);
    rep.notes["variant"] = "b";
    rep.notes["model"] = model.name();
    rep.notes["expected_lookback_bound"] = shortest_double(bound);
    return rep;
}

template <class T>
VerifyReport<T> verify_representation(const ConditionalModel<T>& model, const RandomMarkovRepresentation<T>& rep,
                                      const VerifyOptions& opts) {
    const double tol = tol_of<T>(opts.tolerance);
    const std::size_t k = model.alphabet_size();
    if (!(rep.alphabet == model.alphabet()))
        throw Error(ErrorCode::AlphabetMismatch, "representation and model use different alphabets");
    VerifyReport<T> out;
    out.residual = rep.residual;
    out.max_gap = ScalarTraits<T>::zero();
    const std::size_t need = rep.max_context();
    std::size_t depth = opts.depth ? opts.depth : std::max(need, model.order().value_or(need));
    if (depth < need)
        throw Error(ErrorCode::DepthTooSmall, "verification depth " + std::to_string(depth) +
                                                  " is below the largest table context " + std::to_string(need));
    const auto& ord = model.order();
    const std::size_t len = ord ? std::min(depth, std::max(*ord, need)) : depth;
    out.depth = len;
    out.exact = ord && depth >= *ord;
    auto fail = [&](std::string inv, WordView w, std::string detail) {
        out.passed = false;
        if (out.failures.size() < 50) out.failures.push_back({std::move(inv), format_word(model.alphabet(), w), std::move(detail)});
    };

    const auto words = scan_words(model, len, opts.filter);
    out.words_checked = words.size();
    std::vector<Distribution<T>> conds;
    conds.reserve(words.size());
    for (const Word& w : words) {
        Distribution<T> c = model.cond(w);
        std::vector<T> mix(k, ScalarTraits<T>::zero());
        for (const auto& t : rep.tables) t.add_contribution(w, mix);
        T gap = ScalarTraits<T>::zero();
        for (Symbol a = 0; a < k; ++a) {
            if (!le_tol(mix[a], c[a], tol))
                fail("table-dominance", w,
                     "mixture " + format_value(mix[a]) + " exceeds conditional " + format_value(c[a]) + " at symbol '" +
                         model.alphabet().label(a) + "'");
            gap += abs_value(T(c[a] - mix[a]));
        }
        if (gap > out.max_gap) out.max_gap = gap;
        if (!le_tol(gap, rep.residual, tol))
            fail("reconstruction-gap", w, "gap " + format_value(gap) + " exceeds residual " + format_value(rep.residual));
        conds.push_back(std::move(c));
    }

    if (rep.kind == TableKind::deterministic) {
        for (std::size_t li = 0; li < rep.tables.size(); ++li) {
            const auto& t = rep.tables[li];
            if (t.storage_kind() == TableKind::deterministic) continue;
            auto check = [&](const Distribution<T>& d, WordView ctx) {
                for (Symbol a = 0; a < k; ++a)
                    if (d[a] != 0 && d[a] != 1) {
                        fail("determinism", ctx,
                             "level " + std::to_string(li + 1) + " table value " + format_value(d[a]) + " at symbol '" +
                                 model.alphabet().label(a) + "'");
                        return;
                    }
            };
            if (t.is_explicit()) {
                for (std::size_t idx = 0; idx < t.entry_count(); ++idx)
                    check(t.value_at(idx), word_at(idx, t.context(), k));
            } else {
                for (const Word& w : words) check(t.value(w), WordView(w).first(t.context()));
            }
        }
    }

    // look-back tail bound and the necessity direction on var(n)
    auto lb = rep.lookback();
    std::uint64_t top = std::min<std::uint64_t>(rep.max_depth(), len);
    for (std::size_t n = 1; n <= top; ++n) {
        LookbackCheck<T> chk;
        chk.n = n;
        chk.lhs = ScalarTraits<T>::zero();
        chk.rhs = lb.tail(n);
        for (std::size_t i = 0; i < words.size(); ++i) {
            WordView w(words[i]);
            Distribution<T> shortc = model.cond(w.first(n));
            T tv = tv_distance(conds[i], shortc);
            if (tv > chk.lhs) chk.lhs = tv;
            if (!le_tol(tv, chk.rhs, tol)) {
                chk.ok = false;
                fail("tv-lookback", w, "n = " + std::to_string(n) + ": tv " + format_value(tv) + " > P(L > n) = " +
                                           format_value(chk.rhs));
            }
        }
        out.tv_lookback.push_back(chk);
    }
    for (std::size_t n = 0; n <= top; ++n) {
        LookbackCheck<T> chk;
        chk.n = n;
        chk.lhs = ScalarTraits<T>::zero();
        chk.rhs = T(2) * lb.tail(n);
        std::map<Word, std::pair<std::vector<T>, std::vector<T>>> groups;
        for (std::size_t i = 0; i < words.size(); ++i) {
            Word key(words[i].begin(), words[i].begin() + static_cast<std::ptrdiff_t>(n));
            auto [it, fresh] = groups.try_emplace(key, conds[i].vec(), conds[i].vec());
            if (fresh) continue;
            auto& [lo, hi] = it->second;
            for (Symbol a = 0; a < k; ++a) {
                if (conds[i][a] < lo[a]) lo[a] = conds[i][a];
                if (conds[i][a] > hi[a]) hi[a] = conds[i][a];
                if (T(hi[a] - lo[a]) > chk.lhs) chk.lhs = hi[a] - lo[a];
            }
        }
        if (!le_tol(chk.lhs, chk.rhs, tol)) {
            chk.ok = false;
            if (out.exact)
                fail("variation-necessity", {}, "var(" + std::to_string(n) + ") = " + format_value(chk.lhs) +
                                                     " > 2 P(L > n) = " + format_value(chk.rhs));
        }
        out.necessity.push_back(chk);
    }
    return out;
}

template <class T>
std::vector<CollapseRow<T>> demonstrate_collapse(const ConditionalModel<T>& model,
                                                 const std::vector<std::size_t>& depths) {
    std::vector<CollapseRow<T>> rows;
    for (std::size_t n : depths) {
        CollapseRow<T> row;
        row.depth = n;
        bool first = true;
        for (const Word& w : scan_words(model, n, WordFilter::positive_only)) {
            Distribution<T> d = model.cond(w);
            T best = d[0];
            for (Symbol a = 1; a < d.size(); ++a)
                if (d[a] > best) best = d[a];
            if (first || best < row.value) {
                row.value = best;
                row.witness = w;
                first = false;
            }
            ++row.words;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

#define RSM_INSTANTIATE(T)                                                                                   \
    template std::size_t choose_M<T>(const DominatingMeasure<T>&, const T&);                                 \
    template RandomMarkovRepresentation<T> decompose<T>(const ConditionalModel<T>&, const DecomposeOptions&); \
    template RandomMarkovRepresentation<T> decompose_finite_expectation<T>(const ConditionalModel<T>&,        \
                                                                           const DecomposeOptions&);         \
    template double finite_expectation_bound<T>(const ConditionalModel<T>&);                                 \
    template VerifyReport<T> verify_representation<T>(const ConditionalModel<T>&,                            \
                                                      const RandomMarkovRepresentation<T>&, const VerifyOptions&); \
    template std::vector<CollapseRow<T>> demonstrate_collapse<T>(const ConditionalModel<T>&,                 \
                                                                 const std::vector<std::size_t>&);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
