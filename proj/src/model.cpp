#include "rsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace rsm {

template <class T>
ConditionalModel<T>::ConditionalModel(Spec spec) : spec_(std::move(spec)) {
    if (!spec_.cond) throw Error(ErrorCode::Precondition, "conditional model needs a cond oracle");
    if (!spec_.var_bound) {
        if (!spec_.order) throw Error(ErrorCode::Precondition, "infinite-memory model needs a var_bound");
        std::size_t m = *spec_.order;
        spec_.var_bound = [m](std::size_t n) { return n >= m ? ScalarTraits<T>::zero() : ScalarTraits<T>::one(); };
    }
    if (spec_.dominating && spec_.dominating->size() != spec_.alphabet.size())
        throw Error(ErrorCode::AlphabetMismatch, "dominating measure size differs from the alphabet");
}

template <class T>
std::vector<Word> scan_words(const ConditionalModel<T>& model, std::size_t length, WordFilter filter,
                             std::size_t limit) {
    std::vector<Word> out;
    bool keep_all = filter == WordFilter::all_words || !model.has_positivity();
    if (model.has_probe_words()) {
        for (Word& w : model.probe_words(length))
            if (keep_all || model.positive(w)) out.push_back(std::move(w));
        return out;
    }
    std::size_t k = model.alphabet_size();
    word_count(k, length, limit);
    for_each_word(k, length, [&](WordView w) {
        if (keep_all || model.positive(w)) out.emplace_back(w.begin(), w.end());
    });
    return out;
}

template <class T>
MarkovOrderM<T>::MarkovOrderM(FiniteAlphabet alphabet, std::size_t order, std::vector<Distribution<T>> rows)
    : alphabet_(std::move(alphabet)), order_(order), rows_(std::move(rows)) {
    std::size_t expected = word_count(alphabet_.size(), order_);
    if (rows_.size() != expected)
        throw Error(ErrorCode::InvalidDistribution, "order-" + std::to_string(order_) + " chain needs " +
                                                        std::to_string(expected) + " rows, got " +
                                                        std::to_string(rows_.size()));
    for (const auto& r : rows_)
        if (r.size() != alphabet_.size()) throw Error(ErrorCode::AlphabetMismatch, "row length differs from alphabet");
}

template <class T>
const Distribution<T>& MarkovOrderM<T>::row(WordView m_word) const {
    if (m_word.size() < order_) throw Error(ErrorCode::DepthTooSmall, "row lookup needs an m-word");
    return rows_[word_index(m_word.first(order_), alphabet_.size())];
}

namespace {

template <class T>
struct ChainContext {
    MarkovOrderM<T> chain;
    std::optional<StationaryWordMeasure<T>> stationary;
    std::vector<std::vector<T>> marginals;  // marginals[c] for c < m
};

}  // namespace

template <class T>
ConditionalModel<T> to_model(const MarkovOrderM<T>& chain, std::optional<DominatingMeasure<T>> dominating,
                             std::string name, std::optional<StationaryWordMeasure<T>> stationary) {
    auto ctx = std::make_shared<ChainContext<T>>();
    ctx->chain = chain;
    const std::size_t m = chain.order();
    const std::size_t k = chain.alphabet().size();
    if (stationary) {
        ctx->stationary = std::move(stationary);
    } else {
        try {
            ctx->stationary = stationary_markov(chain);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::MultipleInvariantMeasures && e.code() != ErrorCode::Unsupported) throw;
        }
    }
    if (ctx->stationary) {
        for (std::size_t c = 0; c < m; ++c) ctx->marginals.push_back(ctx->stationary->marginal_recent(c).masses());
    }

    typename ConditionalModel<T>::Spec spec;
    spec.name = std::move(name);
    spec.alphabet = chain.alphabet();
    spec.order = m;
    spec.dominating = std::move(dominating);
    spec.stationary = ctx->stationary;
    spec.cond = [ctx, m, k](WordView w) -> Distribution<T> {
        if (w.size() >= m) return ctx->chain.row(w);
        // short past: average the rows of its extensions
        std::size_t c = w.size();
        std::size_t base = word_index(w, k);
        std::size_t ext = word_count(k, m - c);
        std::size_t kc = word_count(k, c);
        std::vector<T> acc(k, ScalarTraits<T>::zero());
        T weight_total = ctx->stationary ? ctx->marginals[c][base] : ScalarTraits<T>::zero();
        bool weighted = weight_total > 0;
        for (std::size_t e = 0; e < ext; ++e) {
            std::size_t idx = base + kc * e;
            T wgt = weighted ? T(ctx->stationary->mass_at(idx) / weight_total) : T(ScalarTraits<T>::one() / T(long(ext)));
            if (wgt == 0) continue;
            const auto& r = ctx->chain.row_at(idx);
            for (Symbol a = 0; a < k; ++a) acc[a] += wgt * r[a];
        }
        return Distribution<T>(std::move(acc), ScalarTraits<T>::exact ? 0.0 : 1e-9);
    };
    if (ctx->stationary) {
        spec.positive = [ctx, m, k](WordView w) {
            if (w.size() <= m) {
                if (w.size() == m) return ctx->stationary->mass(w) > 0;
                return ctx->marginals[w.size()][word_index(w, k)] > 0;
            }
            if (!(ctx->stationary->mass(w.last(m)) > 0)) return false;
            for (std::size_t j = w.size() - m; j-- > 0;)
                if (!(ctx->chain.row(w.subspan(j + 1, m))[w[j]] > 0)) return false;
            return true;
        };
    }

    // exact pairwise variations at depth m
    std::vector<T> var(m + 1, ScalarTraits<T>::zero());
    {
        std::size_t states = chain.state_count();
        for (std::size_t n = 0; n < m; ++n) {
            std::size_t groups = word_count(k, n);
            std::vector<std::vector<T>> lo(groups), hi(groups);
            for (std::size_t idx = 0; idx < states; ++idx) {
                if (ctx->stationary && !(ctx->stationary->mass_at(idx) > 0)) continue;
                std::size_t g = idx % groups;
                const auto& r = chain.row_at(idx);
                if (lo[g].empty()) {
                    lo[g] = r.vec();
                    hi[g] = r.vec();
                    continue;
                }
                for (Symbol a = 0; a < k; ++a) {
                    if (r[a] < lo[g][a]) lo[g][a] = r[a];
                    if (r[a] > hi[g][a]) hi[g][a] = r[a];
                }
            }
            for (std::size_t g = 0; g < groups; ++g)
                for (std::size_t a = 0; a < lo[g].size(); ++a)
                    if (T(hi[g][a] - lo[g][a]) > var[n]) var[n] = hi[g][a] - lo[g][a];
        }
    }
    double total = 0;
    for (const T& v : var) total += to_double(v);
    spec.var_sum = total;
    spec.var_bound = [var, m](std::size_t n) { return n >= m ? ScalarTraits<T>::zero() : var[n]; };
    spec.metadata["kind"] = "markov-order-" + std::to_string(m);
    return ConditionalModel<T>(std::move(spec));
}

template <class T>
VariationResult<T> variation(const ConditionalModel<T>& model, std::size_t k, std::size_t depth, WordFilter filter) {
    if (depth < k)
        throw Error(ErrorCode::DepthTooSmall, "variation depth " + std::to_string(depth) + " below k = " +
                                                  std::to_string(k));
    VariationResult<T> res;
    res.value = ScalarTraits<T>::zero();
    res.declared_bound = model.var_bound(k);
    const auto& ord = model.order();
    std::size_t len = ord ? std::min(depth, std::max(k, *ord)) : depth;
    res.exact = ord && depth >= *ord;
    res.depth = len;
    std::map<Word, std::pair<std::vector<T>, std::vector<T>>> groups;
    for (const Word& w : scan_words(model, len, filter)) {
        Distribution<T> d = model.cond(w);
        Word key(w.begin(), w.begin() + k);
        auto [it, fresh] = groups.try_emplace(key, d.vec(), d.vec());
        if (fresh) continue;
        auto& [lo, hi] = it->second;
        for (Symbol a = 0; a < d.size(); ++a) {
            if (d[a] < lo[a]) lo[a] = d[a];
            if (d[a] > hi[a]) hi[a] = d[a];
            T gap = hi[a] - lo[a];
            if (gap > res.value) {
                res.value = gap;
                res.witness = key;
            }
        }
    }
    return res;
}

template <class T>
RatioResult ratio_coeff(const ConditionalModel<T>& model, std::size_t n, std::size_t depth, WordFilter filter) {
    if (depth < n)
        throw Error(ErrorCode::DepthTooSmall, "ratio depth " + std::to_string(depth) + " below n = " +
                                                  std::to_string(n));
    RatioResult res;
    const auto& ord = model.order();
    std::size_t len = ord ? std::min(depth, std::max(n, *ord)) : depth;
    res.exact = ord && depth >= *ord;
    res.depth = len;
    if (model.has_ratio_bound()) res.declared_bound = model.ratio_bound(n);
    std::map<Word, std::pair<std::vector<T>, std::vector<T>>> groups;
    for (const Word& w : scan_words(model, len, filter)) {
        Distribution<T> d = model.cond(w);
        Word key(w.begin(), w.begin() + n);
        auto [it, fresh] = groups.try_emplace(key, d.vec(), d.vec());
        if (fresh) continue;
        auto& [lo, hi] = it->second;
        for (Symbol a = 0; a < d.size(); ++a) {
            if (d[a] < lo[a]) lo[a] = d[a];
            if (d[a] > hi[a]) hi[a] = d[a];
        }
    }
    double best = 0.0;
    for (const auto& [key, bounds] : groups) {
        const auto& [lo, hi] = bounds;
        for (std::size_t a = 0; a < lo.size(); ++a) {
            if (hi[a] == 0) continue;  // 0/0 counts as ratio 1
            if (lo[a] == 0) {
                res.infinite = true;
                res.log_ratio = std::numeric_limits<double>::infinity();
                return res;
            }
            double r = std::log(to_double(T(hi[a] / lo[a])));
            best = std::max(best, r);
        }
    }
    res.log_ratio = best;
    return res;
}

template <class T>
RatioCoefficients ratio_coefficients(const ConditionalModel<T>& model, std::size_t max_n, std::size_t depth,
                                     WordFilter filter) {
    RatioCoefficients rc;
    rc.exact = true;
    for (std::size_t n = 0; n <= max_n; ++n) {
        RatioResult r = ratio_coeff(model, n, std::max(depth, n), filter);
        rc.r.push_back(r.log_ratio);
        rc.exact = rc.exact && r.exact;
    }
    return rc;
}

#define RSM_INSTANTIATE(T)                                                                                   \
    template class ConditionalModel<T>;                                                                      \
    template class MarkovOrderM<T>;                                                                          \
    template std::vector<Word> scan_words<T>(const ConditionalModel<T>&, std::size_t, WordFilter, std::size_t); \
    template ConditionalModel<T> to_model<T>(const MarkovOrderM<T>&, std::optional<DominatingMeasure<T>>,      \
                                             std::string, std::optional<StationaryWordMeasure<T>>);          \
    template VariationResult<T> variation<T>(const ConditionalModel<T>&, std::size_t, std::size_t, WordFilter); \
    template RatioResult ratio_coeff<T>(const ConditionalModel<T>&, std::size_t, std::size_t, WordFilter);    \
    template RatioCoefficients ratio_coefficients<T>(const ConditionalModel<T>&, std::size_t, std::size_t,    \
                                                     WordFilter);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
