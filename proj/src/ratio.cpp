#include "rsm/ratio.hpp"

#include <algorithm>
#include <cmath>

#include "rsm/parallel.hpp"

namespace rsm {

template <class T>
T RatioLevels<T>::partial_sum(std::size_t i) const {
    T s = ScalarTraits<T>::zero();
    for (std::size_t j = 0; j < i && j < p.size(); ++j) s += p[j];
    return s;
}

template <class T>
std::vector<T> dyadic_masses(std::size_t count, bool fold_tail) {
    if (count == 0) throw Error(ErrorCode::Precondition, "need at least one level");
    std::vector<T> p;
    for (std::size_t i = 1; i <= count; ++i) p.push_back(inv_pow2<T>(static_cast<unsigned>(i)));
    if (fold_tail) p.back() = p.back() * 2;  // 2^-(count-1) closes the sum at 1
    return p;
}

template <class T>
RatioLevels<T> choose_levels(const RatioCoefficients& rc, const std::vector<T>& p) {
    if (p.empty()) throw Error(ErrorCode::Precondition, "empty mass sequence");
    if (rc.r.empty()) throw Error(ErrorCode::Precondition, "no ratio coefficients");
    RatioLevels<T> lv;
    T total = ScalarTraits<T>::zero();
    for (const auto& x : p) {
        if (!(x > 0)) throw Error(ErrorCode::InvalidDistribution, "level masses must be positive");
        total += x;
    }
    if (total > 1 && !eq_tol(total, ScalarTraits<T>::one(), ScalarTraits<T>::default_tolerance()))
        throw Error(ErrorCode::InvalidDistribution, "level masses sum to " + format_value(total) + " > 1");
    lv.p = p;
    lv.residual = ScalarTraits<T>::one() - total;
    if (lv.residual < 0) lv.residual = ScalarTraits<T>::zero();

    // sup over m >= n of the probed coefficients; coefficients are meant to be non-increasing
    const std::size_t R = rc.r.size();
    std::vector<double> tail(R + 1, rc.exact ? 0.0 : rc.r.back());
    for (std::size_t n = R; n-- > 0;) tail[n] = std::max(tail[n + 1], rc.r[n]);

    std::size_t prev = 1;
    T S = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < p.size(); ++i) {
        S += p[i];
        double thr = i == 0 ? to_double(p[0]) / 2.0 : to_double(p[i]) / (2.0 * to_double(S));
        std::size_t found = 0;
        for (std::size_t n = prev; n <= R; ++n) {
            double dev = std::expm1(tail[n]);
            if (dev < thr) {
                found = n;
                lv.deviation.push_back(dev);
                break;
            }
        }
        if (found == 0)
            throw Error(ErrorCode::CannotCertify,
                        "ratio coefficients stay above the level-" + std::to_string(i + 1) + " threshold " +
                            shortest_double(thr) + " up to depth " + std::to_string(R - 1));
        lv.n.push_back(found);
        lv.threshold.push_back(thr);
        prev = found;
    }
    return lv;
}

namespace {

template <class T>
Distribution<T> mu(const ConditionalModel<T>& model, std::size_t n, WordView w) {
    return model.cond(w.first(std::min(w.size(), model.context_length(n))));
}

}  // namespace

template <class T>
Distribution<T> tau(const ConditionalModel<T>& model, const RatioLevels<T>& levels, std::size_t i, WordView w,
                    double tol) {
    if (i == 0 || i > levels.size()) throw Error(ErrorCode::Precondition, "tau level out of range");
    const std::size_t ni = levels.n[i - 1];
    if (w.size() < model.context_length(ni))
        throw Error(ErrorCode::DepthTooSmall, "tau needs " + std::to_string(model.context_length(ni)) +
                                                  " past symbols, got " + std::to_string(w.size()));
    Distribution<T> cur = mu(model, ni, w);
    if (i == 1) return cur;
    Distribution<T> prev = mu(model, levels.n[i - 2], w);
    const T S = levels.partial_sum(i), Sprev = levels.partial_sum(i - 1);
    const T& pi = levels.p[i - 1];
    std::vector<T> out(cur.size());
    for (Symbol a = 0; a < cur.size(); ++a) {
        out[a] = (S * cur[a] - Sprev * prev[a]) / pi;
        if (out[a] < 0) {
            if (!is_zero_tol(out[a], tol))
                throw Error(ErrorCode::TauNegative, "tau_" + std::to_string(i) + " is " + format_value(out[a]) +
                                                        " at symbol " + std::to_string(a) + " on past " +
                                                        format_word(model.alphabet(), w));
            out[a] = ScalarTraits<T>::zero();
        }
    }
    return Distribution<T>(std::move(out), ScalarTraits<T>::exact ? 0.0 : std::max(tol, 1e-9));
}

template <class T>
RatioCoefficients ratio_bounds_for(const ConditionalModel<T>& model, const RatioOptions& opts) {
    const auto& ord = model.order();
    std::size_t depth = opts.scan_depth ? opts.scan_depth : (ord ? std::max(*ord, opts.probe_depth) : opts.probe_depth);
    RatioCoefficients rc;
    bool measured = false;
    try {
        // finite memory: coefficients vanish from the order on, no need to enumerate longer words
        std::size_t top = ord ? std::min(opts.probe_depth, *ord) : opts.probe_depth;
        rc = ratio_coefficients(model, top, std::min(depth, ord ? *ord : depth), opts.filter);
        if (rc.exact) rc.r.resize(opts.probe_depth + 1, 0.0);
        measured = true;
    } catch (const Error& e) {
        if (!model.has_ratio_bound() || (e.code() != ErrorCode::Unsupported && e.code() != ErrorCode::DepthTooSmall))
            throw;
    }
    if (!measured) {
        rc.exact = false;
        rc.r.assign(opts.probe_depth + 1, 0.0);
    }
    if (model.has_ratio_bound())
        for (std::size_t n = 0; n < rc.r.size(); ++n) rc.r[n] = std::max(rc.r[n], model.ratio_bound(n));
    return rc;
}

template <class T>
RandomMarkovRepresentation<T> ratio_decompose(const ConditionalModel<T>& model, const std::vector<T>& p,
                                              const RatioOptions& opts, RatioLevels<T>* levels_out) {
    const double tol = opts.tolerance < 0 ? ScalarTraits<T>::default_tolerance() : opts.tolerance;
    const std::size_t k = model.alphabet_size();
    RatioCoefficients rc = ratio_bounds_for(model, opts);
    RatioLevels<T> lv = choose_levels(rc, p);
    std::vector<TableFunction<T>> tables;
    std::size_t patched = 0;
    for (std::size_t i = 1; i <= lv.size(); ++i) {
        const std::size_t ni = lv.n[i - 1];
        const std::size_t c = model.context_length(ni);
        const std::size_t words = word_count(k, c);
        std::vector<Distribution<T>> values(words);
        std::vector<char> fixed(words, 0);
        parallel_for(words, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t idx = lo; idx < hi; ++idx) {
                Word w = word_at(idx, c, k);
                try {
                    values[idx] = tau(model, lv, i, w, tol);
                } catch (const Error& e) {
                    // null pasts carry no mass; any distribution will do there
                    if (e.code() != ErrorCode::TauNegative || model.positive(w)) throw;
                    values[idx] = mu(model, ni, w);
                    fixed[idx] = 1;
                }
            }
        });
        for (char f : fixed) patched += f;
        tables.push_back(TableFunction<T>::general(ni, lv.p[i - 1], c, k, std::move(values)));
    }
    auto rep = make_representation(model.alphabet(), TableKind::general, std::move(tables));
    rep.notes["variant"] = "ratio";
    std::string ns, th;
    for (std::size_t i = 0; i < lv.size(); ++i) {
        ns += (i ? "," : "") + std::to_string(lv.n[i]);
        th += (i ? "," : "") + shortest_double(lv.threshold[i]);
    }
    rep.notes["levels"] = ns;
    rep.notes["thresholds"] = th;
    rep.notes["ratio_exact"] = rc.exact ? "true" : "false";
    if (patched) rep.notes["null_pasts_patched"] = std::to_string(patched);
    if (levels_out) *levels_out = std::move(lv);
    return rep;
}

#define RSM_INSTANTIATE(T)                                                                                    \
    template struct RatioLevels<T>;                                                                           \
    template std::vector<T> dyadic_masses<T>(std::size_t, bool);                                              \
    template RatioLevels<T> choose_levels<T>(const RatioCoefficients&, const std::vector<T>&);               \
    template Distribution<T> tau<T>(const ConditionalModel<T>&, const RatioLevels<T>&, std::size_t, WordView, \
                                    double);                                                                  \
    template RatioCoefficients ratio_bounds_for<T>(const ConditionalModel<T>&, const RatioOptions&);          \
    template RandomMarkovRepresentation<T> ratio_decompose<T>(const ConditionalModel<T>&, const std::vector<T>&, \
                                                              const RatioOptions&, RatioLevels<T>*);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
