#include "rsm/catalog.hpp"

#include <algorithm>
#include <functional>

namespace rsm {

namespace {

template <class T>
T r(long a, long b) {
    return ratio<T>(a, b);
}

template <class T>
Distribution<T> normalized(std::vector<T> v) {
    T total = ScalarTraits<T>::zero();
    for (const T& x : v) total += x;
    for (T& x : v) x /= total;
    return Distribution<T>(std::move(v), ScalarTraits<T>::exact ? 0.0 : 1e-9);
}

std::string key(std::string_view s) { return std::string(s); }

std::size_t pick(std::optional<std::size_t> t, std::size_t def, std::size_t min, const std::string& name) {
    std::size_t v = t.value_or(def);
    if (v < min)
        throw Error(ErrorCode::TruncationTooSmall, name + " needs truncation at least " + std::to_string(min) +
                                                       ", got " + std::to_string(v));
    return v;
}

}  // namespace

std::vector<std::string> example_names() {
    return {"rm-notMarkov", "not-determ", "inf-look-back", "rwbins", "rmnodom", "two-step",
            "two-state",    "bernoulli-half", "bernoulli-three-quarters"};
}

template <class T>
MarkovOrderM<T> two_state_chain() {
    std::vector<Distribution<T>> rows;
    rows.emplace_back(std::vector<T>{r<T>(9, 10), r<T>(1, 10)});
    rows.emplace_back(std::vector<T>{r<T>(2, 10), r<T>(8, 10)});
    return MarkovOrderM<T>(FiniteAlphabet::numbered(2), 1, std::move(rows));
}

template <class T>
MarkovOrderM<T> bernoulli_chain(const T& p0) {
    std::vector<Distribution<T>> rows;
    rows.emplace_back(std::vector<T>{p0, T(ScalarTraits<T>::one() - p0)});
    return MarkovOrderM<T>(FiniteAlphabet::numbered(2), 0, std::move(rows));
}

template <class T>
MarkovOrderM<T> rmnodom_chain(std::size_t n) {
    // states 1..n; from m: back to 1 or up to m+1, each 1/2; the top state returns to 1
    std::vector<Distribution<T>> rows;
    for (std::size_t m = 1; m <= n; ++m) {
        std::vector<T> row(n, ScalarTraits<T>::zero());
        row[0] += r<T>(1, 2);
        if (m < n)
            row[m] += r<T>(1, 2);
        else
            row[0] += r<T>(1, 2);
        rows.push_back(normalized(std::move(row)));
    }
    return MarkovOrderM<T>(FiniteAlphabet::numbered(n, 1), 1, std::move(rows));
}

template <class T>
MarkovOrderM<T> not_determ_chain(std::size_t n) {
    std::vector<std::string> labels{"0:1"};
    std::vector<std::size_t> level_start(n + 2, 0);
    for (std::size_t a = 1; a <= n; ++a) {
        level_start[a] = labels.size();
        for (std::size_t k = 1; k <= a; ++k) labels.push_back(std::to_string(a) + ":" + std::to_string(k));
    }
    FiniteAlphabet alpha(labels);
    const std::size_t size = labels.size();
    auto level_of = [&](std::size_t idx) {
        if (idx == 0) return std::size_t(0);
        std::size_t a = 1;
        while (a < n && level_start[a + 1] <= idx) ++a;
        return a;
    };
    std::vector<Distribution<T>> rows;
    for (std::size_t idx = 0; idx < size; ++idx) {
        std::size_t b = level_of(idx);
        std::vector<T> row(size, ScalarTraits<T>::zero());
        auto spread = [&](std::size_t a, const T& total) {
            if (a == 0) {
                row[0] += total;
                return;
            }
            for (std::size_t k = 0; k < a; ++k) row[level_start[a] + k] += total / T(static_cast<long>(a));
        };
        if (b == 0) {
            spread(1, ScalarTraits<T>::one());
        } else {
            spread(b - 1, r<T>(2, 3));
            if (b < n) spread(b + 1, r<T>(1, 3));
        }
        rows.push_back(normalized(std::move(row)));
    }
    return MarkovOrderM<T>(alpha, 1, std::move(rows));
}

template <class T>
MarkovOrderM<T> two_step_chain(std::size_t n) {
    // alphabet 1..n; row index word (X_-1 = a, X_-2 = b)
    std::vector<Distribution<T>> rows(n * n);
    for (std::size_t b = 1; b <= n; ++b) {
        for (std::size_t a = 1; a <= n; ++a) {
            std::vector<T> row(n, ScalarTraits<T>::zero());
            for (std::size_t c = 1; c <= n; ++c) {
                T v;
                if (a != b) {
                    if (c == a)
                        v = r<T>(1, 2);
                    else
                        v = inv_pow2<T>(static_cast<unsigned>(c + 1)) /
                            T(ScalarTraits<T>::one() - inv_pow2<T>(static_cast<unsigned>(a)));
                } else {
                    if (c == b)
                        v = ScalarTraits<T>::zero();
                    else
                        v = inv_pow2<T>(static_cast<unsigned>(c)) /
                            T(ScalarTraits<T>::one() - inv_pow2<T>(static_cast<unsigned>(b)));
                }
                row[c - 1] = v;
            }
            Word w{static_cast<Symbol>(a - 1), static_cast<Symbol>(b - 1)};
            rows[word_index(w, n)] = normalized(std::move(row));
        }
    }
    return MarkovOrderM<T>(FiniteAlphabet::numbered(n, 1), 2, std::move(rows));
}

template <class T>
std::vector<T> rm_not_markov_masses(std::size_t t) {
    std::vector<T> p;
    for (std::size_t k = 1; k < t; ++k) p.push_back(inv_pow2<T>(static_cast<unsigned>(k)));
    p.push_back(inv_pow2<T>(static_cast<unsigned>(t - 1)));
    if (t == 1) p.back() = ScalarTraits<T>::one();
    return p;
}

Symbol rwbins_symbol(std::size_t b, std::size_t y) {
    return static_cast<Symbol>((b - 1) * (b + 2) / 2 + (y - 1));
}

std::vector<Word> rwbins_probe_words(std::size_t bins, std::size_t n) {
    std::vector<Word> out;
    if (n == 0) {
        out.push_back({});
        return out;
    }
    const std::size_t lo = n, hi = std::min(n + 2, bins);
    std::vector<std::size_t> b(n);
    std::function<void(std::size_t)> rec = [&](std::size_t j) {
        if (j == n) {
            // visible constraint: equal Y at lag 2k when the bins agree has probability 0
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t lag = 2 * b[i];
                if (i + lag < n && b[i + lag] == b[i]) return;
            }
            Word w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = rwbins_symbol(b[i], 1);
            out.push_back(std::move(w));
            return;
        }
        for (std::size_t v = lo; v <= hi; ++v) {
            if (j > 0) {
                std::size_t newer = b[j - 1];
                std::size_t diff = newer > v ? newer - v : v - newer;
                if (diff != 1) continue;
            }
            b[j] = v;
            rec(j + 1);
        }
    };
    rec(0);
    return out;
}

template <class T>
ConditionalModel<T> rwbins_model(std::size_t bins) {
    const std::size_t K = bins;
    std::vector<std::string> labels;
    std::vector<std::size_t> bin_of, pos_of;
    for (std::size_t b = 1; b <= K; ++b)
        for (std::size_t y = 1; y <= b + 1; ++y) {
            labels.push_back(std::to_string(b) + ":" + std::to_string(y));
            bin_of.push_back(b);
            pos_of.push_back(y);
        }
    const std::size_t size = labels.size();
    // truncated walk stationary law by detailed balance
    std::vector<T> pi(K + 1, ScalarTraits<T>::zero());
    pi[1] = ScalarTraits<T>::one();
    if (K >= 2) pi[2] = r<T>(3, 2);
    for (std::size_t b = 2; b + 1 < K; ++b) pi[b + 1] = pi[b] / T(2);
    if (K >= 3) pi[K] = pi[K - 1] / T(3);
    T total = ScalarTraits<T>::zero();
    for (std::size_t b = 1; b <= K; ++b) total += pi[b];
    for (std::size_t b = 1; b <= K; ++b) pi[b] /= total;

    typename ConditionalModel<T>::Spec spec;
    spec.name = "rwbins";
    spec.alphabet = FiniteAlphabet(labels);
    spec.cond = [=](WordView w) -> Distribution<T> {
        std::vector<T> m(size, ScalarTraits<T>::zero());
        if (w.empty()) {
            for (std::size_t s = 0; s < size; ++s) m[s] = pi[bin_of[s]] / T(static_cast<long>(bin_of[s] + 1));
            return Distribution<T>(std::move(m), ScalarTraits<T>::exact ? 0.0 : 1e-9);
        }
        std::size_t prev = bin_of[w[0]];
        std::vector<std::pair<std::size_t, T>> moves;
        if (prev == 1)
            moves.push_back({2, ScalarTraits<T>::one()});
        else if (prev == K)
            moves.push_back({K - 1, ScalarTraits<T>::one()});
        else {
            moves.push_back({prev - 1, r<T>(2, 3)});
            moves.push_back({prev + 1, r<T>(1, 3)});
        }
        for (const auto& [k0, q] : moves) {
            std::size_t lag = 2 * k0;
            bool seen = lag <= w.size() && bin_of[w[lag - 1]] == k0;
            std::size_t banned = seen ? pos_of[w[lag - 1]] : 0;
            T each = seen ? T(q / T(static_cast<long>(k0))) : T(q / T(static_cast<long>(k0 + 1)));
            for (std::size_t y = 1; y <= k0 + 1; ++y)
                if (y != banned) m[rwbins_symbol(k0, y)] = each;
        }
        return Distribution<T>(std::move(m), ScalarTraits<T>::exact ? 0.0 : 1e-9);
    };
    spec.var_bound = [](std::size_t n) {
        if (n <= 2) return ScalarTraits<T>::one();
        return r<T>(2, static_cast<long>(n));
    };
    spec.var_sum = std::numeric_limits<double>::infinity();
    spec.probe_words = [K](std::size_t n) { return rwbins_probe_words(K, n); };
    spec.metadata["truncation"] = "bins 1.." + std::to_string(K);
    spec.metadata["renormalization"] = "top bin moves down with probability 1";
    spec.metadata["oracle"] = "bounded-depth: Y0 uniform unless the lag-2k bin is visible and equals k";
    spec.metadata["var_bound"] = "declared 2/n (estimate only)";
    return ConditionalModel<T>(std::move(spec));
}

template <class T>
CatalogEntry<T> example(std::string_view name, std::optional<std::size_t> truncation) {
    CatalogEntry<T> e;
    e.name = key(name);
    auto finish_chain = [&](MarkovOrderM<T> chain, std::optional<DominatingMeasure<T>> dom = {}) {
        e.model = std::make_shared<const ConditionalModel<T>>(to_model(chain, std::move(dom), e.name));
        e.chain = std::move(chain);
    };
    if (name == "two-state") {
        finish_chain(two_state_chain<T>());
    } else if (name == "bernoulli-half") {
        finish_chain(bernoulli_chain<T>(r<T>(1, 2)));
    } else if (name == "bernoulli-three-quarters") {
        finish_chain(bernoulli_chain<T>(r<T>(3, 4)));
    } else if (name == "rmnodom") {
        e.truncation = pick(truncation, 30, 2, e.name);
        finish_chain(rmnodom_chain<T>(e.truncation));
        e.metadata["truncation"] = "states 1.." + std::to_string(e.truncation);
        e.metadata["renormalization"] = "top state returns to 1 with probability 1";
    } else if (name == "not-determ") {
        e.truncation = pick(truncation, 40, 2, e.name);
        finish_chain(not_determ_chain<T>(e.truncation));
        e.metadata["truncation"] = "first coordinate 0.." + std::to_string(e.truncation);
        e.metadata["renormalization"] = "top level moves down with probability 1";
    } else if (name == "two-step") {
        e.truncation = pick(truncation, 36, 3, e.name);
        finish_chain(two_step_chain<T>(e.truncation));
        e.metadata["truncation"] = "alphabet 1.." + std::to_string(e.truncation);
        e.metadata["renormalization"] = "rows rescaled proportionally over the kept symbols";
    } else if (name == "inf-look-back") {
        e.truncation = pick(truncation, 3, 1, e.name);
        std::vector<std::string> labels;
        std::vector<T> mass;
        for (std::size_t i = 1; i <= e.truncation; ++i) {
            std::size_t zi = std::size_t(1) << (2 * i);
            for (std::size_t j = 1; j <= zi; ++j) {
                labels.push_back(std::to_string(i) + ":" + std::to_string(j));
                mass.push_back(inv_pow2<T>(static_cast<unsigned>(3 * i)));
            }
        }
        Distribution<T> row = normalized(mass);
        std::vector<Distribution<T>> rows{row};
        MarkovOrderM<T> chain(FiniteAlphabet(labels), 0, rows);
        finish_chain(chain, DominatingMeasure<T>(row.vec()));
        e.metadata["truncation"] = "blocks Z_1..Z_" + std::to_string(e.truncation);
        e.metadata["renormalization"] = "masses divided by 1 - 2^-I";
    } else if (name == "rwbins") {
        e.truncation = pick(truncation, 18, 3, e.name);
        e.model = std::make_shared<const ConditionalModel<T>>(rwbins_model<T>(e.truncation));
        e.metadata = e.model->metadata();
    } else if (name == "rm-notMarkov") {
        e.truncation = pick(truncation, 20, 1, e.name);
        const std::size_t t = e.truncation;
        const std::vector<T> p = rm_not_markov_masses<T>(t);
        std::vector<std::string> labels;
        for (std::size_t l = 1; l <= t; ++l)
            for (int bit = 0; bit < 2; ++bit) labels.push_back(std::to_string(bit) + ":" + std::to_string(l));
        FiniteAlphabet alpha(labels);
        const std::size_t k = labels.size();
        auto full = [p, t, k](WordView w) -> Distribution<T> {
            std::vector<T> m(k, ScalarTraits<T>::zero());
            for (std::size_t l = 1; l <= t; ++l) {
                Symbol past = w[l - 1];
                unsigned old_bit = past % 2;
                m[2 * (l - 1) + old_bit] = p[l - 1] * r<T>(1, 4);
                m[2 * (l - 1) + (1 - old_bit)] = p[l - 1] * r<T>(3, 4);
            }
            return Distribution<T>(std::move(m), ScalarTraits<T>::exact ? 0.0 : 1e-9);
        };
        std::vector<T> dom(k);
        for (std::size_t l = 1; l <= t; ++l) dom[2 * (l - 1)] = dom[2 * (l - 1) + 1] = p[l - 1] * r<T>(3, 4);
        bool small = ScalarTraits<T>::exact ? t <= 3 : t <= 4;
        if (small) {
            std::size_t states = word_count(k, t);
            std::vector<Distribution<T>> rows;
            rows.reserve(states);
            for (std::size_t idx = 0; idx < states; ++idx) rows.push_back(full(word_at(idx, t, k)));
            finish_chain(MarkovOrderM<T>(alpha, t, std::move(rows)), DominatingMeasure<T>(dom));
        } else {
            typename ConditionalModel<T>::Spec spec;
            spec.name = e.name;
            spec.alphabet = alpha;
            spec.order = t;
            spec.cond = [full, t](WordView w) -> Distribution<T> {
                if (w.size() < t)
                    throw Error(ErrorCode::Unsupported,
                                "pasts shorter than the truncation need the stationary law, available for truncation <= 4");
                return full(w);
            };
            spec.var_bound = [p, t](std::size_t n) {
                T best = ScalarTraits<T>::zero();
                for (std::size_t l = n + 1; l <= t; ++l)
                    if (T(p[l - 1] / T(2)) > best) best = p[l - 1] / T(2);
                return best;
            };
            double s = 0;
            for (std::size_t n = 0; n < t; ++n) s += to_double(spec.var_bound(n));
            spec.var_sum = s;
            spec.dominating = DominatingMeasure<T>(dom);
            e.model = std::make_shared<const ConditionalModel<T>>(std::move(spec));
        }
        std::vector<TableFunction<T>> tables;
        for (std::size_t l = 1; l <= t; ++l) {
            auto table = [l, k](WordView w) -> Distribution<T> {
                std::vector<T> m(k, ScalarTraits<T>::zero());
                unsigned old_bit = w[l - 1] % 2;
                m[2 * (l - 1) + old_bit] = r<T>(1, 4);
                m[2 * (l - 1) + (1 - old_bit)] = r<T>(3, 4);
                return Distribution<T>(std::move(m));
            };
            tables.push_back(TableFunction<T>::functional(l, p[l - 1], l, k, table));
        }
        e.representation = make_representation(alpha, TableKind::general, std::move(tables));
        e.metadata["truncation"] = "look-back 1.." + std::to_string(t);
        e.metadata["renormalization"] = "P(L = T) absorbs the tail 2^-(T-1)";
    } else {
        throw Error(ErrorCode::UnknownExample, "unknown example '" + std::string(name) + "'");
    }
    for (const auto& [k, v] : e.model->metadata()) e.metadata.emplace(k, v);
    return e;
}

#define RSM_INSTANTIATE(T)                                                                    \
    template MarkovOrderM<T> two_state_chain<T>();                                            \
    template MarkovOrderM<T> bernoulli_chain<T>(const T&);                                    \
    template MarkovOrderM<T> rmnodom_chain<T>(std::size_t);                                   \
    template MarkovOrderM<T> not_determ_chain<T>(std::size_t);                                \
    template MarkovOrderM<T> two_step_chain<T>(std::size_t);                                  \
    template std::vector<T> rm_not_markov_masses<T>(std::size_t);                             \
    template ConditionalModel<T> rwbins_model<T>(std::size_t);                                \
    template CatalogEntry<T> example<T>(std::string_view, std::optional<std::size_t>);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
