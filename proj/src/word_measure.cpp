#include "rsm/word_measure.hpp"

#include <algorithm>

namespace rsm {

template <class T>
StationaryWordMeasure<T>::StationaryWordMeasure(FiniteAlphabet alphabet, std::size_t depth, std::vector<T> mass,
                                                 double tol)
    : alphabet_(std::move(alphabet)), depth_(depth), mass_(std::move(mass)) {
    std::size_t expected = word_count(alphabet_.size(), depth_);
    if (mass_.size() != expected)
        throw Error(ErrorCode::InvalidDistribution, "word measure of depth " + std::to_string(depth_) + " needs " +
                                                        std::to_string(expected) + " entries, got " +
                                                        std::to_string(mass_.size()));
    T total = ScalarTraits<T>::zero();
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        if (mass_[i] < 0 && !is_zero_tol(mass_[i], tol))
            throw Error(ErrorCode::InvalidDistribution,
                        "negative mass at word '" + format_word(alphabet_, word_at(i, depth_, alphabet_.size())) + "'");
        total += mass_[i];
    }
    if (!eq_tol(total, ScalarTraits<T>::one(), tol))
        throw Error(ErrorCode::InvalidDistribution, "word measure total " + format_value(total) + " differs from 1");
}

template <class T>
const T& StationaryWordMeasure<T>::mass(WordView w) const {
    if (w.size() != depth_)
        throw Error(ErrorCode::DepthTooSmall, "word of length " + std::to_string(w.size()) +
                                                  " queried on a depth-" + std::to_string(depth_) + " measure");
    return mass_[word_index(w, alphabet_.size())];
}

template <class T>
StationaryWordMeasure<T> StationaryWordMeasure<T>::marginal_recent(std::size_t c) const {
    if (c > depth_) throw Error(ErrorCode::DepthTooSmall, "marginal deeper than the measure");
    std::size_t m = word_count(alphabet_.size(), c);
    std::vector<T> out(m, ScalarTraits<T>::zero());
    for (std::size_t i = 0; i < mass_.size(); ++i) out[i % m] += mass_[i];
    StationaryWordMeasure r;
    r.alphabet_ = alphabet_;
    r.depth_ = c;
    r.mass_ = std::move(out);
    return r;
}

template <class T>
StationaryWordMeasure<T> StationaryWordMeasure<T>::marginal_oldest(std::size_t c) const {
    if (c > depth_) throw Error(ErrorCode::DepthTooSmall, "marginal deeper than the measure");
    std::size_t m = word_count(alphabet_.size(), c);
    std::size_t div = word_count(alphabet_.size(), depth_ - c);
    std::vector<T> out(m, ScalarTraits<T>::zero());
    for (std::size_t i = 0; i < mass_.size(); ++i) out[i / div] += mass_[i];
    StationaryWordMeasure r;
    r.alphabet_ = alphabet_;
    r.depth_ = c;
    r.mass_ = std::move(out);
    return r;
}

template <class T>
StationarityReport<T> check_stationary(const StationaryWordMeasure<T>& mu, double tol) {
    StationarityReport<T> rep;
    rep.discrepancy = ScalarTraits<T>::zero();
    rep.total = ScalarTraits<T>::zero();
    for (const T& x : mu.masses()) rep.total += x;
    if (mu.depth() >= 1) {
        auto left = mu.marginal_recent(mu.depth() - 1);
        auto right = mu.marginal_oldest(mu.depth() - 1);
        for (std::size_t i = 0; i < left.masses().size(); ++i) {
            T d = abs_value(T(left.mass_at(i) - right.mass_at(i)));
            if (d > rep.discrepancy) {
                rep.discrepancy = d;
                rep.witness = word_at(i, mu.depth() - 1, mu.alphabet().size());
            }
        }
    }
    rep.passed = le_tol(rep.discrepancy, ScalarTraits<T>::zero(), tol) &&
                 eq_tol(rep.total, ScalarTraits<T>::one(), tol);
    return rep;
}

template <class T>
CouplingRule<T> independent_coupling() {
    return [](WordView, const Distribution<T>& older, const Distribution<T>& newer) {
        JointLaw<T> c{older.size(), std::vector<T>(older.size() * newer.size())};
        for (Symbol x = 0; x < older.size(); ++x)
            for (Symbol y = 0; y < newer.size(); ++y) c.at(x, y) = older[x] * newer[y];
        return c;
    };
}

template <class T>
CouplingRule<T> maximal_coupling() {
    return [](WordView, const Distribution<T>& older, const Distribution<T>& newer) {
        std::size_t k = older.size();
        JointLaw<T> c{k, std::vector<T>(k * k, ScalarTraits<T>::zero())};
        std::vector<T> lo(k), ro(k);
        T overlap = ScalarTraits<T>::zero();
        for (Symbol a = 0; a < k; ++a) {
            T m = older[a] < newer[a] ? older[a] : newer[a];
            c.at(a, a) = m;
            overlap += m;
            lo[a] = older[a] - m;
            ro[a] = newer[a] - m;
        }
        T rest = ScalarTraits<T>::one() - overlap;
        if (rest > 0) {
            for (Symbol x = 0; x < k; ++x)
                for (Symbol y = 0; y < k; ++y) c.at(x, y) += lo[x] * ro[y] / rest;
        }
        return c;
    };
}

template <class T>
CouplingRule<T> chain_coupling(std::function<Distribution<T>(WordView)> cond) {
    return [cond](WordView middle, const Distribution<T>& older, const Distribution<T>&) {
        std::size_t k = older.size();
        JointLaw<T> c{k, std::vector<T>(k * k, ScalarTraits<T>::zero())};
        Word past(middle.begin(), middle.end());
        past.push_back(0);
        for (Symbol x = 0; x < k; ++x) {
            if (older[x] == 0) continue;
            past.back() = x;
            Distribution<T> row = cond(past);
            for (Symbol y = 0; y < k; ++y) c.at(x, y) = older[x] * row[y];
        }
        return c;
    };
}

template <class T>
StationaryWordMeasure<T> extend_stationary(const StationaryWordMeasure<T>& mu, const CouplingRule<T>& rule,
                                           double tol) {
    if (mu.depth() < 1) throw Error(ErrorCode::DepthTooSmall, "extension needs a measure of depth at least 1");
    auto report = check_stationary(mu, tol);
    if (!report.passed)
        throw Error(ErrorCode::NonStationary,
                    "input measure has marginal discrepancy " + format_value(report.discrepancy) +
                        (report.witness ? " at word '" + format_word(mu.alphabet(), *report.witness) + "'" : ""));
    const std::size_t k = mu.alphabet().size();
    const std::size_t n = mu.depth();
    const std::size_t kn1 = word_count(k, n - 1);
    const std::size_t kn = kn1 * k;
    auto base = mu.marginal_recent(n - 1);
    std::vector<T> out(kn * k, ScalarTraits<T>::zero());
    std::vector<T> lx(k), ry(k);
    for (std::size_t idx = 0; idx < kn1; ++idx) {
        const T& b = base.mass_at(idx);
        if (b == 0) continue;
        for (Symbol s = 0; s < k; ++s) {
            lx[s] = mu.mass_at(idx + s * kn1) / b;
            ry[s] = mu.mass_at(s + k * idx) / b;
        }
        Word middle = word_at(idx, n - 1, k);
        Distribution<T> older(lx, tol), newer(ry, tol);
        JointLaw<T> c = rule(middle, older, newer);
        if (c.k != k || c.cells.size() != k * k)
            throw Error(ErrorCode::CouplingMismatch, "coupling has the wrong shape");
        for (Symbol x = 0; x < k; ++x) {
            T row = ScalarTraits<T>::zero(), col = ScalarTraits<T>::zero();
            for (Symbol y = 0; y < k; ++y) {
                if (c.at(x, y) < 0 && !is_zero_tol(c.at(x, y), tol))
                    throw Error(ErrorCode::CouplingMismatch, "negative coupling mass at middle word '" +
                                                                 format_word(mu.alphabet(), middle) + "'");
                row += c.at(x, y);
                col += c.at(y, x);
            }
            if (!eq_tol(row, lx[x], tol) || !eq_tol(col, ry[x], tol))
                throw Error(ErrorCode::CouplingMismatch,
                            "coupling marginals differ from the extension laws at middle word '" +
                                format_word(mu.alphabet(), middle) + "'");
        }
        for (Symbol x = 0; x < k; ++x)
            for (Symbol y = 0; y < k; ++y) out[y + k * idx + x * kn] = b * c.at(x, y);
    }
    return StationaryWordMeasure<T>(mu.alphabet(), n + 1, std::move(out), tol == 0.0 ? 0.0 : tol * 10);
}

#define RSM_INSTANTIATE(T)                                                                                 \
    template class StationaryWordMeasure<T>;                                                               \
    template StationarityReport<T> check_stationary<T>(const StationaryWordMeasure<T>&, double);           \
    template CouplingRule<T> independent_coupling<T>();                                                    \
    template CouplingRule<T> maximal_coupling<T>();                                                        \
    template CouplingRule<T> chain_coupling<T>(std::function<Distribution<T>(WordView)>);                  \
    template StationaryWordMeasure<T> extend_stationary<T>(const StationaryWordMeasure<T>&, const CouplingRule<T>&, \
                                                           double);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
