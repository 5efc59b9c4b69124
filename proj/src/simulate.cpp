#include "rsm/simulate.hpp"

#include <algorithm>
#include <map>

namespace rsm {

namespace {

// Sliding window holding the most recent symbols first, contiguous for WordView lookups.
class PastWindow {
public:
    PastWindow(std::size_t width, std::mt19937_64& rng, std::size_t k) : width_(std::max<std::size_t>(width, 1)) {
        buf_.resize(4 * width_ + 64);
        pos_ = buf_.size() - width_;
        for (std::size_t j = 0; j < width_; ++j) buf_[pos_ + j] = static_cast<Symbol>(rng() % k);
    }
    WordView view() const { return WordView(buf_.data() + pos_, width_); }
    void push(Symbol a) {
        if (pos_ == 0) {
            std::copy(buf_.begin(), buf_.begin() + width_ - 1, buf_.end() - width_ + 1);
            pos_ = buf_.size() - width_ + 1;
        }
        buf_[--pos_] = a;
    }

private:
    std::size_t width_;
    std::size_t pos_ = 0;
    std::vector<Symbol> buf_;
};

template <class T>
Symbol draw(const Distribution<T>& d, double u) {
    double acc = 0.0;
    for (Symbol a = 0; a < d.size(); ++a) {
        acc += to_double(d[a]);
        if (u < acc) return a;
    }
    // rounding left a sliver above the total; take the last positive symbol
    for (Symbol a = static_cast<Symbol>(d.size()); a-- > 0;)
        if (d[a] > 0) return a;
    return 0;
}

}  // namespace

template <class T>
std::vector<SimStep> simulate(const CompleteRMP<T>& source, const SimOptions& opts) {
    const auto& rep = source.representation();
    const std::size_t k = rep.alphabet.size();
    const std::size_t width = rep.max_context();
    if (opts.burn_in < width)
        throw Error(ErrorCode::WarmUp, "burn-in " + std::to_string(opts.burn_in) + " shorter than the longest context " +
                                           std::to_string(width));
    if (rep.tables.empty()) throw Error(ErrorCode::IncompleteRepresentation, "representation has no levels");
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& t : rep.tables) cdf.push_back(acc += to_double(t.mass()));
    std::mt19937_64 rng(opts.seed);
    PastWindow past(width, rng, k);
    std::vector<SimStep> path;
    path.reserve(opts.length);
    for (std::size_t step = 0; step < opts.burn_in + opts.length; ++step) {
        double u = uniform01(rng) * acc;
        std::size_t lv = std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        if (lv >= rep.tables.size()) lv = rep.tables.size() - 1;
        const auto& table = rep.tables[lv];
        Symbol a;
        if (table.storage_kind() == TableKind::deterministic) {
            a = table.symbol_at(word_index(past.view().first(table.context()), k));
            (void)rng();  // keep one symbol draw per step for both storage kinds
        } else {
            a = draw(table.value(past.view()), uniform01(rng));
        }
        past.push(a);
        if (step >= opts.burn_in) path.push_back({a, table.depth()});
    }
    return path;
}

template <class T>
std::vector<SimStep> simulate(const MarkovOrderM<T>& source, const SimOptions& opts) {
    const std::size_t k = source.alphabet().size();
    const std::size_t m = source.order();
    if (opts.burn_in < m)
        throw Error(ErrorCode::WarmUp, "burn-in " + std::to_string(opts.burn_in) + " shorter than the chain order " +
                                           std::to_string(m));
    std::mt19937_64 rng(opts.seed);
    PastWindow past(m, rng, k);
    std::vector<SimStep> path;
    path.reserve(opts.length);
    for (std::size_t step = 0; step < opts.burn_in + opts.length; ++step) {
        const auto& row = m == 0 ? source.row_at(0) : source.row(past.view().first(m));
        Symbol a = draw(row, uniform01(rng));
        past.push(a);
        if (step >= opts.burn_in) path.push_back({a, std::nullopt});
    }
    return path;
}

PathSummary summarize(const std::vector<SimStep>& path, std::size_t alphabet_size) {
    PathSummary s;
    s.symbol_freq.assign(alphabet_size, 0.0);
    std::map<std::uint64_t, double> lb;
    for (const auto& st : path) {
        if (st.symbol < alphabet_size) s.symbol_freq[st.symbol] += 1.0;
        if (st.lookback) lb[*st.lookback] += 1.0;
    }
    double n = path.empty() ? 1.0 : static_cast<double>(path.size());
    for (double& f : s.symbol_freq) f /= n;
    for (const auto& [d, c] : lb) s.lookback_freq.push_back({d, c / n});
    return s;
}

template std::vector<SimStep> simulate<Rational>(const CompleteRMP<Rational>&, const SimOptions&);
template std::vector<SimStep> simulate<double>(const CompleteRMP<double>&, const SimOptions&);
template std::vector<SimStep> simulate<Rational>(const MarkovOrderM<Rational>&, const SimOptions&);
template std::vector<SimStep> simulate<double>(const MarkovOrderM<double>&, const SimOptions&);

}  // namespace rsm
