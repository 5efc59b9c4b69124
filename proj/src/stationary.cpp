#include <algorithm>
#include <cmath>

#include "rsm/model.hpp"

namespace rsm {

namespace {

constexpr std::size_t kDenseLimit = 2000;
constexpr std::size_t kExactLimit = 600;

struct Graph {
    std::vector<std::vector<std::size_t>> out;
};

// Tarjan's algorithm, iterative. Returns the component id of every vertex.
std::vector<std::size_t> strong_components(const Graph& g, std::size_t& count) {
    const std::size_t n = g.out.size();
    const std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, none), low(n, 0), comp(n, none);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> call;
    std::size_t next = 0;
    count = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != none) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, edge] = call.back();
            if (edge == 0) {
                index[v] = low[v] = next++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            if (edge < g.out[v].size()) {
                std::size_t w = g.out[v][edge++];
                if (index[w] == none) {
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                while (true) {
                    std::size_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                    if (w == v) break;
                }
                ++count;
            }
            std::size_t done = v;
            call.pop_back();
            if (!call.empty()) {
                std::size_t parent = call.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
        }
    }
    return comp;
}

// Solves pi P = pi, sum pi = 1 on a closed class by Gaussian elimination.
template <class T>
std::vector<T> solve_dense(const std::vector<std::vector<std::pair<std::size_t, T>>>& rows, std::size_t n) {
    // unknown pi_j; equation for column j: sum_i pi_i P(i,j) - pi_j = 0; last equation replaced by sum = 1
    std::vector<std::vector<T>> a(n, std::vector<T>(n + 1, ScalarTraits<T>::zero()));
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, p] : rows[i]) a[j][i] += p;
    for (std::size_t j = 0; j < n; ++j) a[j][j] -= ScalarTraits<T>::one();
    for (std::size_t i = 0; i < n; ++i) a[n - 1][i] = ScalarTraits<T>::one();
    a[n - 1][n] = ScalarTraits<T>::one();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = n;
        if constexpr (ScalarTraits<T>::exact) {
            for (std::size_t r = col; r < n; ++r)
                if (a[r][col] != 0) {
                    piv = r;
                    break;
                }
        } else {
            double best = 0.0;
            for (std::size_t r = col; r < n; ++r)
                if (std::fabs(a[r][col]) > best) {
                    best = std::fabs(a[r][col]);
                    piv = r;
                }
        }
        if (piv == n) throw Error(ErrorCode::MultipleInvariantMeasures, "singular invariance system");
        std::swap(a[piv], a[col]);
        T inv = ScalarTraits<T>::one() / a[col][col];
        for (std::size_t c = col; c <= n; ++c) a[col][c] *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            T f = a[r][col];
            for (std::size_t c = col; c <= n; ++c)
                if (a[col][c] != 0) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<T> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = a[i][n];
    return pi;
}

std::vector<double> solve_power(const std::vector<std::vector<std::pair<std::size_t, double>>>& rows, std::size_t n) {
    std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
    for (int iter = 0; iter < 200000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& [j, p] : rows[i]) next[j] += pi[i] * p;
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // lazy step avoids oscillation on periodic classes
            double v = 0.5 * (pi[i] + next[i]);
            diff += std::fabs(v - pi[i]);
            pi[i] = v;
        }
        if (diff < 1e-15) break;
    }
    double s = 0.0;
    for (double v : pi) s += v;
    for (double& v : pi) v /= s;
    return pi;
}

}  // namespace

template <class T>
StationaryWordMeasure<T> stationary_markov(const MarkovOrderM<T>& chain, double tol) {
    const std::size_t k = chain.alphabet().size();
    const std::size_t m = chain.order();
    if (m == 0) return StationaryWordMeasure<T>(chain.alphabet(), 0, {ScalarTraits<T>::one()});
    const std::size_t states = chain.state_count();
    const std::size_t km1 = states / k;
    Graph g;
    g.out.resize(states);
    for (std::size_t s = 0; s < states; ++s) {
        const auto& r = chain.row_at(s);
        for (Symbol a = 0; a < k; ++a)
            if (r[a] > 0) g.out[s].push_back(a + k * (s % km1));
    }
    std::size_t ncomp = 0;
    auto comp = strong_components(g, ncomp);
    std::vector<char> closed(ncomp, 1);
    for (std::size_t s = 0; s < states; ++s)
        for (std::size_t t : g.out[s])
            if (comp[t] != comp[s]) closed[comp[s]] = 0;
    std::size_t nclosed = 0, which = 0;
    for (std::size_t c = 0; c < ncomp; ++c)
        if (closed[c]) {
            ++nclosed;
            which = c;
        }
    if (nclosed != 1)
        throw Error(ErrorCode::MultipleInvariantMeasures,
                    std::to_string(nclosed) + " closed communicating classes; the invariant measure is not unique");
    std::vector<std::size_t> members, local(states, static_cast<std::size_t>(-1));
    for (std::size_t s = 0; s < states; ++s)
        if (comp[s] == which) {
            local[s] = members.size();
            members.push_back(s);
        }
    const std::size_t n = members.size();
    if (ScalarTraits<T>::exact && n > kExactLimit)
        throw Error(ErrorCode::Unsupported, "exact invariant-measure solve limited to " + std::to_string(kExactLimit) +
                                                " recurrent states, got " + std::to_string(n));
    std::vector<std::vector<std::pair<std::size_t, T>>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t s = members[i];
        const auto& r = chain.row_at(s);
        for (Symbol a = 0; a < k; ++a)
            if (r[a] > 0) rows[i].push_back({local[a + k * (s % km1)], r[a]});
    }
    std::vector<T> pi;
    if (n == 1) {
        pi = {ScalarTraits<T>::one()};
    } else if constexpr (ScalarTraits<T>::exact) {
        pi = solve_dense<T>(rows, n);
    } else {
        pi = n <= kDenseLimit ? solve_dense<T>(rows, n) : solve_power(rows, n);
    }
    std::vector<T> mass(states, ScalarTraits<T>::zero());
    for (std::size_t i = 0; i < n; ++i) mass[members[i]] = ScalarTraits<T>::exact ? pi[i] : T(pi[i] < 0 ? 0 : pi[i]);
    // invariance residual
    std::vector<T> image(states, ScalarTraits<T>::zero());
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, p] : rows[i]) image[members[j]] += mass[members[i]] * p;
    double worst = 0.0;
    for (std::size_t s = 0; s < states; ++s) worst = std::max(worst, std::fabs(to_double(T(image[s] - mass[s]))));
    double allowed = ScalarTraits<T>::exact ? 0.0 : std::max(tol, 1e-12) * 100;
    if (worst > allowed)
        throw Error(ErrorCode::MultipleInvariantMeasures, "invariance residual " + shortest_double(worst) + " too large");
    return StationaryWordMeasure<T>(chain.alphabet(), m, std::move(mass), ScalarTraits<T>::exact ? 0.0 : 1e-9);
}

template StationaryWordMeasure<Rational> stationary_markov<Rational>(const MarkovOrderM<Rational>&, double);
template StationaryWordMeasure<double> stationary_markov<double>(const MarkovOrderM<double>&, double);

}  // namespace rsm
