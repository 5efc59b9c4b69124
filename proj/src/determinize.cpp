#include "rsm/determinize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace rsm {

template <class T>
std::vector<std::uint8_t> canonical_digits(const T& q, std::size_t depth) {
    if (q < 0 || q > 1) throw Error(ErrorCode::Precondition, "digit expansion needs a value in [0,1]");
    std::vector<std::uint8_t> out(depth, 0);
    if (q == 0) return out;
    // the remainder stays in (0,1], which gives the expansion ending in ones
    T x = q;
    for (std::size_t k = 0; k < depth; ++k) {
        x = x * 2;
        if (x > 1) {
            out[k] = 1;
            x = x - 1;
        }
    }
    return out;
}

template <class T>
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> split_digits(const T& q, std::size_t depth) {
    auto one = canonical_digits(q, depth);
    std::vector<std::uint8_t> zero(depth);
    for (std::size_t k = 0; k < depth; ++k) zero[k] = static_cast<std::uint8_t>(1 - one[k]);
    return {std::move(zero), std::move(one)};
}

template <class T>
T digits_value(const std::vector<std::uint8_t>& digits) {
    T v = ScalarTraits<T>::zero();
    for (std::size_t k = digits.size(); k-- > 0;) {
        v = v + T(digits[k]);
        v = v / 2;
    }
    return v;
}

IndexFamily parse_family(const std::string& name) {
    if (name == "prime") return IndexFamily::prime;
    if (name == "balister") return IndexFamily::balister;
    throw Error(ErrorCode::Parse, "unknown index family '" + name + "' (expected prime or balister)");
}

std::string family_name(IndexFamily f) { return f == IndexFamily::prime ? "prime" : "balister"; }

namespace {

constexpr std::uint64_t kPrimeIndexLimit = 20'000'000;

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "index function value exceeds 64 bits");
    return r;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorCode::Overflow, "index function value exceeds 64 bits");
    return r;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t e) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < e; ++i) r = checked_mul(r, base);
    return r;
}

}  // namespace

std::uint64_t nth_prime(std::uint64_t i) {
    if (i == 0) throw Error(ErrorCode::Precondition, "primes are indexed from 1");
    if (i > kPrimeIndexLimit) throw Error(ErrorCode::Overflow, "prime index " + std::to_string(i) + " out of range");
    static std::mutex lock;
    static std::vector<std::uint64_t> primes;
    std::lock_guard<std::mutex> guard(lock);
    if (primes.size() < i) {
        double n = static_cast<double>(std::max<std::uint64_t>(i, 6));
        auto limit = static_cast<std::size_t>(n * (std::log(n) + std::log(std::log(n)))) + 16;
        std::vector<char> composite(limit + 1, 0);
        primes.clear();
        for (std::size_t p = 2; p <= limit; ++p) {
            if (composite[p]) continue;
            primes.push_back(p);
            for (std::size_t m = p * p; m <= limit; m += p) composite[m] = 1;
        }
    }
    return primes[i - 1];
}

std::uint64_t balister_element(std::uint64_t i, std::uint64_t j) {
    if (i == 0 || j == 0) throw Error(ErrorCode::Precondition, "Balister sets are indexed from 1");
    // j in [2^n, 2^(n+1)) sits on level n at position j - 2^n; each bit picks 4t+1 or 4t+2
    unsigned n = 63 - static_cast<unsigned>(__builtin_clzll(j));
    std::uint64_t pos = j - (std::uint64_t{1} << n);
    std::uint64_t t = checked_mul(4, i) - 1;
    for (unsigned b = n; b-- > 0;) {
        std::uint64_t bit = (pos >> b) & 1;
        t = checked_add(checked_mul(4, t), 1 + bit);
    }
    return t;
}

std::vector<std::uint64_t> balister_level(std::uint64_t i, std::size_t n) {
    std::vector<std::uint64_t> level{checked_mul(4, i) - 1};
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::uint64_t> next;
        next.reserve(level.size() * 2);
        for (std::uint64_t t : level) {
            next.push_back(checked_add(checked_mul(4, t), 1));
            next.push_back(checked_add(checked_mul(4, t), 2));
        }
        level = std::move(next);
    }
    std::sort(level.begin(), level.end());
    return level;
}

IndexFunction::IndexFunction(IndexFamily family, std::size_t arity) : family_(family), arity_(arity) {
    if (arity < 2) throw Error(ErrorCode::Precondition, "index function arity must be at least 2");
}

std::uint64_t IndexFunction::f1(std::uint64_t i, std::uint64_t j) const {
    if (i == 0 || j == 0) throw Error(ErrorCode::Precondition, "index function arguments are positive");
    if (family_ == IndexFamily::balister) return balister_element(i, j);
    return checked_pow(nth_prime(i), j);
}

std::uint64_t IndexFunction::operator()(std::span<const std::uint64_t> args) const {
    if (args.size() != arity_)
        throw Error(ErrorCode::Precondition, "index function of arity " + std::to_string(arity_) + " called with " +
                                                 std::to_string(args.size()) + " arguments");
    std::uint64_t v = args[0];
    if (v == 0) throw Error(ErrorCode::Precondition, "index function arguments are positive");
    for (std::size_t t = 1; t < args.size(); ++t) v = f1(v, args[t]);
    return v;
}

std::pair<std::uint64_t, std::uint64_t> IndexFunction::prime_key(std::span<const std::uint64_t> args) const {
    if (family_ != IndexFamily::prime) throw Error(ErrorCode::Precondition, "prime_key needs the prime family");
    if (args.size() != arity_) throw Error(ErrorCode::Precondition, "prime_key called with the wrong arity");
    std::uint64_t m = args[0];
    if (arity_ > 2) {
        IndexFunction inner(family_, arity_ - 1);
        m = inner(args.first(arity_ - 1));
    }
    return {m, args[arity_ - 1]};
}

FWeight f_weight(const IndexFunction& f, std::uint64_t i0, std::size_t depth) {
    if (f.arity() != 2) throw Error(ErrorCode::Precondition, "f_weight needs an arity-2 index function");
    if (depth == 0) throw Error(ErrorCode::Precondition, "f_weight depth must be positive");
    FWeight w;
    w.bound = 35.0 * static_cast<double>(i0);
    if (f.family() == IndexFamily::prime) {
        // F_1(i, j) 2^-j = (q_i / 2)^j never decays since q_i >= 2
        double q = static_cast<double>(nth_prime(i0));
        for (std::size_t j = 1; j <= depth; ++j) w.partial += std::pow(q / 2.0, static_cast<double>(j));
        w.diverges = true;
        w.tail_bound = INFINITY;
        w.total = INFINITY;
        return w;
    }
    for (std::size_t j = 1; j <= depth; ++j)
        w.partial += std::ldexp(static_cast<double>(balister_element(i0, j)), -static_cast<int>(j));
    // elements of level n are at most 4^(n+1) i0; sum the dyadic weights of the unseen positions
    for (int n = 0; n < 62; ++n) {
        double lo = std::ldexp(1.0, n), hi = std::ldexp(1.0, n + 1) - 1;
        double a = std::max(lo, static_cast<double>(depth) + 1);
        if (a > hi) continue;
        double weights = std::ldexp(1.0, 1 - static_cast<int>(std::min(a, 2000.0))) -
                         std::ldexp(1.0, -static_cast<int>(std::min(hi, 2000.0)));
        w.tail_bound += std::ldexp(static_cast<double>(i0), 2 * (n + 1)) * weights;
    }
    w.total = w.partial + w.tail_bound;
    w.bound_claimed = true;
    w.within_bound = w.total <= w.bound;
    return w;
}

namespace {

// Merges equal-depth levels into one general table over the widest context.
template <class T>
RandomMarkovRepresentation<T> merge_levels(const RandomMarkovRepresentation<T>& rep) {
    const std::size_t k = rep.alphabet.size();
    std::map<std::uint64_t, std::vector<const TableFunction<T>*>> groups;
    for (const auto& t : rep.tables)
        if (t.mass() != 0) groups[t.depth()].push_back(&t);
    std::vector<TableFunction<T>> merged;
    for (const auto& [depth, group] : groups) {
        if (group.size() == 1) {
            merged.push_back(*group.front());
            continue;
        }
        std::size_t c = 0;
        T total = ScalarTraits<T>::zero();
        for (const auto* t : group) {
            c = std::max(c, t->context());
            total += t->mass();
        }
        std::size_t words = word_count(k, c);
        std::vector<Distribution<T>> values;
        values.reserve(words);
        for (std::size_t idx = 0; idx < words; ++idx) {
            Word u = word_at(idx, c, k);
            std::vector<T> acc(k, ScalarTraits<T>::zero());
            for (const auto* t : group) t->add_contribution(u, acc);
            for (auto& v : acc) v /= total;
            values.emplace_back(std::move(acc), ScalarTraits<T>::exact ? 0.0 : 1e-9);
        }
        merged.push_back(TableFunction<T>::general(depth, total, c, k, std::move(values)));
    }
    auto out = make_representation(rep.alphabet, TableKind::general, std::move(merged));
    out.residual = rep.residual;
    return out;
}

std::size_t bits_for(std::size_t k) {
    std::size_t b = 0;
    while ((std::size_t{1} << b) < k) ++b;
    return std::max<std::size_t>(b, 1);
}

}  // namespace

template <class T>
DeterminizeResult<T> determinize(const RandomMarkovRepresentation<T>& rep, const IndexFunction& f,
                                 std::size_t digit_depth, double tol) {
    if (!rep.complete(tol))
        throw Error(ErrorCode::IncompleteRepresentation,
                    "determinization needs a complete representation; residual " + format_value(rep.residual));
    if (digit_depth == 0 || digit_depth > 60) throw Error(ErrorCode::Precondition, "digit depth must be in 1..60");
    const std::size_t k = rep.alphabet.size();
    const std::size_t n = f.arity() - 1;
    if (n >= 32 || (std::size_t{1} << n) < k)
        throw Error(ErrorCode::AlphabetTooLarge, "alphabet of size " + std::to_string(k) + " needs at least " +
                                                     std::to_string(bits_for(k)) + " bits, index function has " +
                                                     std::to_string(n));
    DeterminizeResult<T> res;
    res.digit_depth = digit_depth;
    res.bits = n;
    res.merged_base = merge_levels(rep);
    res.base_expected_lookback = res.merged_base.expected_lookback();

    std::size_t tuples = 1;
    for (std::size_t t = 0; t < n; ++t) {
        tuples *= digit_depth;
        if (tuples > 10'000'000) throw Error(ErrorCode::Unsupported, "too many digit tuples for this arity");
    }
    const std::size_t leaves = std::size_t{1} << n;
    std::vector<TableFunction<T>> out;
    for (const auto& base : res.merged_base.tables) {
        const std::size_t c = base.context();
        const std::size_t words = word_count(k, c);
        if (words * tuples > 50'000'000)
            throw Error(ErrorCode::Unsupported, "determinized tables would hold more than 5e7 entries");
        // per context: digits of the "1" branch for every node of the bit tree (heap order, root = 1)
        std::vector<std::vector<std::vector<std::uint8_t>>> node_digits(words);
        for (std::size_t idx = 0; idx < words; ++idx) {
            Distribution<T> d = base.value_at(idx);
            std::vector<T> leaf(leaves, ScalarTraits<T>::zero());
            for (std::size_t s = 0; s < k; ++s) leaf[s] = d[s];
            // subtree masses, heap indexed: node v covers leaves below it
            std::vector<T> mass(2 * leaves, ScalarTraits<T>::zero());
            for (std::size_t s = 0; s < leaves; ++s) mass[leaves + s] = leaf[s];
            for (std::size_t v = leaves; v-- > 1;) mass[v] = mass[2 * v] + mass[2 * v + 1];
            auto& nd = node_digits[idx];
            nd.resize(leaves);
            for (std::size_t v = 1; v < leaves; ++v) {
                T q = mass[v] == 0 ? ScalarTraits<T>::zero() : T(mass[2 * v + 1] / mass[v]);
                if (q > 1) q = ScalarTraits<T>::one();
                if (q < 0) q = ScalarTraits<T>::zero();
                nd[v] = canonical_digits(q, digit_depth);
            }
        }
        DeterminizeAccounting<T> acc;
        acc.base_depth = base.depth();
        acc.base_mass = base.mass();
        acc.conserved = ScalarTraits<T>::zero();
        std::vector<std::uint64_t> digits(n, 1);
        for (std::size_t tup = 0; tup < tuples; ++tup) {
            std::size_t rest = tup;
            unsigned exponent = 0;
            for (std::size_t t = n; t-- > 0;) {
                digits[t] = rest % digit_depth + 1;
                rest /= digit_depth;
                exponent += static_cast<unsigned>(digits[t]);
            }
            std::vector<Symbol> assign(words);
            for (std::size_t idx = 0; idx < words; ++idx) {
                std::size_t v = 1;
                for (std::size_t t = 0; t < n; ++t) {
                    // the one branch owns the position when its digit is 1, the zero branch otherwise
                    std::uint8_t bit = node_digits[idx][v][digits[t] - 1];
                    v = 2 * v + bit;
                }
                assign[idx] = static_cast<Symbol>(v - leaves);
            }
            std::vector<std::uint64_t> args{base.depth()};
            args.insert(args.end(), digits.begin(), digits.end());
            std::uint64_t depth = f(args);
            T mass = base.mass() * inv_pow2<T>(exponent);
            acc.conserved += mass;
            auto table = TableFunction<T>::deterministic(depth, mass, c, k, std::move(assign));
            table.origin = LevelOrigin{base.depth(), digits};
            out.push_back(std::move(table));
            ++acc.new_levels;
        }
        acc.gap = acc.base_mass - acc.conserved;
        res.accounting.push_back(std::move(acc));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.depth() < b.depth(); });
    res.rep = make_representation(rep.alphabet, TableKind::deterministic, std::move(out));
    res.rep.index_function = IndexFunctionInfo{family_name(f.family()), f.arity()};
    res.rep.notes["construction"] = "determinize";
    res.rep.notes["digit_depth"] = std::to_string(digit_depth);
    return res;
}

template <class T>
T reconstruction_error(const DeterminizeResult<T>& result) {
    const std::size_t k = result.rep.alphabet.size();
    std::map<std::uint64_t, std::vector<const TableFunction<T>*>> by_base;
    for (const auto& t : result.rep.tables)
        if (t.origin) by_base[t.origin->base_depth].push_back(&t);
    T worst = ScalarTraits<T>::zero();
    for (const auto& base : result.merged_base.tables) {
        const auto& group = by_base[base.depth()];
        const std::size_t words = word_count(k, base.context());
        for (std::size_t idx = 0; idx < words; ++idx) {
            Word u = word_at(idx, base.context(), k);
            std::vector<T> acc(k, ScalarTraits<T>::zero());
            for (const auto* t : group) t->add_contribution(u, acc);
            Distribution<T> want = base.value_at(idx);
            for (std::size_t a = 0; a < k; ++a) {
                T diff = abs_value(T(acc[a] / base.mass() - want[a]));
                if (diff > worst) worst = diff;
            }
        }
    }
    return worst;
}

template <class T>
ExpectedLookbackCheck det_expected_lookback(const DeterminizeResult<T>& result, const IndexFunction& f,
                                            std::optional<double> base_expected) {
    ExpectedLookbackCheck c;
    for (const auto& t : result.rep.tables) c.partial += static_cast<double>(t.depth()) * to_double(t.mass());
    double base = base_expected ? *base_expected : result.base_expected_lookback;
    c.vacuous = !std::isfinite(base);
    c.infinite = f.family() == IndexFamily::prime;
    c.bound = std::pow(35.0, static_cast<double>(result.bits)) * base;
    c.satisfied = c.vacuous || (!c.infinite && c.partial <= c.bound);
    return c;
}

#define RSM_INSTANTIATE(T)                                                                                        \
    template std::vector<std::uint8_t> canonical_digits<T>(const T&, std::size_t);                                \
    template std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> split_digits<T>(const T&,           \
                                                                                              std::size_t);      \
    template T digits_value<T>(const std::vector<std::uint8_t>&);                                                 \
    template DeterminizeResult<T> determinize<T>(const RandomMarkovRepresentation<T>&, const IndexFunction&,      \
                                                 std::size_t, double);                                            \
    template T reconstruction_error<T>(const DeterminizeResult<T>&);                                              \
    template ExpectedLookbackCheck det_expected_lookback<T>(const DeterminizeResult<T>&, const IndexFunction&,    \
                                                            std::optional<double>);

RSM_INSTANTIATE(Rational)
RSM_INSTANTIATE(double)

}  // namespace rsm
