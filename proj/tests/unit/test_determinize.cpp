#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "rsm/decompose.hpp"
#include "rsm/determinize.hpp"
#include "rsm/ratio.hpp"
#include "support.hpp"

using namespace rsm;
using rsm::testing::q;

namespace {

using Digits = std::vector<std::uint8_t>;

Digits ones_after(Digits head, std::size_t depth) {
    head.resize(depth, 1);
    return head;
}

// B_i^n straight from the set recursion: start at {4i - 1}, then t -> 4t + 1, 4t + 2
std::vector<std::uint64_t> level_by_recursion(std::uint64_t i, std::size_t n) {
    std::vector<std::uint64_t> cur{4 * i - 1};
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::uint64_t> next;
        for (auto t : cur) {
            next.push_back(4 * t + 1);
            next.push_back(4 * t + 2);
        }
        cur = next;
    }
    std::sort(cur.begin(), cur.end());
    return cur;
}

RandomMarkovRepresentation<Rational> two_state_ratio_rep() {
    auto model = to_model(two_state_chain<Rational>());
    return ratio_decompose(model, dyadic_masses<Rational>(20, true));
}

}  // namespace

TEST(Digits, CanonicalExamples) {
    EXPECT_EQ(canonical_digits(q("0"), 8), Digits(8, 0));
    EXPECT_EQ(canonical_digits(q("1/2"), 8), ones_after({0}, 8));
    EXPECT_EQ(canonical_digits(q("3/4"), 8), ones_after({1, 0}, 8));
    EXPECT_EQ(canonical_digits(q("1"), 8), Digits(8, 1));
    EXPECT_THROW(canonical_digits(q("5/4"), 8), Error);
    EXPECT_THROW(canonical_digits(q("-1/4"), 8), Error);
}

TEST(Digits, PrefixesApproachFromBelow) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<long> num(0, 1000);
    for (int t = 0; t < 200; ++t) {
        Rational x(num(rng), 1000);
        x.canonicalize();
        for (std::size_t d : {1u, 7u, 32u}) {
            Rational v = digits_value<Rational>(canonical_digits(x, d));
            EXPECT_LE(v, x);
            EXPECT_LE(x - v, Rational(1) / Rational(mpz_class(1) << d));
            if (x > 0) EXPECT_LT(v, x);  // the expansion never terminates
        }
    }
}

TEST(Digits, SiblingBranchesComplementEachOther) {
    for (int j = 0; j <= 8; ++j) {
        Rational x(j, 8);
        x.canonicalize();
        auto [zero, one] = split_digits(x, 32);
        EXPECT_EQ(one, canonical_digits(x, 32));
        for (std::size_t s = 0; s < 32; ++s) EXPECT_EQ(zero[s] + one[s], 1) << j << "/8 at " << s;
    }
    // off the dyadic grid the two expansions are already complementary
    for (const char* s : {"1/3", "2/7", "5/11"}) {
        auto a = canonical_digits(q(s), 40);
        auto b = canonical_digits(Rational(1 - q(s)), 40);
        for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(a[i] + b[i], 1) << s;
    }
}

TEST(IndexFunction, SmallValues) {
    IndexFunction p(IndexFamily::prime, 2), b(IndexFamily::balister, 2);
    EXPECT_EQ(p.f1(1, 1), 2u);
    EXPECT_EQ(p.f1(1, 2), 4u);
    EXPECT_EQ(p.f1(2, 1), 3u);
    EXPECT_EQ(b.f1(1, 1), 3u);
    EXPECT_EQ(b.f1(1, 2), 13u);
    EXPECT_EQ(b.f1(1, 3), 14u);
    EXPECT_EQ(b.f1(1, 4), 53u);
    EXPECT_EQ(level_by_recursion(1, 2), (std::vector<std::uint64_t>{53, 54, 57, 58}));
    EXPECT_EQ(nth_prime(1), 2u);
    EXPECT_EQ(nth_prime(10), 29u);
    EXPECT_EQ(nth_prime(1000), 7919u);
    EXPECT_EQ(parse_family("balister"), IndexFamily::balister);
    EXPECT_THROW(parse_family("cantor"), Error);
}

TEST(IndexFunction, ElementsMatchSetRecursion) {
    for (std::uint64_t i = 1; i <= 6; ++i) {
        std::vector<std::uint64_t> all;
        for (std::size_t n = 0; n <= 5; ++n) {
            auto lv = level_by_recursion(i, n);
            EXPECT_EQ(balister_level(i, n), lv);
            all.insert(all.end(), lv.begin(), lv.end());
        }
        for (std::size_t j = 0; j < all.size(); ++j) EXPECT_EQ(balister_element(i, j + 1), all[j]);
    }
}

TEST(IndexFunction, BalisterSetsAreDisjointAndBounded) {
    const std::uint64_t cap = 4096;  // 4^6
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 1; i <= 6; ++i)
        for (std::size_t n = 0; n <= 6; ++n)
            for (auto x : level_by_recursion(i, n))
                if (x <= cap) EXPECT_TRUE(seen.insert(x).second) << x;
    for (std::uint64_t i = 1; i <= 6; ++i)
        for (std::size_t n = 0; n <= 5; ++n) {
            auto lv = balister_level(i, n);
            EXPECT_EQ(lv.size(), std::size_t(1) << n);
            const std::uint64_t w = std::uint64_t(1) << (2 * (n + 1));
            for (auto x : lv) {
                EXPECT_GE(x, w * (i - 1));
                EXPECT_LE(x, w * i);
            }
        }
}

TEST(IndexFunction, InjectiveAndDominatesFirstArgumentArityTwo) {
    for (auto fam : {IndexFamily::prime, IndexFamily::balister}) {
        IndexFunction f(fam, 2);
        std::set<std::uint64_t> seen;
        for (std::uint64_t i = 1; i <= 12; ++i)
            for (std::uint64_t j = 1; j <= 12; ++j) {
                std::uint64_t args[] = {i, j};
                auto v = f(args);
                EXPECT_TRUE(seen.insert(v).second) << family_name(fam) << " " << i << "," << j;
                EXPECT_GE(v, i);
            }
    }
}

TEST(IndexFunction, InjectiveAndDominatesFirstArgumentArityThree) {
    IndexFunction b(IndexFamily::balister, 3);
    std::set<std::uint64_t> seen;
    IndexFunction p(IndexFamily::prime, 3);
    std::set<std::pair<std::uint64_t, std::uint64_t>> keys;
    for (std::uint64_t i = 1; i <= 12; ++i)
        for (std::uint64_t j = 1; j <= 12; ++j)
            for (std::uint64_t l = 1; l <= 12; ++l) {
                std::uint64_t args[] = {i, j, l};
                auto v = b(args);
                EXPECT_TRUE(seen.insert(v).second);
                EXPECT_GE(v, i);
                // prime values overflow here; the (base prime index, exponent) key names them uniquely
                auto key = p.prime_key(args);
                EXPECT_TRUE(keys.insert(key).second);
                EXPECT_GE(key.first, i);
                EXPECT_EQ(key.second, l);
            }
    // where the prime value fits it agrees with its key
    std::uint64_t small[] = {1, 1, 2};
    EXPECT_EQ(p(small), 9u);  // F_1(1,1) = 2, the 2nd prime is 3, squared
    EXPECT_EQ(p.prime_key(small), (std::pair<std::uint64_t, std::uint64_t>{2, 2}));
}

TEST(FWeight, BalisterSumsStayUnderBound) {
    IndexFunction b(IndexFamily::balister, 2);
    for (std::uint64_t i0 = 1; i0 <= 5; ++i0) {
        auto w = f_weight(b, i0, 31);
        // independent partial sum from the set recursion
        double partial = 0;
        std::size_t j = 0;
        for (std::size_t n = 0; j < 31; ++n)
            for (auto x : level_by_recursion(i0, n))
                if (++j <= 31) partial += std::ldexp(static_cast<double>(x), -static_cast<int>(j));
        EXPECT_NEAR(w.partial, partial, 1e-9 * partial);
        EXPECT_GE(w.tail_bound, 0.0);
        EXPECT_DOUBLE_EQ(w.total, w.partial + w.tail_bound);
        EXPECT_TRUE(w.bound_claimed);
        EXPECT_TRUE(w.within_bound);
        EXPECT_LE(w.total, 35.0 * i0);
        EXPECT_FALSE(w.diverges);
    }
    EXPECT_NEAR(f_weight(b, 1, 31).total, 14.54, 0.01);
}

TEST(FWeight, PrimeFamilyDiverges) {
    IndexFunction p(IndexFamily::prime, 2);
    auto w = f_weight(p, 1, 20);
    EXPECT_TRUE(w.diverges);
    EXPECT_FALSE(w.bound_claimed);
    EXPECT_DOUBLE_EQ(w.partial, 20.0);  // 2^j 2^-j = 1 per term
}

TEST(Determinize, FairCoinWithPrimeFamily) {
    auto t = TableFunction<Rational>::general(1, Rational(1), 0, 2, {rsm::testing::dist({"1/2", "1/2"})});
    auto base = make_representation<Rational>(FiniteAlphabet::numbered(2), TableKind::general, {t});
    IndexFunction p(IndexFamily::prime, 2);
    auto res = determinize(base, p, 12);
    ASSERT_EQ(res.rep.tables.size(), 12u);
    for (std::size_t i = 1; i <= 12; ++i) {
        const auto& lv = res.rep.tables[i - 1];
        EXPECT_EQ(lv.depth(), std::uint64_t(1) << i);
        EXPECT_EQ(lv.mass(), Rational(1) / Rational(mpz_class(1) << i));
        EXPECT_EQ(lv.symbols(), std::vector<Symbol>{i == 1 ? Symbol(0) : Symbol(1)});
    }
    EXPECT_EQ(res.rep.residual, Rational(1) / Rational(mpz_class(1) << 12));
    EXPECT_TRUE(det_expected_lookback(res, p).infinite);
}

TEST(Determinize, DeterministicBaseExpandsTrivially) {
    auto model = to_model(two_state_chain<Rational>());
    auto base = decompose(model);
    IndexFunction b(IndexFamily::balister, 2);
    auto res = determinize(base, b, 20);
    const Rational eps = Rational(1) / Rational(mpz_class(1) << 20);
    for (Symbol last = 0; last < 2; ++last) {
        Word w{last, 0, 0};
        auto before = rsm::testing::mixture(base, w);
        auto after = rsm::testing::mixture(res.rep, WordView(w).first(std::min<std::size_t>(3, w.size())));
        for (Symbol a = 0; a < 2; ++a) {
            EXPECT_LE(after[a], before[a]);
            EXPECT_LE(before[a] - after[a], eps);
        }
    }
}

TEST(Determinize, TwoStateRatioRepresentationFidelity) {
    auto model = to_model(two_state_chain<Rational>());
    auto base = two_state_ratio_rep();
    IndexFunction b(IndexFamily::balister, 2);
    auto res = determinize(base, b, 40);
    EXPECT_EQ(res.bits, 1u);
    const Rational eps38 = Rational(1) / Rational(mpz_class(1) << 38);
    const Rational eps40 = Rational(1) / Rational(mpz_class(1) << 40);
    EXPECT_LE(reconstruction_error(res), eps38);
    for (const auto& acc : res.accounting) {
        EXPECT_GE(acc.gap, 0);
        EXPECT_LE(acc.gap, Rational(static_cast<long>(res.bits)) * eps40 * acc.base_mass);
    }
    for (const auto& t : res.rep.tables) {
        EXPECT_EQ(t.storage_kind(), TableKind::deterministic);
        ASSERT_TRUE(t.origin);
        EXPECT_GE(t.depth(), t.origin->base_depth);
    }
    // mixtures agree with the rows up to the truncation
    for (Symbol last = 0; last < 2; ++last) {
        auto mix = rsm::testing::mixture(res.rep, Word{last});
        auto row = two_state_chain<Rational>().row(Word{last});
        for (Symbol a = 0; a < 2; ++a) {
            EXPECT_LE(mix[a], row[a]);
            EXPECT_LE(row[a] - mix[a], eps38);
        }
    }
    EXPECT_TRUE(verify_representation(model, res.rep).passed);
    auto el = det_expected_lookback(res, b);
    EXPECT_TRUE(el.satisfied);
    EXPECT_LE(el.partial, 35.0);
}

TEST(Determinize, Errors) {
    IndexFunction b(IndexFamily::balister, 2);
    auto t3 = TableFunction<Rational>::general(1, Rational(1), 0, 3, {rsm::testing::dist({"1/3", "1/3", "1/3"})});
    auto three = make_representation<Rational>(FiniteAlphabet::numbered(3), TableKind::general, {t3});
    try {
        determinize(three, b, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AlphabetTooLarge);
    }
    EXPECT_NO_THROW(determinize(three, IndexFunction(IndexFamily::balister, 3), 6));

    auto half = TableFunction<Rational>::general(1, q("1/2"), 0, 2, {rsm::testing::dist({"1/2", "1/2"})});
    auto partial = make_representation<Rational>(FiniteAlphabet::numbered(2), TableKind::general, {half});
    try {
        determinize(partial, b, 10);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IncompleteRepresentation);
    }
}
