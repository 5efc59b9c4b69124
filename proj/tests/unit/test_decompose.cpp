#include <gtest/gtest.h>

#include <limits>

#include "rsm/decompose.hpp"
#include "support.hpp"

using namespace rsm;
using rsm::testing::q;

namespace {

// smallest M whose tail mass beyond the first M symbols is strictly below gamma / 10
std::size_t brute_M(const std::vector<Rational>& mu, const Rational& gamma) {
    for (std::size_t M = 1; M <= mu.size(); ++M) {
        Rational tail = 0;
        for (std::size_t a = M; a < mu.size(); ++a) tail += mu[a];
        if (tail < gamma / 10) return M;
    }
    return mu.size();
}

template <class T>
void expect_same_rep(const RandomMarkovRepresentation<T>& a, const RandomMarkovRepresentation<T>& b) {
    ASSERT_EQ(a.tables.size(), b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
        EXPECT_EQ(a.tables[i].depth(), b.tables[i].depth());
        EXPECT_EQ(a.tables[i].mass(), b.tables[i].mass());
        EXPECT_EQ(a.tables[i].symbols(), b.tables[i].symbols());
    }
    EXPECT_EQ(a.residual, b.residual);
}

}  // namespace

TEST(Leftover, SubtractsTables) {
    auto iid = to_model(bernoulli_chain<Rational>(q("1/2")));
    auto none = leftover(iid, {}, Word{1, 0});
    EXPECT_EQ(none[0], q("1/2"));
    EXPECT_EQ(none[1], q("1/2"));
    auto t1 = TableFunction<Rational>::deterministic(1, q("1/2"), 0, 2, {0});
    auto lo = leftover(iid, {t1}, Word{1});
    EXPECT_EQ(lo[0], 0);
    EXPECT_EQ(lo[1], q("1/2"));

    auto two = to_model(two_state_chain<Rational>());
    auto l1 = TableFunction<Rational>::deterministic(1, q("4/5"), 1, 2, {0, 1});
    auto l = leftover(two, {l1}, Word{0});
    EXPECT_EQ(l[0], q("1/10"));
    EXPECT_EQ(l[1], q("1/10"));
}

TEST(ChooseM, MatchesBruteForce) {
    EXPECT_EQ(choose_M(DominatingMeasure<Rational>::counting(2), Rational(1)), 2u);
    std::vector<Rational> geo;
    for (int k = 1; k <= 30; ++k) geo.push_back(Rational(1, 1) / Rational(mpz_class(1) << k));
    EXPECT_EQ(choose_M(DominatingMeasure<Rational>(geo), q("1/2")), 5u);
    for (std::size_t n : {3u, 10u, 15u, 20u, 37u}) {
        std::vector<Rational> u(n, Rational(1, static_cast<long>(n)));
        for (auto& x : u) x.canonicalize();
        EXPECT_EQ(choose_M(DominatingMeasure<Rational>(u), Rational(1)), brute_M(u, 1)) << n;
    }
    // strict inequality at the boundary: tail 1/10 is not below 1/10
    std::vector<Rational> ten(10, Rational(1, 10));
    EXPECT_EQ(choose_M(DominatingMeasure<Rational>(ten), Rational(1)), 10u);
    EXPECT_THROW(choose_M(DominatingMeasure<Rational>::counting(2), Rational(0)), Error);
}

TEST(Decompose, BernoulliHalf) {
    auto rep = decompose(to_model(bernoulli_chain<Rational>(q("1/2"))));
    ASSERT_EQ(rep.tables.size(), 2u);
    EXPECT_EQ(rep.tables[0].depth(), 1u);
    EXPECT_EQ(rep.tables[0].mass(), q("1/2"));
    EXPECT_EQ(rep.tables[0].symbols(), std::vector<Symbol>{0});
    EXPECT_EQ(rep.tables[1].depth(), 2u);
    EXPECT_EQ(rep.tables[1].symbols(), std::vector<Symbol>{1});
    EXPECT_EQ(rep.residual, 0);
}

TEST(Decompose, BernoulliThreeQuarters) {
    auto rep = decompose(to_model(bernoulli_chain<Rational>(q("3/4"))));
    ASSERT_EQ(rep.tables.size(), 2u);
    EXPECT_EQ(rep.tables[0].mass(), q("3/4"));
    EXPECT_EQ(rep.tables[0].symbols(), std::vector<Symbol>{0});
    EXPECT_EQ(rep.tables[1].mass(), q("1/4"));
    EXPECT_EQ(rep.tables[1].symbols(), std::vector<Symbol>{1});
}

TEST(Decompose, TwoStateChain) {
    auto model = to_model(two_state_chain<Rational>());
    auto rep = decompose(model);
    ASSERT_EQ(rep.tables.size(), 3u);
    const std::vector<std::pair<std::uint64_t, Rational>> want{{1, q("4/5")}, {2, q("1/10")}, {3, q("1/10")}};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(rep.tables[i].depth(), want[i].first);
        EXPECT_EQ(rep.tables[i].mass(), want[i].second);
    }
    // tables are stored on the single symbol that matters
    EXPECT_EQ(rep.tables[0].symbols(), (std::vector<Symbol>{0, 1}));
    EXPECT_EQ(rep.tables[1].symbols(), (std::vector<Symbol>{0, 0}));
    EXPECT_EQ(rep.tables[2].symbols(), (std::vector<Symbol>{1, 0}));
    EXPECT_EQ(rep.residual, 0);
    EXPECT_DOUBLE_EQ(rep.expected_lookback(), 1.3);

    // mixture reproduces both rows
    for (Symbol last = 0; last < 2; ++last) {
        auto mix = rsm::testing::mixture(rep, Word{last, 0, 0});
        auto row = two_state_chain<Rational>().row(Word{last});
        EXPECT_EQ(mix[0], row[0]);
        EXPECT_EQ(mix[1], row[1]);
    }
    auto rpt = verify_representation(model, rep, {3});
    EXPECT_TRUE(rpt.passed);
    EXPECT_TRUE(rpt.exact);
    EXPECT_EQ(rpt.max_gap, 0);
}

TEST(Decompose, DroppingALevelLeavesGapEqualToResidual) {
    auto model = to_model(two_state_chain<Rational>());
    auto rep = decompose(model);
    rep.tables.pop_back();
    auto cut = make_representation(rep.alphabet, rep.kind, rep.tables);
    EXPECT_EQ(cut.residual, q("1/10"));
    auto rpt = verify_representation(model, cut, {3});
    EXPECT_EQ(rpt.max_gap, q("1/10"));
    EXPECT_TRUE(rpt.passed);
}

TEST(Decompose, TamperedTableFailsDeterminism) {
    auto model = to_model(two_state_chain<Rational>());
    auto rep = decompose(model);
    // level 2 now splits its mass between both symbols on every past
    rep.tables[1] = TableFunction<Rational>::general(2, q("1/10"), 0, 2, {rsm::testing::dist({"1/2", "1/2"})});
    auto rpt = verify_representation(model, rep, {3});
    EXPECT_FALSE(rpt.passed);
    bool saw = false;
    for (const auto& f : rpt.failures) saw = saw || f.invariant == "determinism";
    EXPECT_TRUE(saw);
}

TEST(Decompose, RandomChainsReconstructUpToResidual) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 6; ++trial) {
        const std::size_t k = 2 + trial % 2, order = 1 + trial % 2;
        auto chain = rsm::testing::random_chain(rng, k, order);
        auto model = to_model(chain);
        DecomposeOptions opt;
        opt.k_max = 10;
        auto rep = decompose(model, opt);
        Rational total = 0, prev_res = 1;
        for (std::size_t i = 0; i < rep.tables.size(); ++i) {
            const auto& t = rep.tables[i];
            const auto& d = rep.diagnostics[i];
            total += t.mass();
            EXPECT_GT(t.mass(), 0);
            EXPECT_GE(d.r, 2 * d.var_at_n);
            EXPECT_GE(2 * t.mass(), d.r);
            EXPECT_LE(1 - total, prev_res);
            prev_res = 1 - total;
            if (i) EXPECT_GT(t.depth(), rep.tables[i - 1].depth());
        }
        EXPECT_EQ(rep.residual, 1 - total);
        // every past: table mixture stays under cond and misses exactly the residual
        const std::size_t len = std::max<std::size_t>(order, rep.max_context());
        for (std::size_t idx = 0; idx < word_count(k, len); ++idx) {
            Word w = word_at(idx, len, k);
            auto mix = rsm::testing::mixture(rep, w);
            auto row = chain.row(WordView(w).first(order));
            Rational miss = 0;
            for (Symbol a = 0; a < k; ++a) {
                EXPECT_LE(mix[a], row[a]);
                miss += row[a] - mix[a];
            }
            EXPECT_EQ(miss, rep.residual);
        }
        EXPECT_TRUE(verify_representation(model, rep).passed);
        expect_same_rep(rep, decompose(model, opt));
    }
}

TEST(Decompose, FloatBackendAgreesWithExact) {
    std::mt19937_64 rng(3);
    auto chain = rsm::testing::random_chain(rng, 3, 1);
    std::vector<Distribution<double>> rows;
    for (const auto& r : chain.rows()) {
        std::vector<double> v;
        for (Symbol a = 0; a < 3; ++a) v.push_back(r[a].get_d());
        rows.emplace_back(v);
    }
    MarkovOrderM<double> fchain(chain.alphabet(), 1, rows);
    DecomposeOptions opt;
    opt.k_max = 8;
    auto ex = decompose(to_model(chain), opt);
    auto fl = decompose(to_model(fchain), opt);
    ASSERT_EQ(ex.tables.size(), fl.tables.size());
    for (std::size_t i = 0; i < ex.tables.size(); ++i) {
        EXPECT_EQ(ex.tables[i].depth(), fl.tables[i].depth());
        EXPECT_NEAR(ex.tables[i].mass().get_d(), fl.tables[i].mass(), 1e-12);
    }
}

TEST(Decompose, ConstantVariationIsNotAUniformMartingale) {
    auto base = to_model(bernoulli_chain<Rational>(q("1/2")));
    auto spec = base.spec();
    spec.order.reset();
    spec.var_bound = [](std::size_t) { return q("1/2"); };
    ConditionalModel<Rational> model(spec);
    DecomposeOptions opt;
    opt.max_depth = 6;
    try {
        decompose(model, opt);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotUniformMartingale);
    }
}

TEST(FiniteExpectation, BernoulliThreeQuarters) {
    auto model = to_model(bernoulli_chain<Rational>(q("3/4")));
    auto rep = decompose_finite_expectation(model);
    ASSERT_EQ(rep.tables.size(), 2u);
    EXPECT_EQ(rep.tables[0].depth(), 2u);
    EXPECT_EQ(rep.tables[0].mass(), q("3/4"));
    EXPECT_EQ(rep.tables[1].depth(), 3u);
    EXPECT_EQ(rep.tables[1].mass(), q("1/4"));
    EXPECT_DOUBLE_EQ(rep.expected_lookback(), 2.25);
    EXPECT_DOUBLE_EQ(finite_expectation_bound(model), 8.0);
    EXPECT_TRUE(verify_representation(model, rep).passed);
}

TEST(FiniteExpectation, BoundHoldsOnRandomChains) {
    EXPECT_LE(decompose_finite_expectation(to_model(bernoulli_chain<Rational>(q("1/2")))).expected_lookback(), 8.0);
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 4; ++trial) {
        auto model = to_model(rsm::testing::random_chain(rng, 2 + trial % 2, 1));
        DecomposeOptions opt;
        opt.k_max = 12;
        auto rep = decompose_finite_expectation(model, opt);
        EXPECT_LE(rep.expected_lookback(), finite_expectation_bound(model));
        for (std::size_t i = 1; i < rep.diagnostics.size(); ++i) {
            // the cap: r_k never exceeds (1 - 1/M^2) r_{k-1}
            const auto M = static_cast<long>(model.alphabet_size());
            EXPECT_LE(rep.diagnostics[i].r, (1 - Rational(1, M * M)) * rep.diagnostics[i - 1].r);
        }
        EXPECT_TRUE(verify_representation(model, rep).passed);
    }
}

TEST(FiniteExpectation, DivergentVariationSumRejected) {
    auto spec = to_model(bernoulli_chain<Rational>(q("1/2"))).spec();
    spec.var_sum = std::numeric_limits<double>::infinity();
    try {
        decompose_finite_expectation(ConditionalModel<Rational>(spec));
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Precondition);
    }
}

TEST(Collapse, RwbinsDecaysWhileControlsStay) {
    auto rw = example<Rational>("rwbins");
    std::vector<std::size_t> depths{2, 4, 6, 8, 10};
    auto rows = demonstrate_collapse(*rw.model, depths);
    ASSERT_EQ(rows.size(), depths.size());
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].value, rows[i - 1].value);
    for (const auto& r : rows) EXPECT_LE(r.value.get_d(), 2.0 / r.depth + 1e-12);

    for (const auto& row : demonstrate_collapse(to_model(bernoulli_chain<Rational>(q("1/2"))), depths))
        EXPECT_EQ(row.value, q("1/2"));
    for (const auto& row : demonstrate_collapse(to_model(two_state_chain<Rational>()), depths))
        EXPECT_EQ(row.value, q("4/5"));
}
