#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "rsm/decompose.hpp"
#include "rsm/determinize.hpp"
#include "rsm/json_io.hpp"
#include "rsm/ratio.hpp"
#include "rsm/simulate.hpp"
#include "support.hpp"

using namespace rsm;
using rsm::testing::q;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::Precondition;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

template <class T>
void expect_same_tables(const RandomMarkovRepresentation<T>& a, const RandomMarkovRepresentation<T>& b) {
    ASSERT_EQ(a.tables.size(), b.tables.size());
    EXPECT_EQ(a.kind, b.kind);
    EXPECT_EQ(a.residual, b.residual);
    for (std::size_t i = 0; i < a.tables.size(); ++i) {
        const auto &x = a.tables[i], &y = b.tables[i];
        EXPECT_EQ(x.depth(), y.depth());
        EXPECT_EQ(x.mass(), y.mass());
        ASSERT_EQ(x.entry_count(), y.entry_count());
        for (std::size_t e = 0; e < x.entry_count(); ++e) EXPECT_EQ(x.value_at(e).vec(), y.value_at(e).vec());
        EXPECT_EQ(x.origin.has_value(), y.origin.has_value());
        if (x.origin && y.origin) {
            EXPECT_EQ(x.origin->base_depth, y.origin->base_depth);
            EXPECT_EQ(x.origin->digits, y.origin->digits);
        }
    }
}

}  // namespace

TEST(Simulate, SameSeedSamePath) {
    auto rep = decompose(to_model(two_state_chain<Rational>()));
    CompleteRMP<Rational> src(rep);
    SimOptions o{5000, 42, 3};
    auto a = simulate(src, o);
    auto b = simulate(src, o);
    EXPECT_EQ(a, b);
    o.seed = 43;
    EXPECT_NE(a, simulate(src, o));
    // both backends consume the generator identically
    auto frep = decompose(to_model(two_state_chain<double>()));
    CompleteRMP<double> fsrc(frep);
    o.seed = 42;
    EXPECT_EQ(a, simulate(fsrc, o));
}

TEST(Simulate, TwoStateFrequencies) {
    auto rep = decompose(to_model(two_state_chain<Rational>()));
    auto path = simulate(CompleteRMP<Rational>(rep), {200000, 7, 3});
    auto s = summarize(path, 2);
    const double n = 200000;
    // the chain is sticky, so allow a wide band around 2/3
    EXPECT_NEAR(s.symbol_freq[0], 2.0 / 3.0, 0.01);
    ASSERT_EQ(s.lookback_freq.size(), 3u);
    const double want[] = {0.8, 0.1, 0.1};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(s.lookback_freq[i].first, i + 1);
        double sd = std::sqrt(want[i] * (1 - want[i]) / n);
        EXPECT_NEAR(s.lookback_freq[i].second, want[i], 4 * sd);
    }
}

TEST(Simulate, ForcedChains) {
    FiniteAlphabet a = FiniteAlphabet::numbered(2);
    MarkovOrderM<Rational> flip(a, 1, {rsm::testing::dist({"0", "1"}), rsm::testing::dist({"1", "0"})});
    auto p = simulate(flip, {50, 1, 1});
    ASSERT_EQ(p.size(), 50u);
    for (std::size_t t = 1; t < p.size(); ++t) EXPECT_NE(p[t].symbol, p[t - 1].symbol);
    for (const auto& s : p) EXPECT_FALSE(s.lookback);
    MarkovOrderM<Rational> stay(a, 1, {rsm::testing::dist({"1", "0"}), rsm::testing::dist({"0", "1"})});
    auto c = simulate(stay, {50, 9, 1});
    for (const auto& s : c) EXPECT_EQ(s.symbol, c[0].symbol);
}

TEST(Simulate, BurnInMustCoverContext) {
    auto rep = decompose(to_model(two_state_chain<Rational>()));
    EXPECT_EQ(code_of([&] { simulate(CompleteRMP<Rational>(rep), {10, 1, 0}); }), ErrorCode::WarmUp);
    std::mt19937_64 rng(2);
    auto chain = rsm::testing::random_chain(rng, 2, 3);
    EXPECT_EQ(code_of([&] { simulate(chain, {10, 1, 2}); }), ErrorCode::WarmUp);
    EXPECT_NO_THROW(simulate(chain, {10, 1, 3}));
}

TEST(Simulate, IncompleteRepresentationRejected) {
    auto half = TableFunction<Rational>::general(1, q("1/2"), 0, 2, {rsm::testing::dist({"1/2", "1/2"})});
    auto rep = make_representation<Rational>(FiniteAlphabet::numbered(2), TableKind::general, {half});
    EXPECT_EQ(code_of([&] { CompleteRMP<Rational> src(rep); }), ErrorCode::IncompleteRepresentation);
}

TEST(Simulate, RmNotMarkovLookbackFrequencies) {
    auto e = example<Rational>("rm-notMarkov", 20);
    auto path = simulate(CompleteRMP<Rational>(*e.representation), {100000, 11, 20});
    auto s = summarize(path, e.representation->alphabet.size());
    const double n = 100000;
    double ones = 0;
    for (std::size_t sym = 1; sym < s.symbol_freq.size(); sym += 2) ones += s.symbol_freq[sym];
    EXPECT_NEAR(ones, 0.5, 4 * std::sqrt(0.25 / n));
    for (const auto& [k, f] : s.lookback_freq) {
        if (k > 8) break;
        double want = std::ldexp(1.0, -static_cast<int>(k));
        EXPECT_NEAR(f, want, 4 * std::sqrt(want * (1 - want) / n)) << k;
    }
}

TEST(Json, ScalarsAndAlphabet) {
    EXPECT_EQ(value_to_json(q("3/4")), json("3/4"));
    EXPECT_EQ(value_from_json<Rational>(json("0.25"), "/x"), q("1/4"));
    EXPECT_EQ(value_from_json<Rational>(json(2), "/x"), 2);
    EXPECT_EQ(value_from_json<double>(json("1/8"), "/x"), 0.125);
    EXPECT_EQ(code_of([] { value_from_json<Rational>(json(true), "/levels/0/p"); }), ErrorCode::Parse);
    EXPECT_NE(message_of([] { value_from_json<Rational>(json("x"), "/levels/0/p"); }).find("/levels/0/p"),
              std::string::npos);
    auto a = FiniteAlphabet({"a", "b"});
    EXPECT_EQ(alphabet_from_json(alphabet_to_json(a), "/alphabet"), a);
}

TEST(Json, MeasureAndChainRoundTrip) {
    std::mt19937_64 rng(13);
    auto chain = rsm::testing::random_chain(rng, 3, 2);
    auto st = stationary_markov(chain);
    auto back = measure_from_json<Rational>(measure_to_json(st));
    EXPECT_EQ(back.masses(), st.masses());
    EXPECT_EQ(back.depth(), st.depth());

    DominatingMeasure<Rational> mu({q("1"), q("1/2"), q("1")});
    auto spec = chain_from_json<Rational>(parse_json_text(chain_to_json<Rational>(chain, mu, "hand").dump(2), "mem"));
    EXPECT_EQ(spec.name, "hand");
    EXPECT_EQ(spec.chain.order(), 2u);
    for (std::size_t i = 0; i < chain.state_count(); ++i) EXPECT_EQ(spec.chain.row_at(i).vec(), chain.row_at(i).vec());
    ASSERT_TRUE(spec.dominating);
    EXPECT_EQ(spec.dominating->masses(), mu.masses());
}

TEST(Json, RepresentationRoundTripKeepsVerification) {
    for (const char* name : {"two-state", "rmnodom", "bernoulli-three-quarters"}) {
        auto e = example<Rational>(name, std::string(name) == "rmnodom" ? std::optional<std::size_t>(6) : std::nullopt);
        for (int variant = 0; variant < 3; ++variant) {
            RandomMarkovRepresentation<Rational> rep;
            DecomposeOptions opt;
            opt.k_max = 12;
            if (variant == 0) rep = decompose(*e.model, opt);
            if (variant == 1) rep = decompose_finite_expectation(*e.model, opt);
            if (variant == 2) rep = ratio_decompose(*e.model, dyadic_masses<Rational>(6, true));
            auto text = representation_to_json(rep).dump();
            auto back = representation_from_json<Rational>(parse_json_text(text, "mem"));
            expect_same_tables(rep, back);
            EXPECT_EQ(rep.notes, back.notes);
            auto a = verify_representation(*e.model, rep), b = verify_representation(*e.model, back);
            EXPECT_EQ(a.passed, b.passed) << name;
            EXPECT_TRUE(b.passed) << name;
            EXPECT_EQ(a.max_gap, b.max_gap);
        }
    }
}

TEST(Json, DeterminizedRoundTripKeepsIndexFunction) {
    auto model = to_model(two_state_chain<Rational>());
    auto base = ratio_decompose(model, dyadic_masses<Rational>(8, true));
    auto res = determinize(base, IndexFunction(IndexFamily::balister, 2), 10);
    auto j = representation_to_json(res.rep);
    EXPECT_EQ(j["index_function"]["family"], "balister");
    EXPECT_EQ(j["index_function"]["arity"], 2);
    auto back = representation_from_json<Rational>(j);
    ASSERT_TRUE(back.index_function);
    EXPECT_EQ(back.index_function->family, "balister");
    expect_same_tables(res.rep, back);
}

TEST(Json, ParseErrorsCarryPointers) {
    EXPECT_EQ(code_of([] { parse_json_text("{\"alphabet\": [", "broken.json"); }), ErrorCode::Parse);
    EXPECT_NE(message_of([] { parse_json_text("{", "broken.json"); }).find("broken.json"), std::string::npos);

    auto rep = decompose(to_model(two_state_chain<Rational>()));
    auto j = representation_to_json(rep);
    j["residual"] = "1/2";
    auto msg = message_of([&] { representation_from_json<Rational>(j); });
    EXPECT_NE(msg.find("/residual"), std::string::npos) << msg;

    auto k = representation_to_json(rep);
    k["levels"][1].erase("p");
    msg = message_of([&] { representation_from_json<Rational>(k); });
    EXPECT_NE(msg.find("/levels/1"), std::string::npos) << msg;

    auto c = chain_to_json(two_state_chain<Rational>());
    c["rows"].erase(c["rows"].begin());
    EXPECT_EQ(code_of([&] { chain_from_json<Rational>(c); }), ErrorCode::Parse);
}

TEST(Json, FilesRoundTrip) {
    auto dir = std::filesystem::temp_directory_path() / "rsm_io_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "chain.json").string();
    write_text_file(path, chain_to_json(two_state_chain<Rational>()).dump(2));
    auto spec = chain_from_json<Rational>(read_json_file(path));
    EXPECT_EQ(spec.chain.row_at(0).vec(), two_state_chain<Rational>().row_at(0).vec());
    EXPECT_EQ(code_of([&] { read_json_file((dir / "missing.json").string()); }), ErrorCode::Parse);
    std::filesystem::remove_all(dir);
}
