#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rsm/catalog.hpp"
#include "rsm/decompose.hpp"
#include "rsm/determinize.hpp"
#include "rsm/json_io.hpp"
#include "rsm/ratio.hpp"
#include "rsm/simulate.hpp"

using namespace rsm;

namespace {

// exit codes
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kError = 2;

struct Config {
    std::string backend = "exact";
    double tolerance = -1.0;
    double residual_target = 1e-9;
    std::size_t k_max = 64;
    std::size_t var_k_max = 8;
    std::uint64_t seed = 1;
    std::optional<std::size_t> truncate;
    std::size_t digit_depth = 40;
    std::string family = "balister";
    std::size_t arity = 0;
    std::string out;
    std::string example;
    std::string variant = "a";
    std::size_t depth = 0;
    std::size_t levels = 20;
    std::size_t probe_depth = 12;
    std::size_t length = 1000;
    std::size_t burn_in = 0;
    bool all_words = false;
    std::string model;
    std::string rep;
    std::string action;
    std::string name;
};

void emit(const Config& cfg, const json& j) {
    std::string text = j.dump(2);
    if (cfg.out.empty())
        std::cout << text << "\n";
    else
        write_text_file(cfg.out, text);
}

bool is_catalog_name(const std::string& s) {
    for (const auto& n : example_names())
        if (n == s) return true;
    return false;
}

template <class T>
struct LoadedModel {
    std::shared_ptr<const ConditionalModel<T>> model;
    std::optional<MarkovOrderM<T>> chain;
    std::optional<RandomMarkovRepresentation<T>> representation;
};

// Model source: --example NAME, a catalog name, or a JSON model file.
template <class T>
LoadedModel<T> load_model(const Config& cfg) {
    LoadedModel<T> lm;
    std::string src = cfg.example.empty() ? cfg.model : cfg.example;
    if (src.rfind("example:", 0) == 0) src = src.substr(8);
    if (src.empty()) throw Error(ErrorCode::Precondition, "no model given (pass a model file or --example NAME)");
    if (!cfg.example.empty() || (is_catalog_name(src) && !std::filesystem::exists(src))) {
        auto e = example<T>(src, cfg.truncate);
        lm.model = e.model;
        lm.chain = e.chain;
        lm.representation = e.representation;
        return lm;
    }
    auto spec = chain_from_json<T>(read_json_file(src));
    lm.model = std::make_shared<const ConditionalModel<T>>(to_model(spec.chain, spec.dominating, spec.name));
    lm.chain = spec.chain;
    return lm;
}

double tol_for(const Config& cfg) { return cfg.tolerance; }

template <class T>
void print_levels(std::ostream& os, const RandomMarkovRepresentation<T>& rep, std::size_t max_rows = 40) {
    os << "  k        n  context  p\n";
    for (std::size_t i = 0; i < rep.tables.size(); ++i) {
        if (i == max_rows) {
            os << "  ... " << rep.tables.size() - max_rows << " more levels\n";
            break;
        }
        const auto& t = rep.tables[i];
        char line[96];
        std::snprintf(line, sizeof line, "  %-4zu %6llu  %7zu  ", i + 1, static_cast<unsigned long long>(t.depth()),
                      t.context());
        os << line << format_value(t.mass()) << "\n";
    }
    os << "  residual " << format_value(rep.residual) << "   E[L] " << shortest_double(rep.expected_lookback()) << "\n";
}

template <class T>
int cmd_variations(const Config& cfg) {
    auto lm = load_model<T>(cfg);
    const auto& m = *lm.model;
    const auto& ord = m.order();
    std::size_t depth = cfg.depth ? cfg.depth : (ord ? std::max(*ord, std::size_t(1)) : cfg.var_k_max);
    WordFilter filter = cfg.all_words ? WordFilter::all_words : WordFilter::positive_only;
    json rows = json::array();
    std::cout << "  k   var_k                    kind      declared     r_k            kind\n";
    for (std::size_t k = 0; k <= cfg.var_k_max; ++k) {
        std::size_t d = std::max(depth, k);
        auto v = variation(m, k, d, filter);
        auto r = ratio_coeff(m, k, d, filter);
        std::string vk = v.exact ? "exact" : "estimate";
        std::string rk = r.exact ? "exact" : "estimate";
        char line[160];
        std::snprintf(line, sizeof line, "  %-3zu %-24s %-9s %-12s %-14s %s\n", k, format_value(v.value).c_str(),
                      vk.c_str(), shortest_double(to_double(v.declared_bound)).c_str(),
                      r.infinite ? "inf" : shortest_double(r.log_ratio).c_str(), rk.c_str());
        std::cout << line;
        json row;
        row["k"] = k;
        row["var"] = value_to_json(v.value);
        row["var_exact"] = v.exact;
        row["var_declared_bound"] = value_to_json(v.declared_bound);
        row["rc"] = r.infinite ? json("inf") : json(r.log_ratio);
        row["rc_exact"] = r.exact;
        if (r.declared_bound) row["rc_declared_bound"] = *r.declared_bound;
        row["depth"] = v.depth;
        rows.push_back(std::move(row));
        if (ord && k >= *ord && v.exact) break;
    }
    if (!cfg.out.empty()) emit(cfg, json{{"model", m.name()}, {"variations", rows}});
    return kOk;
}

template <class T>
DecomposeOptions decompose_options(const Config& cfg) {
    DecomposeOptions o;
    o.residual_target = cfg.residual_target;
    o.k_max = cfg.k_max;
    o.tolerance = tol_for(cfg);
    o.filter = cfg.all_words ? WordFilter::all_words : WordFilter::positive_only;
    return o;
}

template <class T>
int run_ratio(const Config& cfg, const ConditionalModel<T>& m) {
    RatioOptions ro;
    ro.probe_depth = cfg.probe_depth;
    ro.tolerance = tol_for(cfg);
    ro.filter = cfg.all_words ? WordFilter::all_words : WordFilter::positive_only;
    RatioLevels<T> lv;
    auto rep = ratio_decompose(m, dyadic_masses<T>(cfg.levels), ro, &lv);
    std::cerr << "ratio construction, " << lv.size() << " levels\n";
    print_levels(std::cerr, rep);
    emit(cfg, representation_to_json(rep));
    return kOk;
}

template <class T>
int cmd_decompose(const Config& cfg) {
    auto lm = load_model<T>(cfg);
    const auto& m = *lm.model;
    if (cfg.variant == "ratio") return run_ratio(cfg, m);
    if (cfg.variant != "a" && cfg.variant != "b")
        throw Error(ErrorCode::Precondition, "variant must be a, b or ratio");
    auto opts = decompose_options<T>(cfg);
    auto rep = cfg.variant == "a" ? decompose(m, opts) : decompose_finite_expectation(m, opts);
    std::cerr << "variant " << cfg.variant << ", " << rep.tables.size() << " levels\n";
    print_levels(std::cerr, rep);
    int code = kOk;
    if (cfg.variant == "b") {
        double bound = finite_expectation_bound(m);
        bool ok = rep.expected_lookback() <= bound;
        std::cerr << "  bound 2M^2(1 + sum var) = " << shortest_double(bound) << "  " << (ok ? "holds" : "VIOLATED")
                  << "\n";
        if (!ok) {
            std::cerr << "check failed: expected-lookback-bound\n";
            code = kCheckFailed;
        }
    }
    emit(cfg, representation_to_json(rep));
    return code;
}

template <class T>
int cmd_ratio(const Config& cfg) {
    auto lm = load_model<T>(cfg);
    return run_ratio(cfg, *lm.model);
}

template <class T>
RandomMarkovRepresentation<T> load_rep(const std::string& path) {
    return representation_from_json<T>(read_json_file(path));
}

template <class T>
int cmd_determinize(const Config& cfg) {
    auto rep = load_rep<T>(cfg.rep);
    std::size_t bits = 1;
    while ((std::size_t(1) << bits) < rep.alphabet.size()) ++bits;
    std::size_t arity = cfg.arity ? cfg.arity : bits + 1;
    IndexFunction f(parse_family(cfg.family), arity);
    auto res = determinize(rep, f, cfg.digit_depth, tol_for(cfg) < 0 ? ScalarTraits<T>::default_tolerance() : cfg.tolerance);
    auto err = reconstruction_error(res);
    auto chk = det_expected_lookback(res, f);
    std::cerr << "determinized with " << family_name(f.family()) << " F of arity " << arity << ", digit depth "
              << cfg.digit_depth << "\n";
    print_levels(std::cerr, res.rep, 12);
    std::cerr << "  reconstruction error " << shortest_double(to_double(err)) << "\n";
    for (const auto& a : res.accounting)
        std::cerr << "  base level n=" << a.base_depth << ": mass " << shortest_double(to_double(a.base_mass))
                  << ", conserved gap " << shortest_double(to_double(a.gap)) << "\n";
    std::cerr << "  E[L] partial " << shortest_double(chk.partial) << ", 35^n E[L] = " << shortest_double(chk.bound)
              << (chk.infinite ? " (E[L] of the output diverges for this family)" : "")
              << (chk.vacuous ? " (vacuous: base E[L] infinite)" : "") << "\n";
    int code = kOk;
    double allowed = static_cast<double>(res.bits) * std::ldexp(1.0, -static_cast<int>(cfg.digit_depth));
    if (to_double(err) > allowed) {
        std::cerr << "check failed: reconstruction (error " << shortest_double(to_double(err)) << " > "
                  << shortest_double(allowed) << ")\n";
        code = kCheckFailed;
    }
    emit(cfg, representation_to_json(res.rep));
    return code;
}

template <class T>
int cmd_verify(const Config& cfg) {
    auto lm = load_model<T>(cfg);
    auto rep = load_rep<T>(cfg.rep);
    VerifyOptions vo;
    vo.depth = cfg.depth;
    vo.tolerance = tol_for(cfg);
    vo.filter = cfg.all_words ? WordFilter::all_words : WordFilter::positive_only;
    auto r = verify_representation(*lm.model, rep, vo);
    std::cout << (r.passed ? "PASS" : "FAIL") << "  depth " << r.depth << "  words " << r.words_checked
              << "  residual " << format_value(r.residual) << "  gap " << format_value(r.max_gap)
              << (r.exact ? "  (exact)" : "  (estimate)") << "\n";
    for (const auto& c : r.tv_lookback)
        std::cout << "  tv-lookback n=" << c.n << "  sup tv " << format_value(c.lhs) << " <= P(L>n) "
                  << format_value(c.rhs) << (c.ok ? "" : "  VIOLATED") << "\n";
    for (const auto& f : r.failures)
        std::cout << "  failed invariant " << f.invariant << "  witness '" << f.witness << "'  " << f.detail << "\n";
    if (!cfg.out.empty()) {
        json j;
        j["passed"] = r.passed;
        j["exact"] = r.exact;
        j["depth"] = r.depth;
        j["residual"] = value_to_json(r.residual);
        j["max_gap"] = value_to_json(r.max_gap);
        json fails = json::array();
        for (const auto& f : r.failures)
            fails.push_back({{"invariant", f.invariant}, {"witness", f.witness}, {"detail", f.detail}});
        j["failures"] = fails;
        emit(cfg, j);
    }
    return r.passed ? kOk : kCheckFailed;
}

std::uint64_t path_hash(const std::vector<SimStep>& path) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const auto& s : path) {
        mix(s.symbol);
        mix(s.lookback ? *s.lookback : 0);
    }
    return h;
}

template <class T>
int cmd_simulate(const Config& cfg) {
    std::vector<SimStep> path;
    FiniteAlphabet alpha;
    SimOptions so{cfg.length, cfg.seed, cfg.burn_in};
    if (!cfg.rep.empty()) {
        auto rep = load_rep<T>(cfg.rep);
        alpha = rep.alphabet;
        if (so.burn_in < rep.max_context()) so.burn_in = rep.max_context();
        CompleteRMP<T> src(std::move(rep), {}, tol_for(cfg) < 0 ? ScalarTraits<T>::default_tolerance() : cfg.tolerance);
        path = simulate(src, so);
    } else {
        auto lm = load_model<T>(cfg);
        alpha = lm.model->alphabet();
        if (lm.representation) {
            if (so.burn_in < lm.representation->max_context()) so.burn_in = lm.representation->max_context();
            path = simulate(CompleteRMP<T>(*lm.representation, lm.model), so);
        } else if (lm.chain) {
            if (so.burn_in < lm.chain->order()) so.burn_in = lm.chain->order();
            path = simulate(*lm.chain, so);
        } else {
            throw Error(ErrorCode::Unsupported, "this model has no chain or representation to simulate");
        }
    }
    auto s = summarize(path, alpha.size());
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(path_hash(path)));
    std::cout << "steps " << path.size() << "  seed " << cfg.seed << "  burn-in " << so.burn_in << "  path hash "
              << hash << "\n";
    for (std::size_t a = 0; a < alpha.size() && a < 16; ++a)
        std::cout << "  P(" << alpha.label(static_cast<Symbol>(a)) << ") ~ " << shortest_double(s.symbol_freq[a])
                  << "\n";
    if (!cfg.out.empty()) {
        std::ostringstream os;
        os << "symbol,lookback\n";
        for (const auto& st : path) {
            os << alpha.label(st.symbol) << ",";
            if (st.lookback) os << *st.lookback;
            os << "\n";
        }
        write_text_file(cfg.out, os.str());
    }
    return kOk;
}

template <class T>
int cmd_examples(const Config& cfg) {
    if (cfg.action == "list") {
        for (const auto& n : example_names()) std::cout << n << "\n";
        return kOk;
    }
    if (cfg.action != "build") throw Error(ErrorCode::Precondition, "examples action must be list or build");
    if (cfg.name.empty()) throw Error(ErrorCode::Precondition, "examples build needs a name");
    auto e = example<T>(cfg.name, cfg.truncate);
    json j;
    if (e.chain) {
        j = chain_to_json(*e.chain, e.model->dominating(), e.name);
        if (e.model->stationary()) j["stationary"] = measure_to_json(*e.model->stationary());
    } else {
        j["name"] = e.name;
        j["alphabet"] = alphabet_to_json(e.model->alphabet());
        if (e.model->order()) j["order"] = *e.model->order();
    }
    if (e.truncation) j["truncation"] = e.truncation;
    j["metadata"] = e.metadata;
    if (e.representation) j["representation"] = representation_to_json(*e.representation);
    emit(cfg, j);
    return kOk;
}

template <class T>
int dispatch(const std::string& cmd, const Config& cfg) {
    if (cmd == "variations") return cmd_variations<T>(cfg);
    if (cmd == "decompose") return cmd_decompose<T>(cfg);
    if (cmd == "ratio-decompose") return cmd_ratio<T>(cfg);
    if (cmd == "determinize") return cmd_determinize<T>(cfg);
    if (cmd == "verify") return cmd_verify<T>(cfg);
    if (cmd == "simulate") return cmd_simulate<T>(cfg);
    if (cmd == "examples") return cmd_examples<T>(cfg);
    throw Error(ErrorCode::Precondition, "unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-step Markov representations: decompose, determinize, verify, simulate"};
    app.require_subcommand(1);
    app.fallthrough();
    Config cfg;
    app.add_option("--backend", cfg.backend, "exact or float")->check(CLI::IsMember({"exact", "float"}));
    app.add_option("--tolerance", cfg.tolerance, "comparison tolerance (default: 0 exact, 1e-12 float)");
    app.add_option("--out", cfg.out, "output file");

    auto model_opts = [&](CLI::App* sub) {
        sub->add_option("model", cfg.model, "model JSON file or catalog name");
        sub->add_option("--example", cfg.example, "catalog example name");
        sub->add_option("--truncate", cfg.truncate, "truncation level for catalog examples");
        sub->add_flag("--all-words", cfg.all_words, "scan every word, not only positive ones");
    };

    auto* var = app.add_subcommand("variations", "variation and ratio coefficients");
    model_opts(var);
    var->add_option("--k-max", cfg.var_k_max, "largest k (default 8)");
    var->add_option("--depth", cfg.depth, "past length scanned");

    auto* dec = app.add_subcommand("decompose", "deterministic decomposition (variants a, b) or ratio construction");
    model_opts(dec);
    dec->add_option("--variant", cfg.variant, "a, b or ratio")->check(CLI::IsMember({"a", "b", "ratio"}));
    dec->add_option("--residual-target", cfg.residual_target, "stop once the residual is this small")
        ->check(CLI::Range(0.0, 1.0));
    dec->add_option("--k-max", cfg.k_max, "level cap")->check(CLI::PositiveNumber);
    dec->add_option("--levels", cfg.levels, "number of dyadic levels (ratio)");
    dec->add_option("--probe-depth", cfg.probe_depth, "ratio coefficients probed up to this depth");

    auto* rat = app.add_subcommand("ratio-decompose", "ratio-condition construction with dyadic masses");
    model_opts(rat);
    rat->add_option("--levels", cfg.levels, "number of dyadic levels");
    rat->add_option("--probe-depth", cfg.probe_depth, "ratio coefficients probed up to this depth");

    auto* det = app.add_subcommand("determinize", "binary-digit determinization of a representation");
    det->add_option("representation", cfg.rep, "representation JSON")->required();
    det->add_option("--family", cfg.family, "prime or balister")->check(CLI::IsMember({"prime", "balister"}));
    det->add_option("--digit-depth", cfg.digit_depth, "digits per coordinate");
    det->add_option("--arity", cfg.arity, "index function arity (default: bits + 1)");

    auto* ver = app.add_subcommand("verify", "check a representation against a model");
    model_opts(ver);
    ver->add_option("--rep", cfg.rep, "representation JSON")->required();
    ver->add_option("--depth", cfg.depth, "enumeration depth (0: automatic)");

    auto* sim = app.add_subcommand("simulate", "simulate a representation or a chain");
    model_opts(sim);
    sim->add_option("--rep", cfg.rep, "representation JSON");
    sim->add_option("--length", cfg.length, "number of recorded steps");
    sim->add_option("--seed", cfg.seed, "64-bit seed");
    sim->add_option("--burn-in", cfg.burn_in, "discarded steps (raised to the longest context)");

    auto* ex = app.add_subcommand("examples", "list or build catalog examples");
    ex->add_option("action", cfg.action, "list or build")->required()->check(CLI::IsMember({"list", "build"}));
    ex->add_option("name", cfg.name, "example name");
    ex->add_option("--truncate", cfg.truncate, "truncation level");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kError;
    }
    std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return cfg.backend == "exact" ? dispatch<Rational>(cmd, cfg) : dispatch<double>(cmd, cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
