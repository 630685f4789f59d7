// flowgame: command line front end for the weight/flow game library.

#include "flowgame/flowgame.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace flowgame;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

Rat parse_arg(const std::string& s, const char* what) {
    try {
        return parse_rat(s);
    } catch (const std::exception&) {
        throw UsageError(std::string("bad rational for ") + what + ": " + s);
    }
}

// ---- certify ---------------------------------------------------------------------

struct CertifyArgs {
    std::string k_target;
    std::string out;
    std::size_t max_rungs = 4096;
};

int run_certify(const CertifyArgs& args) {
    const Rat k = parse_arg(args.k_target, "--k-target");
    auto t0 = std::chrono::steady_clock::now();
    auto rungs = ladder(k, args.max_rungs);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = true;
    for (std::size_t j = 0; j < rungs.size(); ++j) {
        const auto& c = *rungs[j];
        auto bad = validate_cert(c, false);
        if (!bad.empty()) ok = false;
        std::cerr << "rung " << j + 1 << ": k=" << format_rat(c.k);
        if (!c.is_base())
            std::cerr << " eps=" << format_rat(c.eps) << " n=" << c.n << " target=" << format_rat(c.target());
        std::cerr << " height=" << c.height << " steps=" << c.steps.get_str()
                  << (bad.empty() ? "" : " INVALID: " + bad.front()) << "\n";
    }
    std::cerr << rungs.size() << " rungs in " << secs << " s\n";
    const std::string text = ladder_to_json(rungs, k).dump(1) + "\n";
    if (args.out.empty()) std::cout << text;
    else write_file(args.out, text);
    return ok ? 0 : 1;
}

// ---- play ---------------------------------------------------------------------------

struct PlayArgs {
    std::string m = "recursive";
    std::string a = "greedy_all";
    std::string cert;
    std::string k_target;
    std::size_t rung = 0;  // 0 = last
    std::size_t rounds = 1000;
    std::size_t grace = 3;
    std::uint64_t seed = 1;
    unsigned grain = 4;
    std::string delta;
    std::string trace;
    std::string script;
    std::size_t height = 3;
    std::string k;
    std::size_t layers = 2;
};

CertPtr pick_cert(const PlayArgs& args) {
    std::vector<CertPtr> rungs;
    if (!args.cert.empty()) rungs = ladder_from_json(nlohmann::json::parse(read_file(args.cert)));
    else if (!args.k_target.empty()) rungs = ladder(parse_arg(args.k_target, "--k-target"));
    else throw UsageError("--cert or --k-target is required for this strategy");
    if (args.rung > rungs.size()) throw UsageError("no rung " + std::to_string(args.rung));
    CertPtr c = args.rung == 0 ? rungs.back() : rungs[args.rung - 1];
    if (c->is_base()) throw UsageError("the base rung has no recursive strategy; pick a higher rung");
    return c;
}

StrategyPtr make_adversary(const PlayArgs& args, const CertPtr& cert) {
    const std::string& a = args.a;
    if (a == "greedy_all") return greedy_all();
    if (a == "proportional_online") return proportional_online();
    if (a == "uniform_once") return uniform_once();
    if (a == "silent") return silent();
    if (a == "random") return random_adversary(args.seed, args.grain);
    if (a == "threshold_dodger") {
        if (!cert) throw UsageError("threshold_dodger needs a certificate");
        Rat d = args.delta.empty() ? ThresholdDodger::default_delta(*cert) : parse_arg(args.delta, "--delta");
        return threshold_dodger(cert, d);
    }
    if (a == "scripted") {
        if (args.script.empty()) throw UsageError("scripted adversary needs --script trace.jsonl");
        return scripted(a_moves(trace_from_jsonl(read_file(args.script))));
    }
    throw UsageError("unknown adversary " + a);
}

int run_play(const PlayArgs& args) {
    GameConfig config;
    StrategyPtr m;
    CertPtr cert;
    auto target_or = [&](const char* dflt) { return parse_arg(args.k.empty() ? dflt : args.k, "--k"); };
    if (args.m == "recursive" || args.m == "monotone") {
        cert = pick_cert(args);
        std::size_t h = cert->height;
        if (args.m == "monotone") {
            if (!cert->monotone_height.fits_ulong_p()) throw UsageError("monotone tree height does not fit");
            h = cert->monotone_height.get_ui();
        }
        config = GameConfig{h, 1, 1, cert->target()};
        m = args.m == "recursive" ? recursive_strategy(cert) : StrategyPtr(monotone_recursive_strategy(cert));
    } else if (args.m == "trivial") {
        config = GameConfig{args.height, 1, 1, target_or("1")};
        m = trivial_strategy();
    } else if (args.m == "toy") {
        config = GameConfig{2, 1, 1, target_or("17/16")};
        m = toy_strategy(config.target);
    } else if (args.m == "one_shot") {
        config = GameConfig{args.height, 1, 1, target_or("9/8")};
        m = OneShotStrategy::spread(args.height);
    } else if (args.m == "layered") {
        config = GameConfig{kUnboundedHeight, 1, 1, Rat(static_cast<long>(args.layers))};
        m = layered_driver(default_exponents(args.layers));
    } else {
        throw UsageError("unknown strategy " + args.m);
    }
    if (!cert && args.a == "threshold_dodger") cert = pick_cert(args);
    StrategyPtr a = make_adversary(args, cert);
    MatchOptions opt;
    opt.caps = {args.rounds, args.grace};
    opt.header_extra["seed"] = args.seed;
    if (cert) opt.header_extra["cert"] = cert_hash(*cert);
    MatchTrace t = run_match(*m, *a, config, opt);
    if (!args.trace.empty()) write_file(args.trace, trace_to_jsonl(t));
    std::cout << verdict_name(t.verdict.kind) << ": " << t.verdict.reason << "\n";
    std::cout << "rounds " << t.rounds << ", M moves " << t.m_moves << ", target " << format_rat(config.target)
              << "\n";
    if (t.verdict.kind == VerdictKind::MWins || t.verdict.kind == VerdictKind::Undecided)
        std::cout << "leaf " << (t.verdict.leaf.is_root() ? std::string("(root)") : t.verdict.leaf.str()) << " sum "
                  << t.verdict.sum.str() << "\n";
    return t.verdict.kind == VerdictKind::MWins ? 0 : 1;
}

// ---- verify ---------------------------------------------------------------------------

int run_verify(const std::string& path) {
    VerifyReport r = verify_trace(read_file(path));
    if (r.ok) {
        std::cout << "ok: " << r.events << " events replayed\n";
        return 0;
    }
    std::cout << "divergence";
    if (r.divergence) std::cout << " at event " << *r.divergence;
    std::cout << ": " << r.message << "\n";
    return 1;
}

// ---- prop1 -----------------------------------------------------------------------------

struct Prop1Args {
    std::string measure;
    std::size_t random = 0;
    std::size_t height = 8;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct Prop1Outcome {
    ExtRat max_sum;
    std::optional<std::string> failure;
};

Prop1Outcome check_prop1(const DiscreteSemimeasure& m) {
    TreeMeasure a = proportional_split(m, m.height);
    Prop1Outcome o{max_path_ratio_sum(m, a), std::nullopt};
    if (o.max_sum > ExtRat(Rat(1))) o.failure = "path sum " + o.max_sum.str() + " exceeds 1";
    else if (auto x = proportion_identity_violation(m, a)) o.failure = "proportion identity fails at " + x->str();
    else if (!is_additive(a)) o.failure = "split is not additive";
    return o;
}

int run_prop1(const Prop1Args& args) {
    if (!args.measure.empty()) {
        DiscreteSemimeasure m = semimeasure_from_json(nlohmann::json::parse(read_file(args.measure)), args.height);
        m.validate();
        auto o = check_prop1(m);
        std::cout << "max path sum " << o.max_sum.str() << "\n";
        if (o.failure) std::cout << "FAIL: " << *o.failure << "\n";
        return o.failure ? 1 : 0;
    }
    if (args.random == 0) throw UsageError("give --measure file or --random count");
    // measure i uses its own generator so the sweep is independent of the thread count
    const unsigned nt = args.threads ? args.threads : std::max(1U, std::thread::hardware_concurrency());
    std::vector<Prop1Outcome> out(args.random);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < args.random;) {
            std::mt19937_64 rng(args.seed * 1000003ULL + i);
            std::size_t h = std::uniform_int_distribution<std::size_t>(0, args.height)(rng);
            out[i] = check_prop1(random_semimeasure(rng, h));
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    ExtRat worst;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].max_sum > worst) worst = out[i].max_sum;
        if (out[i].failure) {
            if (failures++ < 5) std::cout << "measure " << i << ": " << *out[i].failure << "\n";
        }
    }
    std::cout << args.random << " measures, max path sum " << worst.str() << ", " << failures << " failures\n";
    return failures ? 1 : 0;
}

// ---- search --------------------------------------------------------------------------

struct SearchArgs {
    std::size_t height = 2;
    std::string k = "9/8";
    unsigned grain = 8;
    unsigned plies = 6;
    bool toy = false;
};

int run_search(const SearchArgs& args) {
    if (args.height > 2) throw UsageError("search supports height <= 2");
    if (args.grain == 0 || args.grain > 15) throw UsageError("grain must be in 1..15");
    if (args.toy) {
        ToyGuarantee g = toy_guarantee(args.grain, args.plies);
        for (const auto& [k, wins] : g.table) std::cout << "k=" << format_rat(k) << (wins ? " toy wins\n" : " A wins\n");
        if (!g.found) {
            std::cout << "toy strategy wins for no k on this grid\n";
            return 1;
        }
        std::cout << "k* = " << format_rat(g.k_star) << " (" << to_double(g.k_star) << "); reference claim 17/16 = 1.0625\n";
        std::cout << g.lines_checked << " lines replayed, " << (g.consistent ? "consistent" : g.inconsistency) << "\n";
        return g.consistent ? 0 : 1;
    }
    GridResult r = grid_solve(GridConfig{args.height, parse_arg(args.k, "--k"), args.grain, args.plies});
    std::cout << "winner " << player_name(r.winner) << " (" << r.nodes << " positions)\n";
    for (const auto& d : r.pv) {
        std::cout << "  " << player_name(d.player) << ":";
        if (d.updates.empty()) std::cout << " pass";
        for (const auto& u : d.updates)
            std::cout << " " << (u.node.is_root() ? std::string("root") : u.node.str()) << "=" << format_rat(u.value);
        std::cout << "\n";
    }
    return 0;
}

// ---- ce-build ---------------------------------------------------------------------------

struct CeArgs {
    std::size_t layers = 2;
    std::string a = "proportional_online";
    std::size_t rounds = 10000;
    std::size_t grace = 3;
    std::uint64_t seed = 1;
    unsigned grain = 4;
    std::string out;
    std::string trace;
    std::string report;
};

int run_ce_build(const CeArgs& args) {
    if (args.layers == 0) throw UsageError("--layers must be positive");
    PlayArgs pa;
    pa.a = args.a;
    pa.seed = args.seed;
    pa.grain = args.grain;
    if (args.a == "threshold_dodger" || args.a == "scripted") throw UsageError("adversary not available for ce-build");
    StrategyPtr a = make_adversary(pa, nullptr);
    CeResult r = ce_builder(default_exponents(args.layers), *a, {args.rounds, args.grace});
    const std::string events = enumeration_to_jsonl(r.events);
    const std::string trace = trace_to_jsonl(r.trace);
    if (!args.out.empty()) write_file(args.out, events);
    if (!args.trace.empty()) write_file(args.trace, trace);
    nlohmann::json rep = ce_report_to_json(r.report);
    // replay checks
    VerifyReport vt = verify_trace(trace);
    EnumerationCheck ve = verify_enumeration(enumeration_from_jsonl(events), trace_from_jsonl(trace),
                                             r.report.branch.str());
    rep["trace_verified"] = vt.ok;
    rep["enumeration_verified"] = ve.ok;
    if (!ve.ok) rep["enumeration_failure"] = ve.message;
    if (!args.report.empty()) write_file(args.report, rep.dump(1) + "\n");
    else std::cout << rep.dump(1) << "\n";
    const bool ok = r.report.verdict.kind == VerdictKind::MWins && r.report.monotone && vt.ok && ve.ok &&
                    r.report.total >= ExtRat(Rat(static_cast<long>(args.layers)));
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weight/flow game simulator and verifier"};
    app.require_subcommand(1);

    CertifyArgs ca;
    auto* certify = app.add_subcommand("certify", "build and check the certificate ladder");
    certify->add_option("--k-target", ca.k_target, "target k as p/q")->required();
    certify->add_option("--out", ca.out, "ladder JSON output (default stdout)");
    certify->add_option("--max-rungs", ca.max_rungs);

    PlayArgs pa;
    auto* play = app.add_subcommand("play", "run one match");
    play->add_option("--m", pa.m, "trivial|toy|recursive|monotone|one_shot|layered");
    play->add_option("--a", pa.a,
                     "greedy_all|proportional_online|threshold_dodger|random|uniform_once|silent|scripted");
    play->add_option("--cert", pa.cert, "ladder JSON from certify");
    play->add_option("--k-target", pa.k_target, "build the ladder to this target instead of --cert");
    play->add_option("--rung", pa.rung, "1-based rung (default last)");
    play->add_option("--rounds", pa.rounds);
    play->add_option("--grace", pa.grace);
    play->add_option("--seed", pa.seed);
    play->add_option("--grain", pa.grain, "random adversary grain");
    play->add_option("--delta", pa.delta, "threshold_dodger delta");
    play->add_option("--trace", pa.trace, "JSONL trace output");
    play->add_option("--script", pa.script, "trace whose A moves the scripted adversary replays");
    play->add_option("--height", pa.height, "tree height for trivial/one_shot");
    play->add_option("--k", pa.k, "target for trivial/toy/one_shot");
    play->add_option("--layers", pa.layers, "layers for the layered driver");

    std::string trace_path;
    auto* verify = app.add_subcommand("verify", "replay a trace");
    verify->add_option("--trace", trace_path)->required();

    Prop1Args p1;
    auto* prop1 = app.add_subcommand("prop1", "check the proportional split on semimeasures");
    prop1->add_option("--measure", p1.measure, "semimeasure JSON");
    prop1->add_option("--random", p1.random, "number of random semimeasures");
    prop1->add_option("--height", p1.height);
    prop1->add_option("--seed", p1.seed);
    prop1->add_option("--threads", p1.threads);

    SearchArgs sa;
    auto* search = app.add_subcommand("search", "exhaustive grid search");
    search->add_option("--height", sa.height);
    search->add_option("--k", sa.k);
    search->add_option("--grain", sa.grain);
    search->add_option("--plies", sa.plies);
    search->add_flag("--toy", sa.toy, "measure the toy strategy's guarantee");

    CeArgs ce;
    auto* cebuild = app.add_subcommand("ce-build", "monotone layered build with enumeration");
    cebuild->add_option("--layers", ce.layers);
    cebuild->add_option("--a", ce.a);
    cebuild->add_option("--rounds", ce.rounds);
    cebuild->add_option("--grace", ce.grace);
    cebuild->add_option("--seed", ce.seed);
    cebuild->add_option("--grain", ce.grain);
    cebuild->add_option("--out", ce.out, "enumeration JSONL");
    cebuild->add_option("--trace", ce.trace, "match trace JSONL");
    cebuild->add_option("--report", ce.report, "report JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*certify) return run_certify(ca);
        if (*play) return run_play(pa);
        if (*verify) return run_verify(trace_path);
        if (*prop1) return run_prop1(p1);
        if (*search) return run_search(sa);
        if (*cebuild) return run_ce_build(ce);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
