#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <bcd/bcd.hpp>

namespace {

enum ExitCode { ok = 0, config_error = 1, numeric_failure = 2, verification_failure = 3 };

std::vector<double> parse_eps_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(tok, &used);
            if (used != tok.size() || !(v > 0.0)) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw bcd::ConfigError("bad epsilon '" + tok + "'");
        }
    }
    if (out.empty()) throw bcd::ConfigError("empty epsilon list");
    return out;
}

bcd::ExperimentConfig config_or_default(const std::string& path, std::optional<std::uint64_t> seed)
{
    if (!path.empty()) return bcd::load_config(path, seed);
    bcd::ExperimentConfig c;
    if (seed) c.seed = *seed;
    return c;
}

// ---- gen ----------------------------------------------------------------

struct GenArgs
{
    std::string config;
    std::string out = "instance.json";
    bcd::Index m = 200;
    bcd::Index n = 50;
    std::optional<std::uint64_t> seed;
    std::string lambda = "0";
};

int cmd_gen(const GenArgs& a, CLI::App& sub)
{
    bcd::json pj;
    std::uint64_t seed = a.seed.value_or(0);
    if (!a.config.empty()) {
        const auto cfg = bcd::load_config(a.config, a.seed);
        if (cfg.problem.value("type", std::string()) != "generated") {
            throw bcd::ConfigError("gen needs a config with problem.type = generated");
        }
        pj = cfg.problem;
        if (!pj.contains("m")) pj["m"] = cfg.paper_scale ? 1000 : 200;
        if (!pj.contains("n")) pj["n"] = cfg.paper_scale ? 100 : 50;
        seed = pj.value("seed", cfg.seed);
    } else {
        pj = bcd::json{{"m", a.m}, {"n", a.n}};
        if (a.lambda == "1/(2m)") {
            pj["lambda"] = a.lambda;
        } else {
            try {
                pj["lambda"] = std::stod(a.lambda);
            } catch (const std::exception&) {
                throw bcd::ConfigError("bad --lambda '" + a.lambda + "'");
            }
        }
    }
    // flags given explicitly on the command line win over the config file
    if (sub.count("--m")) pj["m"] = a.m;
    if (sub.count("--n")) pj["n"] = a.n;
    const bcd::Index m = pj.at("m").get<bcd::Index>();
    const bcd::Index n = pj.at("n").get<bcd::Index>();
    if (m < 1 || n < 1) throw bcd::ConfigError("m and n must be positive");
    if (n > m) throw bcd::ConfigError("gen needs n <= m");
    const auto inst = bcd::gen_instance(m, n, seed, bcd::parse_lambda(pj, m));
    bcd::save_instance(a.out, inst);
    std::cout << "wrote " << a.out << " (m=" << m << ", n=" << n << ", seed=" << seed << ", lambda=" << inst.lambda
              << ")\n";
    return ok;
}

// ---- run ----------------------------------------------------------------

struct RunArgs
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool paper_scale = false;
    bool quiet = false;
};

int cmd_run(const RunArgs& a)
{
    auto cfg = config_or_default(a.config, a.seed);
    if (!a.out.empty()) cfg.out_dir = a.out;
    if (a.paper_scale) cfg.paper_scale = true;
    const auto rep = bcd::run_campaign(cfg, true);

    if (!a.quiet) {
        std::cout << "problem: " << rep.built.description.dump() << "\n";
        std::cout << "optimum: " << rep.built.opt_label << "\n";
        std::cout << std::left << std::setw(14) << "rule" << std::setw(18) << "final F" << std::setw(14) << "final xi"
                  << std::setw(11) << "verified" << std::setw(14) << "predicted K" << "observed K\n";
        for (const auto& o : rep.outcomes) {
            std::cout << std::setw(14) << o.rule.name();
            if (!o.result) {
                std::cout << "failed: " << o.error << "\n";
                continue;
            }
            const auto& r = *o.result;
            std::ostringstream xi;
            if (r.final_xi) xi << std::setprecision(4) << *r.final_xi;
            std::ostringstream K;
            if (o.bound) K << o.bound->K(cfg.epsilon);
            else K << "-";
            std::cout << std::setw(18) << std::setprecision(10) << r.final_F << std::setw(14) << xi.str() << std::setw(11)
                      << (o.verification ? (o.verification->all_pass() ? "yes" : "NO") : "-") << std::setw(14)
                      << K.str() << (o.observed_K ? std::to_string(*o.observed_K) : "-") << "\n";
        }
        std::cout << "report: " << (std::filesystem::path(cfg.out_dir) / "report.json").string() << "\n";
    }
    if (rep.any_numeric_failure) return numeric_failure;
    if (!rep.all_verified) return verification_failure;
    return ok;
}

// ---- rates --------------------------------------------------------------

struct RatesArgs
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string eps = "1e-2,1e-4,1e-6";
    std::string format = "text";
};

int cmd_rates(const RatesArgs& a)
{
    const auto cfg = config_or_default(a.config, a.seed);
    const auto eps = parse_eps_list(a.eps);
    const auto rows = bcd::rate_table(cfg, eps);
    const auto fmtK = [](double k) {
        if (k >= 1.8e19) return std::string("inf");
        std::ostringstream os;
        os << std::fixed << std::setprecision(0) << k;
        return os.str();
    };
    if (a.format == "csv") {
        std::cout << "rule,class,constant_label,constant";
        for (double e : eps) std::cout << ",K(" << e << ")";
        std::cout << ",note\n";
        for (const auto& r : rows) {
            std::cout << r.rule << "," << r.cls << "," << r.label << "," << bcd::detail::fmt_double(r.constant);
            for (std::size_t i = 0; i < eps.size(); ++i) std::cout << "," << (i < r.K.size() ? fmtK(r.K[i]) : "");
            std::cout << ",\"" << r.note << "\"\n";
        }
    } else if (a.format == "text") {
        std::cout << std::left << std::setw(14) << "rule" << std::setw(20) << "class" << std::setw(26) << "constant";
        for (double e : eps) {
            std::ostringstream h;
            h << "K(" << e << ")";
            std::cout << std::setw(16) << h.str();
        }
        std::cout << "\n";
        for (const auto& r : rows) {
            std::cout << std::setw(14) << r.rule;
            if (r.K.empty()) {
                std::cout << "no guarantee: " << r.note << "\n";
                continue;
            }
            std::ostringstream c;
            c << std::setprecision(4) << r.constant;
            std::cout << std::setw(20) << r.cls << std::setw(26) << c.str();
            for (double k : r.K) std::cout << std::setw(16) << fmtK(k);
            if (!r.note.empty()) std::cout << r.note;
            std::cout << "\n";
        }
    } else {
        throw bcd::ConfigError("--format must be text or csv");
    }
    return ok;
}

// ---- check --------------------------------------------------------------

struct CheckArgs
{
    std::uint64_t seed = 0;
    bcd::Index n = 12;
    bcd::Index m = 40;
    bool corrupt = false;
    bool failures_only = false;
};

int cmd_check(const CheckArgs& a)
{
    if (a.n < 4 || a.n > 12) throw bcd::ConfigError("check: n must lie in [4, 12]");
    if (a.m < a.n || a.m > 40) throw bcd::ConfigError("check: m must lie in [n, 40]");
    bcd::checks::SuiteOptions o;
    o.seed = a.seed;
    o.n = a.n;
    o.m = a.m;
    o.corrupt_smoothness = a.corrupt;
    const auto suite = bcd::checks::full_suite(o);
    std::size_t failed = 0;
    for (const auto& c : suite) {
        if (!c.pass) ++failed;
        if (!a.failures_only || !c.pass) std::cout << bcd::checks::format_check(c) << "\n";
    }
    std::cout << suite.size() - failed << "/" << suite.size() << " checks passed\n";
    return failed == 0 ? ok : verification_failure;
}

// ---- slice --------------------------------------------------------------

struct SliceArgs
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string direction = "random";
    double radius = 1.0;
    std::size_t points = 101;
    std::string out;
};

int cmd_slice(const SliceArgs& a)
{
    const auto cfg = config_or_default(a.config, a.seed);
    const auto b = bcd::build_problem(cfg);
    const bcd::Vector ref = bcd::slice_reference(b, cfg.reference_iters);
    const bcd::Vector d = bcd::parse_direction(a.direction, b.problem, cfg.seed);
    const auto pts = bcd::slice(b.problem, ref, d, a.radius, a.points);
    std::ostringstream os;
    os << "t,F\n";
    for (const auto& p : pts) os << bcd::detail::fmt_double(p.t) << "," << bcd::detail::fmt_double(p.F) << "\n";
    if (a.out.empty()) std::cout << os.str();
    else bcd::write_file(a.out, os.str());
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Arbitrary-block proximal descent: experiments, rate predictions and invariant checks"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "generate a random least-squares-plus-cosine instance");
    g->add_option("--config", gen.config, "experiment config with a generated problem");
    g->add_option("-o,--out", gen.out, "instance file to write");
    g->add_option("--m", gen.m, "rows of A");
    g->add_option("--n", gen.n, "columns of A");
    g->add_option("--seed", gen.seed, "generator seed");
    g->add_option("--lambda", gen.lambda, "l1 weight, a number or 1/(2m)");

    RunArgs run;
    auto* r = app.add_subcommand("run", "run a campaign of block rules and write traces and report.json");
    r->add_option("--config", run.config, "experiment config (JSON)");
    r->add_option("--seed", run.seed, "override the config seed");
    r->add_option("--out", run.out, "override output.dir");
    r->add_flag("--paper-scale", run.paper_scale, "use m=1000, n=100 for generated problems");
    r->add_flag("-q,--quiet", run.quiet, "no summary table");

    RatesArgs rates;
    auto* rt = app.add_subcommand("rates", "print predicted iteration counts per rule");
    rt->add_option("--config", rates.config, "experiment config (JSON)");
    rt->add_option("--seed", rates.seed, "override the config seed");
    rt->add_option("--eps", rates.eps, "comma-separated target accuracies");
    rt->add_option("--format", rates.format, "text or csv");

    CheckArgs check;
    auto* c = app.add_subcommand("check", "run the invariant suite at reduced scale");
    c->add_option("--seed", check.seed, "suite seed");
    c->add_option("--n", check.n, "instance columns (4..12)");
    c->add_option("--m", check.m, "instance rows (n..40)");
    c->add_flag("--corrupt-smoothness", check.corrupt, "negative control: break positive definiteness of M");
    c->add_flag("--failures-only", check.failures_only, "print failing checks only");

    SliceArgs sl;
    auto* s = app.add_subcommand("slice", "sample F along a line through the reference point");
    s->add_option("--config", sl.config, "experiment config (JSON)");
    s->add_option("--seed", sl.seed, "override the config seed");
    s->add_option("--direction", sl.direction, "random, e:<i>, cos, or comma-separated vector");
    s->add_option("--radius", sl.radius, "half-width of the t range");
    s->add_option("--points", sl.points, "number of samples");
    s->add_option("-o,--out", sl.out, "CSV file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*g) return cmd_gen(gen, *g);
        if (*r) return cmd_run(run);
        if (*rt) return cmd_rates(rates);
        if (*c) return cmd_check(check);
        if (*s) return cmd_slice(sl);
    } catch (const bcd::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return numeric_failure;
    } catch (const bcd::UnverifiableError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return verification_failure;
    } catch (const bcd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_error;
    } catch (const bcd::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_error;
    }
    return ok;
}
