#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <bcd/descent.hpp>
#include <bcd/errors.hpp>
#include <bcd/instance_io.hpp>
#include <bcd/objectives.hpp>
#include <bcd/rates.hpp>
#include <bcd/selection.hpp>

namespace bcd {

// -------------------------------------------------------------------------
// Experiment configuration
// -------------------------------------------------------------------------

struct ExperimentConfig
{
    std::uint64_t seed = 0;
    json problem = json{{"type", "generated"}};
    std::vector<std::string> rules;
    bool default_rules = true;
    std::uint64_t max_iters = 1000;
    double epsilon = 1e-6;
    bool diagnostics = true;
    StopOn stop_on = StopOn::iters;
    std::string step = "auto";
    std::uint64_t enumeration_budget = default_enumeration_budget;
    std::uint64_t reference_iters = 20000;
    std::optional<Vector> x0;
    // "auto", "zeros" or "gaussian"; ignored when x0 is given explicitly
    std::string x0_mode = "auto";
    std::string out_dir = "out";
    bool timing = true;
    bool gnuplot = false;
    bool paper_scale = false;
    std::string theory_class = "auto";
    std::optional<double> mu;
    std::optional<double> rho;
};

namespace detail {

inline StopOn parse_stop(const std::string& s)
{
    if (s == "iters") return StopOn::iters;
    if (s == "gap") return StopOn::gap;
    if (s == "certificate") return StopOn::certificate;
    throw ConfigError("run.stop_on must be iters, gap or certificate");
}

inline std::string stop_name(StopOn s)
{
    switch (s) {
        case StopOn::iters: return "iters";
        case StopOn::gap: return "gap";
        case StopOn::certificate: return "certificate";
    }
    return "?";
}

inline Vector vector_from_json(const json& a)
{
    if (!a.is_array()) throw ConfigError("expected a numeric array");
    Vector v(static_cast<Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Index>(i)] = a[i].get<double>();
    return v;
}

inline json vector_to_json(const Vector& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

template <class T>
void read_opt(const json& j, const char* key, T& dst)
{
    if (j.contains(key)) dst = j.at(key).get<T>();
}

} // namespace detail

/**
 * Sections: "problem", "rules", "run", "output", "theory", plus top-level
 * "seed" and "paper_scale". Unknown top-level keys are rejected.
 */
inline ExperimentConfig config_from_json(const json& j, std::optional<std::uint64_t> seed_override = std::nullopt)
{
    ExperimentConfig c;
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        for (const auto& [k, v] : j.items()) {
            if (k != "seed" && k != "problem" && k != "rules" && k != "run" && k != "output" && k != "theory" &&
                k != "paper_scale" && k != "comment") {
                throw ConfigError("unknown config section '" + k + "'");
            }
        }
        detail::read_opt(j, "seed", c.seed);
        if (seed_override) c.seed = *seed_override;
        detail::read_opt(j, "paper_scale", c.paper_scale);
        if (j.contains("problem")) c.problem = j.at("problem");
        if (!c.problem.is_object() || !c.problem.contains("type")) throw ConfigError("problem.type is required");
        if (j.contains("rules")) {
            const auto& r = j.at("rules");
            if (r.is_string() && r.get<std::string>() == "default") {
                c.default_rules = true;
            } else {
                c.rules = r.get<std::vector<std::string>>();
                c.default_rules = false;
                if (c.rules.empty()) throw ConfigError("rule list is empty");
            }
        }
        if (j.contains("run")) {
            const auto& r = j.at("run");
            detail::read_opt(r, "max_iters", c.max_iters);
            detail::read_opt(r, "epsilon", c.epsilon);
            detail::read_opt(r, "diagnostics", c.diagnostics);
            if (r.contains("stop_on")) c.stop_on = detail::parse_stop(r.at("stop_on").get<std::string>());
            detail::read_opt(r, "step", c.step);
            detail::read_opt(r, "enumeration_budget", c.enumeration_budget);
            detail::read_opt(r, "reference_iters", c.reference_iters);
            if (r.contains("x0")) {
                if (r.at("x0").is_string()) c.x0_mode = r.at("x0").get<std::string>();
                else c.x0 = detail::vector_from_json(r.at("x0"));
            }
        }
        if (j.contains("output")) {
            const auto& o = j.at("output");
            detail::read_opt(o, "dir", c.out_dir);
            detail::read_opt(o, "timing", c.timing);
            detail::read_opt(o, "gnuplot", c.gnuplot);
        }
        if (j.contains("theory")) {
            const auto& t = j.at("theory");
            detail::read_opt(t, "class", c.theory_class);
            if (t.contains("mu")) c.mu = t.at("mu").get<double>();
            if (t.contains("rho")) c.rho = t.at("rho").get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.max_iters < 1) throw ConfigError("run.max_iters must be at least 1");
    if (!(c.epsilon > 0.0)) throw ConfigError("run.epsilon must be positive");
    if (c.x0_mode != "auto" && c.x0_mode != "zeros" && c.x0_mode != "gaussian") {
        throw ConfigError("run.x0 must be a vector or one of auto, zeros, gaussian");
    }
    if (c.step != "auto" && c.step != "matrix" && c.step != "scalar") throw ConfigError("run.step must be auto, matrix or scalar");
    for (const auto& r : c.rules) (void)parse_rule(r);
    return c;
}

inline ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt)
{
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return config_from_json(j, seed_override);
}

// -------------------------------------------------------------------------
// Problem construction
// -------------------------------------------------------------------------

struct BuiltProblem
{
    CompositeProblem problem;
    Vector x0;
    json description;
    // "exact", "closed_form", "reference" or "empirical optimum"
    std::string opt_label = "none";
    std::optional<GeneratedInstance> instance;
};

/**
 * Default start for generated instances: a seeded standard Gaussian vector.
 * With unit-norm y the l1 problem is minimized at the origin, so starting
 * there would leave nothing to do.
 */
inline Vector generated_start(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
    std::normal_distribution<double> N(0.0, 1.0);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = N(rng);
    return x;
}

// Strongly convex quadratic (cond = lambda_max / lambda_min) with a seeded linear term.
inline CompositeProblem make_random_quadratic(Index n, double cond, std::uint64_t seed, double lambda,
                                              QuadSmoothness form = QuadSmoothness::hessian)
{
    const Matrix H = random_spd(n, 1.0, cond, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> N(0.0, 1.0);
    Vector q(n);
    for (Index i = 0; i < n; ++i) q[i] = N(rng);
    Objective f = make_quadratic(H, q, form);
    return make_problem(std::move(f), lambda > 0.0 ? make_l1(lambda) : make_zero_regularizer());
}

/**
 * High-accuracy optimum of a strongly convex composite problem by
 * proximal gradient descent, run until the certificate stops moving.
 */
inline void attach_reference_optimum(CompositeProblem& p, std::uint64_t max_iters = 200000)
{
    CompositeProblem q = p;
    q.opt_value.reset();
    RunConfig cfg;
    cfg.max_iters = max_iters;
    cfg.stop_on = StopOn::certificate;
    cfg.epsilon = 1e-300;
    BlockRule full;
    double prevF = std::numeric_limits<double>::infinity();
    Vector x = Vector::Zero(p.dim());
    // chunks so that a stalled iterate ends the search early
    for (std::uint64_t done = 0; done < max_iters; done += 2000) {
        cfg.max_iters = 2000;
        cfg.x0 = x;
        const auto r = run(q, full, cfg);
        x = r.x;
        if (r.final_F >= prevF || r.termination == Termination::reached_certificate) {
            prevF = std::min(prevF, r.final_F);
            break;
        }
        prevF = r.final_F;
    }
    p.opt_value = p.F(x);
    p.minimizer = x;
    p.opt_empirical = false;
}

inline double parse_lambda(const json& pj, Index m)
{
    if (!pj.contains("lambda")) return 0.0;
    const auto& l = pj.at("lambda");
    if (l.is_string()) {
        if (l.get<std::string>() == "1/(2m)") return 1.0 / (2.0 * static_cast<double>(m));
        throw ConfigError("problem.lambda must be a number or \"1/(2m)\"");
    }
    return l.get<double>();
}

inline BuiltProblem build_problem(const ExperimentConfig& cfg)
{
    const json& pj = cfg.problem;
    const std::string type = pj.at("type").get<std::string>();
    BuiltProblem out;
    out.description = pj;
    try {
        if (type == "generated" || type == "instance") {
            GeneratedInstance inst;
            if (type == "generated") {
                const Index m = pj.value("m", static_cast<Index>(cfg.paper_scale ? 1000 : 200));
                const Index n = pj.value("n", static_cast<Index>(cfg.paper_scale ? 100 : 50));
                const std::uint64_t seed = pj.value("seed", cfg.seed);
                inst = gen_instance(m, n, seed, parse_lambda(pj, m));
            } else {
                inst = load_instance(pj.at("path").get<std::string>());
            }
            out.problem = to_problem(inst);
            out.x0 = cfg.x0_mode == "zeros" ? Vector(Vector::Zero(inst.n)) : generated_start(inst.n, inst.seed);
            out.opt_label = out.problem.opt_value ? "exact" : "none";
            out.description = json{{"type", type}, {"m", inst.m}, {"n", inst.n}, {"seed", inst.seed}, {"lambda", inst.lambda}};
            out.instance = std::move(inst);
        } else if (type == "builtin") {
            const std::string name = pj.at("name").get<std::string>();
            const json params = pj.value("params", json::object());
            if (name == "plateau") {
                double c = flat_inflection_c();
                if (params.contains("c") && params.at("c").is_number()) c = params.at("c").get<double>();
                out.problem = make_smooth_problem(make_plateau_1d(c));
                out.x0 = Vector::Constant(1, params.value("x0", -2.0));
                out.opt_label = "exact";
                out.description["c"] = c;
            } else if (name == "quadratic" || name == "quadratic_l1") {
                const Index n = params.value("n", static_cast<Index>(10));
                const double cond = params.value("cond", 100.0);
                const double lambda = name == "quadratic_l1" ? params.value("lambda", 0.1) : 0.0;
                const auto form = params.value("smoothness", std::string("hessian")) == "scalar" ? QuadSmoothness::scalar
                                                                                               : QuadSmoothness::hessian;
                out.problem = make_random_quadratic(n, cond, params.value("seed", cfg.seed), lambda, form);
                if (lambda > 0.0) {
                    attach_reference_optimum(out.problem);
                    out.opt_label = "reference";
                } else {
                    out.opt_label = "closed_form";
                }
                out.x0 = Vector::Zero(n);
            } else if (name == "product_square" || name == "huber_product") {
                out.problem = make_smooth_problem(name == "product_square" ? make_product_square() : make_huber_product());
                out.x0 = Vector(2);
                out.x0 << 1.5, 1.0;
                out.opt_label = "closed_form";
            } else {
                throw ConfigError("unknown builtin problem '" + name + "'");
            }
        } else {
            throw ConfigError("unknown problem type '" + type + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("problem: ") + e.what());
    }
    if (cfg.step == "scalar") out.problem.step = StepKind::scalar;
    if (cfg.step == "matrix") {
        if (!out.problem.smooth()) throw ConfigError("run.step = matrix requires a smooth problem");
        out.problem.step = StepKind::matrix;
    }
    if (!cfg.x0 && cfg.x0_mode == "zeros") out.x0.setZero();
    if (!cfg.x0 && !out.instance && cfg.x0_mode == "gaussian") out.x0 = generated_start(out.problem.dim(), cfg.seed);
    if (cfg.x0) {
        if (cfg.x0->size() != out.problem.dim()) throw ConfigError("run.x0 has the wrong dimension");
        out.x0 = *cfg.x0;
    }
    return out;
}

inline std::vector<BlockRule> campaign_rules(const ExperimentConfig& cfg, const CompositeProblem& p)
{
    std::vector<std::string> specs = cfg.rules;
    if (cfg.default_rules) {
        const Index tau = std::min<Index>(3, p.dim());
        specs = {"full", "uniform", "importance", "greedy", "nice:" + std::to_string(tau),
                 "greedymb:" + std::to_string(tau)};
        if (!p.uses_matrix_step()) specs.erase(specs.begin() + 2);
    }
    std::vector<BlockRule> rules;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        rules.push_back(parse_rule(specs[i], cfg.seed + 1 + i));
        const StepModel probe = p.uses_matrix_step() ? StepModel::matrix() : StepModel::scalar(p.L_scalar);
        validate_rule(rules.back(), p, probe);
    }
    if (rules.empty()) throw ConfigError("rule list is empty");
    return rules;
}

// -------------------------------------------------------------------------
// Campaign
// -------------------------------------------------------------------------

struct RuleOutcome
{
    BlockRule rule;
    std::optional<RunResult> result;
    std::optional<TraceReport> verification;
    std::optional<RateBound> bound;
    std::optional<FunctionClass> cls;
    std::optional<std::uint64_t> observed_K;
    std::string class_note;
    std::string error;
    std::string error_kind;
    bool L_exact = true;
    std::string trace_path;
    std::string rate_path;
};

struct CampaignReport
{
    BuiltProblem built;
    std::vector<RuleOutcome> outcomes;
    json report;
    bool all_verified = true;
    bool any_numeric_failure = false;
};

inline std::string file_safe(std::string s)
{
    for (auto& ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '-';
    return s;
}

/**
 * Function class used for rate prediction: strongly PL for strongly convex
 * problems with certified parameters, weakly PL for convex ones, else general.
 */
inline FunctionClass infer_class(const ExperimentConfig& cfg, const CompositeProblem& p, const Vector& x0,
                                 const StepModel& model, std::string& note)
{
    const std::string want = cfg.theory_class;
    const double L = model.is_matrix() ? p.L_scalar : model.L;
    if (want == "strongly_pl" || (want == "auto" && p.strong_convexity_F() && *p.strong_convexity_F() > 0.0 &&
                                  p.f.constant_hessian && !p.opt_empirical)) {
        if (cfg.mu) {
            note = "mu from config";
            return FunctionClass::strongly_pl(*cfg.mu);
        }
        note = "mu certified from strong convexity";
        return FunctionClass::strongly_pl(strongly_convex_mu(p, L));
    }
    if (want == "weakly_pl" || (want == "auto" && p.convex() && p.minimizer && !p.opt_empirical)) {
        if (cfg.rho) {
            note = "rho from config";
            return FunctionClass::weakly_pl(*cfg.rho);
        }
        const auto est = weakly_convex_rho(p, x0, L);
        note = "rho from level-set radius " + std::to_string(est.R);
        return FunctionClass::weakly_pl(est.rho);
    }
    if (want != "auto" && want != "general_nonconvex") throw ConfigError("unknown theory.class '" + want + "'");
    note = "no class parameter needed";
    return FunctionClass::general();
}

inline json check_to_json(const TraceCheck& c)
{
    json j{{"pass", c.pass}, {"worst_margin", c.worst_margin}};
    j["worst_k"] = c.worst_k ? json(*c.worst_k) : json(nullptr);
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

inline void write_rate_csv(std::ostream& os, const RunResult& r, const std::optional<RateBound>& rb)
{
    os << "k,fx,dfx,rate\n";
    const auto row = [&](std::uint64_t k, std::optional<double> xi, std::optional<double> lam) {
        os << k << ',' << detail::fmt_opt(xi) << ',' << detail::fmt_opt(lam) << ',';
        if (rb) os << detail::fmt_double(guaranteed_accuracy(*rb, static_cast<double>(k)));
        os << '\n';
    };
    for (const auto& t : r.trace) row(t.k, t.xi, t.lambda);
    row(r.trace.empty() ? 0 : r.trace.back().k + 1, r.final_xi, r.final_lambda);
}

inline void write_gnuplot(const std::string& dir, const std::vector<RuleOutcome>& outs)
{
    std::ostringstream s;
    s << "set datafile separator ','\nset logscale y\nset xlabel 'iteration'\nset ylabel 'F(x^k) - F*'\nplot ";
    bool first = true;
    for (const auto& o : outs) {
        if (o.trace_path.empty()) continue;
        if (!first) s << ", \\\n     ";
        first = false;
        s << "'" << std::filesystem::path(o.trace_path).filename().string() << "' using 1:5 every ::1 with lines title '"
          << o.rule.name() << "'";
    }
    s << "\n";
    write_file((std::filesystem::path(dir) / "plot.gp").string(), s.str());
}

/**
 * Runs every configured rule on the configured problem (concurrently, one
 * task per rule), verifies diagnostic traces and predicts iteration counts.
 * Without a known optimum, a first pass without diagnostics plus a long
 * full-batch reference run fixes an empirical optimum.
 */
inline CampaignReport run_campaign(const ExperimentConfig& cfg, bool write_outputs = true)
{
    CampaignReport rep;
    rep.built = build_problem(cfg);
    CompositeProblem& p = rep.built.problem;
    const auto rules = campaign_rules(cfg, p);

    RunConfig rc;
    rc.max_iters = cfg.max_iters;
    rc.epsilon = cfg.epsilon;
    rc.x0 = rep.built.x0;
    rc.stop_on = cfg.stop_on;
    rc.enumeration_budget = cfg.enumeration_budget;

    if (!p.opt_value && (cfg.diagnostics || cfg.stop_on == StopOn::gap)) {
        RunConfig first = rc;
        first.record_diagnostics = false;
        if (first.stop_on == StopOn::gap) first.stop_on = StopOn::iters;
        double best = reference_optimum(p, cfg.reference_iters, rep.built.x0).first;
        std::vector<std::future<double>> fs;
        for (const auto& r : rules) {
            fs.push_back(std::async(std::launch::async, [&, r] {
                try {
                    return run(p, r, first).final_F;
                } catch (const Error&) {
                    return std::numeric_limits<double>::infinity();
                }
            }));
        }
        for (auto& f : fs) best = std::min(best, f.get());
        p.opt_value = best;
        p.opt_empirical = true;
        rep.built.opt_label = "empirical optimum";
    }

    rc.record_diagnostics = cfg.diagnostics && p.opt_value.has_value();
    std::vector<std::future<RuleOutcome>> futures;
    for (const auto& rule : rules) {
        futures.push_back(std::async(std::launch::async, [&, rule] {
            RuleOutcome o;
            o.rule = rule;
            try {
                bool L_exact = true;
                const StepModel model = step_model_for(p, rule, cfg.enumeration_budget, &L_exact);
                o.L_exact = L_exact;
                o.result = run(p, rule, rc, model);
                if (rc.record_diagnostics) o.verification = verify_trace(*o.result);
                if (p.opt_value) {
                    const auto& tr = o.result->trace;
                    for (const auto& row : tr)
                        if (row.F - *p.opt_value <= cfg.epsilon) {
                            o.observed_K = row.k;
                            break;
                        }
                    if (!o.observed_K && o.result->final_xi && *o.result->final_xi <= cfg.epsilon) {
                        o.observed_K = tr.empty() ? 0 : tr.back().k + 1;
                    }
                    try {
                        const double xi0 = o.result->F0 - *p.opt_value;
                        o.cls = infer_class(cfg, p, rep.built.x0, model, o.class_note);
                        o.bound = predict_K(rule, *o.cls, p, model, xi0, cfg.enumeration_budget);
                    } catch (const NoGuaranteeError& e) {
                        o.class_note = e.what();
                    } catch (const ClassParameterError& e) {
                        o.class_note = e.what();
                    }
                }
            } catch (const NumericError& e) {
                o.error = e.what();
                o.error_kind = "numeric";
            } catch (const Error& e) {
                o.error = e.what();
                o.error_kind = "error";
            }
            return o;
        }));
    }
    for (auto& f : futures) rep.outcomes.push_back(f.get());

    if (write_outputs) std::filesystem::create_directories(cfg.out_dir);
    json runs = json::array();
    for (std::size_t i = 0; i < rep.outcomes.size(); ++i) {
        auto& o = rep.outcomes[i];
        json jr{{"rule", o.rule.name()}, {"spec", o.rule.spec()}};
        if (!o.error.empty()) {
            jr["error"] = o.error;
            jr["error_kind"] = o.error_kind;
            if (o.error_kind == "numeric") rep.any_numeric_failure = true;
            rep.all_verified = false;
            runs.push_back(jr);
            continue;
        }
        const auto& r = *o.result;
        const std::string stem = std::to_string(i) + "_" + file_safe(o.rule.name());
        if (write_outputs) {
            o.trace_path = (std::filesystem::path(cfg.out_dir) / ("trace_" + stem + ".csv")).string();
            std::ofstream tf(o.trace_path);
            write_trace_csv(tf, r, cfg.timing);
            if (rc.record_diagnostics) {
                o.rate_path = (std::filesystem::path(cfg.out_dir) / ("rate_" + stem + ".csv")).string();
                std::ofstream rf(o.rate_path);
                write_rate_csv(rf, r, o.bound);
            }
        }
        std::size_t heuristic_rows = 0;
        for (const auto& t : r.trace) heuristic_rows += t.heuristic ? 1 : 0;
        jr["trace"] = o.trace_path.empty() ? json(nullptr) : json(std::filesystem::path(o.trace_path).filename().string());
        jr["rate_csv"] = o.rate_path.empty() ? json(nullptr) : json(std::filesystem::path(o.rate_path).filename().string());
        jr["step"] = r.model.is_matrix() ? json{{"kind", "matrix"}} : json{{"kind", "scalar"}, {"L", r.model.L}, {"L_exact", o.L_exact}};
        jr["iterations"] = r.trace.size();
        jr["termination"] = termination_name(r.termination);
        jr["F0"] = r.F0;
        jr["final_F"] = r.final_F;
        jr["final_xi"] = r.final_xi ? json(*r.final_xi) : json(nullptr);
        jr["final_lambda"] = r.final_lambda ? json(*r.final_lambda) : json(nullptr);
        jr["cumulative_decrease"] = r.F0 - r.final_F;
        jr["heuristic_rows"] = heuristic_rows;
        jr["observed_K"] = o.observed_K ? json(*o.observed_K) : json(nullptr);
        if (o.cls) {
            jr["class"] = class_name(o.cls->kind);
            jr["class_params"] = json{{"mu", o.cls->mu}, {"rho", o.cls->rho}};
        } else {
            jr["class"] = nullptr;
        }
        jr["class_note"] = o.class_note;
        if (o.bound) {
            jr["constant"] = json{{"label", o.bound->constant.label}, {"value", o.bound->constant.value}, {"exact", o.bound->constant.exact}};
            const double kr = o.bound->K_real(cfg.epsilon);
            jr["predicted_K"] = kr < 1.8e19 ? json(o.bound->K(cfg.epsilon)) : json(kr);
        } else {
            jr["predicted_K"] = nullptr;
        }
        if (o.verification) {
            json v = json::object();
            for (const auto& c : o.verification->checks) v[c.name] = check_to_json(c);
            v["all_pass"] = o.verification->all_pass();
            jr["verification"] = v;
            if (!o.verification->all_pass()) rep.all_verified = false;
        } else {
            jr["verification"] = nullptr;
        }
        runs.push_back(jr);
    }

    json comparisons = json::object();
    const auto decrease_of = [&](RuleKind k) -> std::optional<double> {
        for (const auto& o : rep.outcomes)
            if (o.rule.kind == k && o.result) return o.result->F0 - o.result->final_F;
        return std::nullopt;
    };
    if (auto g = decrease_of(RuleKind::greedy_coord), u = decrease_of(RuleKind::uniform_coord); g && u) {
        comparisons["greedy_ge_uniform"] = *g >= *u;
    }
    if (auto g = decrease_of(RuleKind::greedy_minibatch), u = decrease_of(RuleKind::tau_nice); g && u) {
        comparisons["greedymb_ge_nice"] = *g >= *u;
    }

    json prob = rep.built.description;
    prob["dim"] = p.dim();
    prob["smooth"] = p.smooth();
    prob["opt_value"] = p.opt_value ? json(*p.opt_value) : json(nullptr);
    prob["opt_label"] = rep.built.opt_label;
    rep.report = json{{"seed", cfg.seed},
                      {"problem", prob},
                      {"run", {{"max_iters", cfg.max_iters}, {"epsilon", cfg.epsilon}, {"diagnostics", rc.record_diagnostics},
                               {"stop_on", detail::stop_name(cfg.stop_on)}}},
                      {"runs", runs},
                      {"comparisons", comparisons},
                      {"all_verified", rep.all_verified}};
    if (write_outputs) {
        write_file((std::filesystem::path(cfg.out_dir) / "report.json").string(), rep.report.dump(2) + "\n");
        if (cfg.gnuplot) write_gnuplot(cfg.out_dir, rep.outcomes);
    }
    return rep;
}

// -------------------------------------------------------------------------
// Rate table
// -------------------------------------------------------------------------

struct RateRow
{
    std::string rule;
    std::string cls;
    std::string label;
    double constant = 0.0;
    std::vector<double> K;
    std::string note;
};

inline std::vector<RateRow> rate_table(const ExperimentConfig& cfg, const std::vector<double>& eps_list)
{
    BuiltProblem b = build_problem(cfg);
    CompositeProblem& p = b.problem;
    if (!p.opt_value) {
        p.opt_value = reference_optimum(p, cfg.reference_iters, b.x0).first;
        p.opt_empirical = true;
    }
    const double xi0 = p.F(b.x0) - *p.opt_value;
    std::vector<RateRow> rows;
    for (const auto& rule : campaign_rules(cfg, p)) {
        RateRow row;
        row.rule = rule.name();
        try {
            const StepModel model = step_model_for(p, rule, cfg.enumeration_budget);
            std::string note;
            const auto cls = infer_class(cfg, p, b.x0, model, note);
            const auto rb = predict_K(rule, cls, p, model, xi0, cfg.enumeration_budget);
            row.cls = class_name(cls.kind);
            row.label = rb.constant.label;
            row.constant = rb.constant.value;
            for (double e : eps_list) row.K.push_back(rb.K_real(e) > 0 ? std::ceil(rb.K_real(e)) : 0.0);
            row.note = note;
        } catch (const Error& e) {
            row.note = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// -------------------------------------------------------------------------
// One-dimensional slices
// -------------------------------------------------------------------------

/**
 * Direction spec: "random", "e:<i>" (1-based axis), "cos" (the direction
 * (A^T A)^{-1} c along which the cosine term bends lsq_cos), or a
 * comma-separated list of numbers.
 */
inline Vector parse_direction(const std::string& spec, const CompositeProblem& p, std::uint64_t seed)
{
    const Index n = p.dim();
    Vector d;
    if (spec == "random") {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> N(0.0, 1.0);
        d.resize(n);
        for (Index i = 0; i < n; ++i) d[i] = N(rng);
    } else if (spec.rfind("e:", 0) == 0) {
        const Index i = std::stoll(spec.substr(2));
        if (i < 1 || i > n) throw ConfigError("direction axis out of range");
        d = Vector::Zero(n);
        d[i - 1] = 1.0;
    } else if (spec == "cos") {
        if (!p.f.lsq_cos) throw ConfigError("direction 'cos' needs an lsq_cos objective");
        const auto& D = *p.f.lsq_cos;
        Eigen::LDLT<Matrix> ldlt(D.A.transpose() * D.A);
        d = ldlt.solve(D.c);
    } else {
        std::vector<double> vals;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (static_cast<Index>(vals.size()) != n) throw ConfigError("direction has the wrong length");
        d = Eigen::Map<Vector>(vals.data(), n);
    }
    if (!(d.norm() > 0.0) || !d.allFinite()) throw ConfigError("slice direction must be non-zero");
    return d / d.norm();
}

struct SlicePoint
{
    double t;
    double F;
};

inline std::vector<SlicePoint> slice(const CompositeProblem& p, const Vector& ref, const Vector& d, double radius,
                                     std::size_t points)
{
    if (!(d.norm() > 0.0)) throw ConfigError("slice direction must be non-zero");
    if (points < 2) throw ConfigError("slice needs at least two points");
    if (!(radius > 0.0)) throw ConfigError("slice radius must be positive");
    std::vector<SlicePoint> out;
    out.reserve(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double t = -radius + 2.0 * radius * static_cast<double>(j) / static_cast<double>(points - 1);
        out.push_back({t, p.F(ref + t * d)});
    }
    return out;
}

// Known minimizer when available, else the end point of a reference run.
inline Vector slice_reference(const BuiltProblem& b, std::uint64_t reference_iters)
{
    if (b.problem.minimizer) return *b.problem.minimizer;
    return reference_optimum(b.problem, reference_iters, b.x0).second;
}

} // namespace bcd
