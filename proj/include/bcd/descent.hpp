#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <bcd/errors.hpp>
#include <bcd/linalg.hpp>
#include <bcd/objectives.hpp>
#include <bcd/prox.hpp>
#include <bcd/rates.hpp>
#include <bcd/selection.hpp>

namespace bcd {

enum class StopOn { iters, gap, certificate };

struct RunConfig
{
    std::uint64_t max_iters = 1000;
    double epsilon = 1e-6;
    std::optional<Vector> x0;
    bool record_diagnostics = false;
    StopOn stop_on = StopOn::iters;
    // keep every iterate x^k (memory heavy; for recursion checks on small runs)
    bool keep_iterates = false;
    std::uint64_t enumeration_budget = default_enumeration_budget;

    void validate(const CompositeProblem& p) const
    {
        if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (x0 && x0->size() != p.dim()) throw ConfigError("x0 has the wrong dimension");
        if (stop_on == StopOn::gap && !p.opt_value) throw ConfigError("stopping on the gap needs a reference optimum");
    }
};

struct IterationRecord
{
    std::uint64_t k = 0;
    CoordSet S = CoordSet::single(0, 1);
    double F = 0.0;
    std::optional<double> xi;
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<double> theta;
    double decrease = 0.0;
    double step_norm = 0.0;
    std::int64_t ns = 0;
    bool heuristic = false;
};

enum class Termination { reached_gap, reached_certificate, exhausted_iters, at_optimum };

inline std::string termination_name(Termination t)
{
    switch (t) {
        case Termination::reached_gap: return "reached_gap";
        case Termination::reached_certificate: return "reached_certificate";
        case Termination::exhausted_iters: return "exhausted_iters";
        case Termination::at_optimum: return "at_optimum";
    }
    return "?";
}

struct RunResult
{
    std::string rule;
    Vector x;
    std::vector<IterationRecord> trace;
    double F0 = 0.0;
    double final_F = 0.0;
    std::optional<double> final_xi;
    std::optional<double> final_lambda;
    Termination termination = Termination::exhausted_iters;
    StepModel model;
    std::vector<Vector> iterates;
};

inline Vector default_x0(const CompositeProblem& p) { return Vector::Zero(p.dim()); }

/**
 * Runs x^{k+1} = x^k + (u^k)_[S_k] with u^k the exact minimizer of the
 * block model, for at most cfg.max_iters iterations.
 */
inline RunResult run(const CompositeProblem& p, const BlockRule& rule, const RunConfig& cfg,
                     std::optional<StepModel> model_override = std::nullopt)
{
    cfg.validate(p);
    const Index n = p.dim();
    const StepModel model = model_override.value_or(step_model_for(p, rule, cfg.enumeration_budget));
    Selector sel(rule, p, model, cfg.enumeration_budget);

    RunResult res;
    res.rule = rule.name();
    res.model = model;
    Vector x = cfg.x0.value_or(default_x0(p));
    double Fx = p.F(x);
    if (!std::isfinite(Fx)) throw ConfigError("x0 is outside the domain of F");
    res.F0 = Fx;

    std::optional<Eigen::LLT<Matrix>> full_factor;
    // diagonal M is solved by exact division instead
    if (rule.kind == RuleKind::full_batch && model.is_matrix() && !p.f.smoothness.is_diagonal()) {
        full_factor.emplace(p.f.smoothness.dense());
        if (full_factor->info() != Eigen::Success) throw NotPositiveDefiniteError("smoothness matrix is not positive definite");
    }

    const bool have_opt = p.opt_value.has_value();
    const double tol = at_optimum_tolerance(res.F0);
    const bool need_lambda = cfg.record_diagnostics || cfg.stop_on == StopOn::certificate ||
                             (!model.is_matrix() && (rule.kind == RuleKind::greedy_coord ||
                                                     rule.kind == RuleKind::greedy_minibatch));
    Vector grad = p.f.gradient(x);
    const Vector no_lambda = Vector::Zero(n);
    Certificate cert;
    res.trace.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(cfg.max_iters, 1u << 20)));
    if (cfg.keep_iterates) res.iterates.push_back(x);

    res.termination = Termination::exhausted_iters;
    for (std::uint64_t k = 0; k < cfg.max_iters; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        if (!grad.allFinite()) throw NumericError("non-finite gradient at iteration " + std::to_string(k), x);
        if (need_lambda) cert = certificate(p, x, grad, model);
        std::optional<double> xi;
        if (have_opt) xi = Fx - *p.opt_value;

        if (cfg.stop_on == StopOn::gap && *xi <= cfg.epsilon) {
            res.termination = Termination::reached_gap;
            break;
        }
        if (cfg.stop_on == StopOn::certificate && cert.lambda_total < cfg.epsilon) {
            res.termination = Termination::reached_certificate;
            break;
        }
        if (cfg.record_diagnostics && xi && *xi <= tol) {
            res.termination = Termination::at_optimum;
            break;
        }

        const auto chosen = sel.select({x, grad, need_lambda ? cert.lambda_per_coord : no_lambda, static_cast<Index>(k)});
        const auto step = block_step(p, x, grad, chosen.S, model, full_factor ? &*full_factor : nullptr);
        Vector x_next = x;
        for (Index j = 0; j < chosen.S.size(); ++j) x_next[chosen.S[j]] += step.u_S[j];
        const double F_next = p.F(x_next);
        if (!std::isfinite(F_next)) throw NumericError("non-finite objective at iteration " + std::to_string(k + 1), x_next);
        if (F_next > res.F0 + 1e-6) {
            throw NumericError("objective rose above F(x0) + 1e-6 at iteration " + std::to_string(k + 1), x_next);
        }

        IterationRecord rec;
        rec.k = k;
        rec.S = chosen.S;
        rec.F = Fx;
        rec.heuristic = chosen.heuristic;
        rec.decrease = step.decrease;
        rec.step_norm = step.u_S.norm();
        if (cfg.record_diagnostics) {
            rec.xi = xi;
            rec.lambda = cert.lambda_total;
            rec.theta = proportion(step.decrease, cert.lambda_total);
            if (xi) rec.mu = forcing(cert.lambda_total, *xi, tol);
        }

        x = std::move(x_next);
        Fx = F_next;
        grad = p.f.gradient(x);
        if (cfg.keep_iterates) res.iterates.push_back(x);
        rec.ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
        res.trace.push_back(std::move(rec));
    }

    res.x = x;
    res.final_F = Fx;
    if (have_opt) res.final_xi = Fx - *p.opt_value;
    if (grad.allFinite()) res.final_lambda = certificate(p, x, grad, model).lambda_total;
    // a run that stopped on the last allowed iteration still gets its stop reason
    if (res.termination == Termination::exhausted_iters) {
        if (cfg.stop_on == StopOn::gap && res.final_xi && *res.final_xi <= cfg.epsilon) {
            res.termination = Termination::reached_gap;
        } else if (cfg.stop_on == StopOn::certificate && res.final_lambda && *res.final_lambda < cfg.epsilon) {
            res.termination = Termination::reached_certificate;
        }
    }
    return res;
}

// -------------------------------------------------------------------------
// Trace verification
// -------------------------------------------------------------------------

struct TraceCheck
{
    std::string name;
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::optional<std::uint64_t> worst_k;
    std::string detail;
};

struct TraceReport
{
    std::vector<TraceCheck> checks;

    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    const TraceCheck& get(const std::string& name) const
    {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw ConfigError("no check named " + name);
    }
};

inline constexpr double one_step_rel_tol = 1e-9;

/**
 * One-step bound xi_{k+1} <= (1 - theta_k mu_k) xi_k (1 + 1e-9), monotonicity
 * F_{k+1} <= F_k + 1e-12 (1 + |F_k|), and the K-step product bound.
 * Margins are reported relative to xi_k (resp. 1 + |F_k|); negative is a failure.
 */
inline TraceReport verify_trace(const RunResult& r)
{
    TraceReport rep;
    TraceCheck one{"one_step"};
    TraceCheck mono{"monotone"};
    TraceCheck prod{"k_step_product"};
    const auto& tr = r.trace;

    for (std::size_t j = 0; j < tr.size(); ++j) {
        const double F_next = j + 1 < tr.size() ? tr[j + 1].F : r.final_F;
        const double slack = 1e-12 * (1.0 + std::abs(tr[j].F));
        const double m = (tr[j].F + slack - F_next) / (1.0 + std::abs(tr[j].F));
        if (m < mono.worst_margin) {
            mono.worst_margin = m;
            mono.worst_k = tr[j].k;
        }
        if (m < 0.0 && mono.pass) {
            mono.pass = false;
            mono.detail = "F increased at k=" + std::to_string(tr[j].k);
        }
    }

    bool have_diag = !tr.empty();
    for (const auto& row : tr)
        if (!row.xi || !row.mu || !row.theta) have_diag = false;
    if (!tr.empty() && (!have_diag || !r.final_xi)) {
        throw UnverifiableError("trace lacks diagnostics (xi, mu, theta) or a reference optimum");
    }

    double log_prod = 0.0;
    for (std::size_t j = 0; j < tr.size(); ++j) {
        const double xi = *tr[j].xi;
        const double xi_next = j + 1 < tr.size() ? *tr[j + 1].xi : *r.final_xi;
        const double factor = 1.0 - *tr[j].theta * *tr[j].mu;
        const double rhs = factor * xi * (1.0 + one_step_rel_tol);
        const double m = (rhs - xi_next) / xi;
        if (m < one.worst_margin) {
            one.worst_margin = m;
            one.worst_k = tr[j].k;
        }
        if (m < 0.0 && one.pass) {
            one.pass = false;
            one.detail = "one-step bound violated at k=" + std::to_string(tr[j].k);
        }
        if (*tr[j].theta * *tr[j].mu > 1.0 + one_step_rel_tol && one.pass) {
            one.pass = false;
            one.detail = "theta*mu exceeds 1 at k=" + std::to_string(tr[j].k);
        }
        log_prod += std::log(std::max(factor, 0.0)) + std::log1p(one_step_rel_tol);
    }
    if (!tr.empty()) {
        const double xi0 = *tr.front().xi;
        const double bound = std::exp(log_prod) * xi0;
        prod.worst_margin = (bound - *r.final_xi) / xi0;
        prod.worst_k = tr.back().k + 1;
        prod.pass = prod.worst_margin >= 0.0;
        if (!prod.pass) prod.detail = "xi(x^K) exceeds the product bound";
    }
    rep.checks = {one, mono, prod};
    return rep;
}

struct SequenceCheck
{
    bool pass = true;
    std::optional<std::size_t> precondition_violated_at;
    std::optional<std::size_t> bound_violated_at;
    double worst_margin = std::numeric_limits<double>::infinity();
};

/**
 * For positive alpha^t, beta^t with alpha^{t+1} <= (1 - alpha^t beta^t) alpha^t,
 * checks alpha^k <= alpha^0 / (1 + alpha^0 sum_{t<k} beta^t) for every k.
 * alphas has one more entry than betas (or the same count, ignoring the last beta).
 */
inline SequenceCheck sequence_bound_check(const std::vector<double>& alphas, const std::vector<double>& betas,
                                          double rel_tol = 1e-12)
{
    SequenceCheck out;
    if (alphas.empty()) return out;
    const std::size_t steps = std::min(alphas.size() - 1, betas.size());
    for (std::size_t t = 0; t <= steps; ++t) {
        if (!(alphas[t] > 0.0) || (t < steps && !(betas[t] > 0.0))) {
            out.pass = false;
            out.precondition_violated_at = t;
            return out;
        }
    }
    for (std::size_t t = 0; t < steps; ++t) {
        if (alphas[t + 1] > (1.0 - alphas[t] * betas[t]) * alphas[t] * (1.0 + rel_tol)) {
            out.pass = false;
            out.precondition_violated_at = t;
            return out;
        }
    }
    const double a0 = alphas[0];
    double sum = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double bound = a0 / (1.0 + a0 * sum);
        const double m = (bound * (1.0 + rel_tol) - alphas[k]) / a0;
        out.worst_margin = std::min(out.worst_margin, m);
        if (m < 0.0 && out.pass) {
            out.pass = false;
            out.bound_violated_at = k;
        }
        if (k < steps) sum += betas[k];
    }
    return out;
}

// -------------------------------------------------------------------------
// CSV trace output
// -------------------------------------------------------------------------

inline constexpr const char* trace_csv_header = "k,rule,block,F,xi,lambda,mu,theta,step_norm,ns";

namespace detail {

inline std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); }

} // namespace detail

inline void write_trace_csv(std::ostream& os, const RunResult& r, bool with_timing = true)
{
    os << trace_csv_header << '\n';
    for (const auto& row : r.trace) {
        os << row.k << ',' << r.rule << ',' << row.S.to_string() << ',' << detail::fmt_double(row.F) << ','
           << detail::fmt_opt(row.xi) << ',' << detail::fmt_opt(row.lambda) << ',' << detail::fmt_opt(row.mu) << ','
           << detail::fmt_opt(row.theta) << ',' << detail::fmt_double(row.step_norm) << ','
           << (with_timing ? std::to_string(row.ns) : std::string("0")) << '\n';
    }
}

/**
 * Reference optimum by a long full-batch run; for problems without a known
 * optimum. Returns the lowest F seen and its point.
 */
inline std::pair<double, Vector> reference_optimum(const CompositeProblem& p, std::uint64_t max_iters,
                                                   std::optional<Vector> x0 = std::nullopt, double lambda_tol = 0.0)
{
    CompositeProblem q = p;
    q.opt_value.reset();
    RunConfig cfg;
    cfg.max_iters = max_iters;
    cfg.x0 = std::move(x0);
    if (lambda_tol > 0.0) {
        cfg.stop_on = StopOn::certificate;
        cfg.epsilon = lambda_tol;
    }
    BlockRule full;
    const auto r = run(q, full, cfg);
    return {r.final_F, r.x};
}

} // namespace bcd
