#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <bcd/errors.hpp>
#include <bcd/linalg.hpp>
#include <bcd/objectives.hpp>
#include <bcd/prox.hpp>

namespace bcd {

enum class RuleKind { full_batch, uniform_coord, importance_coord, greedy_coord, cyclic_coord, tau_nice, greedy_minibatch };

struct BlockRule
{
    RuleKind kind = RuleKind::full_batch;
    Index tau = 1;
    std::uint64_t seed = 0;

    bool randomized() const noexcept
    {
        return kind == RuleKind::uniform_coord || kind == RuleKind::importance_coord || kind == RuleKind::tau_nice;
    }

    // Largest block the rule can ever return in dimension n.
    Index max_block_size(Index n) const noexcept
    {
        switch (kind) {
            case RuleKind::full_batch: return n;
            case RuleKind::tau_nice:
            case RuleKind::greedy_minibatch: return tau;
            default: return 1;
        }
    }

    std::string name() const
    {
        switch (kind) {
            case RuleKind::full_batch: return "full";
            case RuleKind::uniform_coord: return "uniform";
            case RuleKind::importance_coord: return "importance";
            case RuleKind::greedy_coord: return "greedy";
            case RuleKind::cyclic_coord: return "cyclic";
            case RuleKind::tau_nice: return "nice:" + std::to_string(tau);
            case RuleKind::greedy_minibatch: return "greedymb:" + std::to_string(tau);
        }
        return "?";
    }

    // Canonical text form accepted back by parse_rule.
    std::string spec() const { return randomized() ? name() + ",seed=" + std::to_string(seed) : name(); }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_unsigned(std::string_view s, const std::string& what)
{
    T v{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) throw ConfigError("invalid " + what + ": '" + std::string(s) + "'");
    return v;
}

} // namespace detail

/**
 * Grammar: full | uniform | importance | greedy | cyclic | nice:<tau> | greedymb:<tau>,
 * optionally followed by ",seed=<u64>". `default_seed` applies when none is given.
 */
inline BlockRule parse_rule(std::string_view text, std::uint64_t default_seed = 0)
{
    BlockRule r;
    r.seed = default_seed;
    std::string_view head = detail::trim(text);
    if (const auto comma = head.find(','); comma != std::string_view::npos) {
        std::string_view tail = detail::trim(head.substr(comma + 1));
        head = detail::trim(head.substr(0, comma));
        if (tail.substr(0, 5) != "seed=") throw ConfigError("unknown rule option '" + std::string(tail) + "'");
        r.seed = detail::parse_unsigned<std::uint64_t>(tail.substr(5), "seed");
    }
    std::string_view base = head;
    std::optional<std::string_view> arg;
    if (const auto colon = head.find(':'); colon != std::string_view::npos) {
        base = head.substr(0, colon);
        arg = head.substr(colon + 1);
    }
    if (base == "full") r.kind = RuleKind::full_batch;
    else if (base == "uniform") r.kind = RuleKind::uniform_coord;
    else if (base == "importance") r.kind = RuleKind::importance_coord;
    else if (base == "greedy") r.kind = RuleKind::greedy_coord;
    else if (base == "cyclic") r.kind = RuleKind::cyclic_coord;
    else if (base == "nice") r.kind = RuleKind::tau_nice;
    else if (base == "greedymb") r.kind = RuleKind::greedy_minibatch;
    else throw ConfigError("unknown block rule '" + std::string(text) + "'");

    const bool takes_tau = r.kind == RuleKind::tau_nice || r.kind == RuleKind::greedy_minibatch;
    if (takes_tau != arg.has_value()) {
        throw ConfigError(takes_tau ? "rule '" + std::string(base) + "' needs a block size, e.g. nice:3"
                                    : "rule '" + std::string(base) + "' takes no block size");
    }
    if (arg) {
        r.tau = detail::parse_unsigned<Index>(*arg, "block size");
        if (r.tau < 1) throw ConfigError("block size must be at least 1");
    }
    return r;
}

inline void validate_rule(const BlockRule& rule, const CompositeProblem& p, const StepModel& model)
{
    if ((rule.kind == RuleKind::tau_nice || rule.kind == RuleKind::greedy_minibatch) &&
        (rule.tau < 1 || rule.tau > p.dim())) {
        throw ConfigError("block size " + std::to_string(rule.tau) + " outside [1, " + std::to_string(p.dim()) + "]");
    }
    if (rule.kind == RuleKind::importance_coord && !model.is_matrix()) {
        throw ConfigError("importance sampling is only offered for smooth problems with the matrix step");
    }
}

struct SelectionContext
{
    const Vector& x;
    const Vector& grad;
    const Vector& lambda;
    Index k;
};

struct Selection
{
    CoordSet S;
    bool heuristic = false;
};

namespace detail {

// Index of the largest entry; ties go to the lowest index.
inline Index argmax_lowest(const Vector& v)
{
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// Top-tau entries by value, ties toward lower indices.
inline CoordSet top_tau(const Vector& v, Index tau)
{
    std::vector<Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return v[a] > v[b]; });
    idx.resize(static_cast<std::size_t>(tau));
    return CoordSet::from_unsorted(std::move(idx), v.size());
}

// argmax over |S| = tau of g_S^T M_S^{-1} g_S by full enumeration.
inline CoordSet greedy_minibatch_exact(const Matrix& M, const Vector& g, Index tau, std::uint64_t budget)
{
    const Index n = g.size();
    std::vector<Index> best(static_cast<std::size_t>(tau));
    double best_val = -1.0;
    for_each_subset(
        n, tau,
        [&](std::span<const Index> S) {
            const double v = quad_inverse(M, S, g);
            if (v > best_val) {
                best_val = v;
                std::copy(S.begin(), S.end(), best.begin());
            }
        },
        budget);
    return CoordSet(std::move(best), n);
}

// Forward selection: add the coordinate with the largest gain in
// g_S^T M_S^{-1} g_S, using a bordered Cholesky factor of M_S.
inline CoordSet greedy_minibatch_forward(const Matrix& M, const Vector& g, Index tau)
{
    const Index n = g.size();
    std::vector<Index> chosen;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    Matrix Lc = Matrix::Zero(tau, tau);
    Vector z = Vector::Zero(tau);
    for (Index t = 0; t < tau; ++t) {
        Index best = -1;
        double best_gain = -1.0;
        Vector best_l;
        double best_schur = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            Vector l(t);
            for (Index r = 0; r < t; ++r) l[r] = M(chosen[static_cast<std::size_t>(r)], j);
            if (t > 0) Lc.topLeftCorner(t, t).triangularView<Eigen::Lower>().solveInPlace(l);
            const double schur = M(j, j) - l.squaredNorm();
            if (!(schur > 0.0)) continue;
            const double resid = g[j] - (t > 0 ? l.dot(z.head(t)) : 0.0);
            const double gain = resid * resid / schur;
            if (gain > best_gain) {
                best_gain = gain;
                best = j;
                best_l = l;
                best_schur = schur;
            }
        }
        if (best < 0) throw NotPositiveDefiniteError("greedy minibatch: block matrix lost definiteness");
        const double d = std::sqrt(best_schur);
        if (t > 0) Lc.block(t, 0, 1, t) = best_l.transpose();
        Lc(t, t) = d;
        z[t] = (g[best] - (t > 0 ? best_l.dot(z.head(t)) : 0.0)) / d;
        chosen.push_back(best);
        used[static_cast<std::size_t>(best)] = 1;
    }
    return CoordSet::from_unsorted(std::move(chosen), n);
}

} // namespace detail

/**
 * Stateful block selector. Owns its RNG stream (seeded from the rule) and,
 * for the cyclic rule, its sweep position through the iteration counter.
 */
class Selector
{
public:
    Selector(BlockRule rule, const CompositeProblem& p, StepModel model,
             std::uint64_t budget = default_enumeration_budget) :
        rule_(rule), p_(&p), model_(model), rng_(rule.seed), budget_(budget)
    {
        validate_rule(rule_, p, model_);
        const Index n = p.dim();
        if (rule_.kind == RuleKind::importance_coord) {
            const Vector d = p.f.smoothness.diag();
            cumulative_.resize(static_cast<std::size_t>(n));
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) cumulative_[static_cast<std::size_t>(i)] = (acc += d[i]);
            for (auto& c : cumulative_) c /= acc;
            cumulative_.back() = 1.0;
        }
        if (rule_.kind == RuleKind::greedy_minibatch && model_.is_matrix()) {
            const auto count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rule_.tau));
            exact_mb_ = count <= budget_;
        }
        scratch_.resize(static_cast<std::size_t>(n));
    }

    const BlockRule& rule() const noexcept { return rule_; }
    const StepModel& model() const noexcept { return model_; }
    // False when greedy-minibatch selection falls back to forward selection.
    bool exact() const noexcept { return exact_mb_; }

    Selection select(const SelectionContext& ctx)
    {
        const Index n = p_->dim();
        switch (rule_.kind) {
            case RuleKind::full_batch: return {CoordSet::full(n)};
            case RuleKind::uniform_coord: {
                std::uniform_int_distribution<Index> U(0, n - 1);
                return {CoordSet::single(U(rng_), n)};
            }
            case RuleKind::importance_coord: {
                std::uniform_real_distribution<double> U(0.0, 1.0);
                const double u = U(rng_);
                const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
                const auto i = std::min<Index>(static_cast<Index>(it - cumulative_.begin()), n - 1);
                return {CoordSet::single(i, n)};
            }
            case RuleKind::greedy_coord: {
                if (model_.is_matrix()) {
                    const Vector score = ctx.grad.array().square() / p_->f.smoothness.diag().array();
                    return {CoordSet::single(detail::argmax_lowest(score), n)};
                }
                return {CoordSet::single(detail::argmax_lowest(ctx.lambda), n)};
            }
            case RuleKind::cyclic_coord: return {CoordSet::single(ctx.k % n, n)};
            case RuleKind::tau_nice: return {draw_nice()};
            case RuleKind::greedy_minibatch: {
                if (!model_.is_matrix()) return {detail::top_tau(ctx.lambda, rule_.tau)};
                if (exact_mb_) {
                    return {detail::greedy_minibatch_exact(p_->f.smoothness.dense(), ctx.grad, rule_.tau, budget_)};
                }
                return {detail::greedy_minibatch_forward(p_->f.smoothness.dense(), ctx.grad, rule_.tau), true};
            }
        }
        throw ConfigError("unhandled rule");
    }

private:
    CoordSet draw_nice()
    {
        const Index n = p_->dim();
        std::iota(scratch_.begin(), scratch_.end(), Index{0});
        for (Index j = 0; j < rule_.tau; ++j) {
            std::uniform_int_distribution<Index> U(j, n - 1);
            std::swap(scratch_[static_cast<std::size_t>(j)], scratch_[static_cast<std::size_t>(U(rng_))]);
        }
        return CoordSet::from_unsorted({scratch_.begin(), scratch_.begin() + rule_.tau}, n);
    }

    BlockRule rule_;
    const CompositeProblem* p_;
    StepModel model_;
    std::mt19937_64 rng_;
    std::uint64_t budget_;
    std::vector<double> cumulative_;
    std::vector<Index> scratch_;
    bool exact_mb_ = true;
};

// theta(S, x) from precomputed gradient and certificate; cheap for repeated S.
inline double theta_of(const CompositeProblem& p, const Vector& grad, const Certificate& cert,
                       std::span<const Index> S, const StepModel& model)
{
    if (!(cert.lambda_total > 0.0)) return 0.0;
    if (model.is_matrix()) {
        const double q = detail::quad_inverse(p.f.smoothness.dense(), S, grad);
        if (q < 0.0) throw NotPositiveDefiniteError("principal submatrix is not positive definite");
        return 0.5 * q / cert.lambda_total;
    }
    double s = 0.0;
    for (const Index i : S) s += cert.lambda_per_coord[i];
    return s / (model.L * cert.lambda_total);
}

struct ExpectedTheta
{
    double value = 0.0;
    double stderr_ = 0.0;
    bool exact = true;
    std::uint64_t samples = 0;
};

/**
 * E[theta(S, x) | x] for the rule's selection distribution at x. Deterministic
 * rules are point masses. tau-nice beyond the enumeration budget is estimated
 * by seeded Monte Carlo with its standard error.
 */
inline ExpectedTheta exact_expected_theta(const BlockRule& rule, const CompositeProblem& p, const Vector& x,
                                          const StepModel& model,
                                          std::uint64_t budget = default_enumeration_budget,
                                          std::uint64_t mc_samples = 20000)
{
    validate_rule(rule, p, model);
    const Index n = p.dim();
    const Vector grad = p.f.gradient(x);
    const auto cert = certificate(p, x, grad, model);
    ExpectedTheta out;
    switch (rule.kind) {
        case RuleKind::full_batch: {
            const auto S = CoordSet::full(n);
            out.value = theta_of(p, grad, cert, S.indices(), model);
            return out;
        }
        case RuleKind::uniform_coord:
        case RuleKind::importance_coord: {
            Vector prob = Vector::Constant(n, 1.0 / static_cast<double>(n));
            if (rule.kind == RuleKind::importance_coord) {
                prob = p.f.smoothness.diag();
                prob /= prob.sum();
            }
            for (Index i = 0; i < n; ++i) {
                const Index one[1] = {i};
                out.value += prob[i] * theta_of(p, grad, cert, one, model);
            }
            return out;
        }
        case RuleKind::tau_nice: {
            const auto count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rule.tau));
            if (count <= budget) {
                double s = 0.0;
                for_each_subset(n, rule.tau, [&](std::span<const Index> S) { s += theta_of(p, grad, cert, S, model); },
                                budget);
                out.value = s / static_cast<double>(count);
                out.samples = count;
                return out;
            }
            BlockRule mc = rule;
            Selector sel(mc, p, model, budget);
            const SelectionContext ctx{x, grad, cert.lambda_per_coord, 0};
            double s = 0.0;
            double s2 = 0.0;
            for (std::uint64_t t = 0; t < mc_samples; ++t) {
                const double v = theta_of(p, grad, cert, sel.select(ctx).S.indices(), model);
                s += v;
                s2 += v * v;
            }
            const double N = static_cast<double>(mc_samples);
            out.value = s / N;
            out.stderr_ = std::sqrt(std::max(0.0, s2 / N - out.value * out.value) / N);
            out.exact = false;
            out.samples = mc_samples;
            return out;
        }
        case RuleKind::greedy_coord:
        case RuleKind::greedy_minibatch: {
            Selector sel(rule, p, model, budget);
            const auto chosen = sel.select({x, grad, cert.lambda_per_coord, 0});
            out.value = theta_of(p, grad, cert, chosen.S.indices(), model);
            out.exact = !chosen.heuristic;
            return out;
        }
        case RuleKind::cyclic_coord:
            throw ConfigError("cyclic selection depends on the iteration counter; no expectation at a point");
    }
    return out;
}

} // namespace bcd
