#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include <bcd/errors.hpp>
#include <bcd/linalg.hpp>
#include <bcd/objectives.hpp>
#include <bcd/prox.hpp>
#include <bcd/selection.hpp>

namespace bcd {

struct LTau
{
    double value;
    // false when enumeration was over budget and the trace bound was used
    bool exact;
};

// max over |S| = tau of lambda_max(M_S).
inline LTau L_tau(const SymMatrix& M, Index tau, std::uint64_t budget = default_enumeration_budget)
{
    const Index n = M.order();
    if (tau < 1 || tau > n) throw InvalidSetError("L_tau: block size outside [1, n]");
    if (tau == 1) return {M.diag().maxCoeff(), true};
    if (tau == n) return {eig_extremes(M).lambda_max, true};
    const auto count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(tau));
    if (count > budget) {
        Vector d = M.diag();
        std::sort(d.data(), d.data() + d.size(), std::greater<>());
        const double trace_bound = d.head(tau).sum();
        return {std::min(trace_bound, eig_extremes(M).lambda_max), false};
    }
    double best = 0.0;
    const Matrix& A = M.dense();
    const auto visit = [&](std::span<const Index> S) {
        if (tau == 2) {
            const double a = A(S[0], S[0]);
            const double d = A(S[1], S[1]);
            const double b = A(S[0], S[1]);
            const double v = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + b * b);
            best = std::max(best, v);
            return;
        }
        const Matrix sub = principal_submatrix(A, S);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
        best = std::max(best, es.eigenvalues()[tau - 1]);
    };
    for_each_subset(n, tau, visit, budget);
    return {best, true};
}

struct ExpectedInverse
{
    SymMatrix value;
    bool exact;
    std::uint64_t samples;
};

// E[M_[S]^{-1}] under tau-nice sampling; M_S^{-1} is placed on rows/cols S.
inline ExpectedInverse expected_inverse_matrix(const SymMatrix& M, Index tau,
                                               std::uint64_t budget = default_enumeration_budget,
                                               std::uint64_t mc_samples = 20000, std::uint64_t seed = 0)
{
    const Index n = M.order();
    if (tau < 1 || tau > n) throw InvalidSetError("expected inverse: block size outside [1, n]");
    Matrix acc = Matrix::Zero(n, n);
    const auto add = [&](std::span<const Index> S) {
        const Matrix sub = principal_submatrix(M.dense(), S);
        Eigen::LLT<Matrix> llt(sub);
        if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("principal submatrix is not positive definite");
        const Matrix inv = llt.solve(Matrix::Identity(sub.rows(), sub.cols()));
        for (std::size_t c = 0; c < S.size(); ++c)
            for (std::size_t r = 0; r < S.size(); ++r)
                acc(S[r], S[c]) += inv(static_cast<Index>(r), static_cast<Index>(c));
    };
    const auto count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(tau));
    if (count <= budget) {
        for_each_subset(n, tau, add, budget);
        acc /= static_cast<double>(count);
        return {SymMatrix(0.5 * (acc + acc.transpose())), true, count};
    }
    std::mt19937_64 rng(seed);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    for (std::uint64_t t = 0; t < mc_samples; ++t) {
        std::iota(perm.begin(), perm.end(), Index{0});
        for (Index j = 0; j < tau; ++j) {
            std::uniform_int_distribution<Index> U(j, n - 1);
            std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(U(rng))]);
        }
        std::vector<Index> S(perm.begin(), perm.begin() + tau);
        std::sort(S.begin(), S.end());
        add(S);
    }
    acc /= static_cast<double>(mc_samples);
    return {SymMatrix(0.5 * (acc + acc.transpose())), false, mc_samples};
}

/**
 * ESO vector for M = A^T A under tau-nice sampling:
 * v_i = sum_j [1 + (|A_j:|_0 - 1)(tau - 1)/(n - 1)] A_ji^2.
 * 1/(n max_i v_i) lower-bounds lambda_min(E[M_[S]^{-1}]).
 */
inline Vector eso_v(const Matrix& A, Index tau)
{
    const Index n = A.cols();
    if (n < 2) throw ConfigError("ESO vector needs at least two columns");
    if (tau < 1 || tau > n) throw InvalidSetError("ESO: block size outside [1, n]");
    Vector v = Vector::Zero(n);
    for (Index j = 0; j < A.rows(); ++j) {
        const double nnz = static_cast<double>((A.row(j).array() != 0.0).count());
        const double w = 1.0 + (nnz - 1.0) * static_cast<double>(tau - 1) / static_cast<double>(n - 1);
        v += w * A.row(j).transpose().array().square().matrix();
    }
    return v;
}

inline double eso_lower_bound(const Vector& v) { return 1.0 / (static_cast<double>(v.size()) * v.maxCoeff()); }

/**
 * Step model a rule runs with: M itself for smooth problems on the matrix
 * path, otherwise L_tau * I with tau the rule's largest block.
 */
inline StepModel step_model_for(const CompositeProblem& p, const BlockRule& rule,
                                std::uint64_t budget = default_enumeration_budget, bool* exact = nullptr)
{
    if (exact) *exact = true;
    if (p.uses_matrix_step()) return StepModel::matrix();
    const auto lt = L_tau(p.f.smoothness, rule.max_block_size(p.dim()), budget);
    if (exact) *exact = lt.exact;
    return StepModel::scalar(lt.value);
}

enum class ClassKind { strongly_pl, weakly_pl, gradient_dominated, general_nonconvex };

inline std::string class_name(ClassKind k)
{
    switch (k) {
        case ClassKind::strongly_pl: return "strongly_pl";
        case ClassKind::weakly_pl: return "weakly_pl";
        case ClassKind::gradient_dominated: return "gradient_dominated";
        case ClassKind::general_nonconvex: return "general_nonconvex";
    }
    return "?";
}

struct FunctionClass
{
    ClassKind kind = ClassKind::general_nonconvex;
    double mu = 0.0;
    double rho = 0.0;
    // phi(t) = c * t^p
    double c = 0.0;
    double p = 0.0;

    static FunctionClass strongly_pl(double mu) { return {ClassKind::strongly_pl, mu}; }
    static FunctionClass weakly_pl(double rho) { return {ClassKind::weakly_pl, 0.0, rho}; }
    static FunctionClass gradient_dominated(double c, double p) { return {ClassKind::gradient_dominated, 0, 0, c, p}; }
    static FunctionClass general() { return {}; }

    void validate() const
    {
        switch (kind) {
            case ClassKind::strongly_pl:
                if (!(mu > 0.0)) throw ClassParameterError("strongly PL parameter must be positive");
                break;
            case ClassKind::weakly_pl:
                if (!(rho > 0.0)) throw ClassParameterError("weakly PL parameter must be positive");
                break;
            case ClassKind::gradient_dominated:
                if (!(c > 0.0 && p > 0.0)) throw ClassParameterError("gradient domination needs c, p > 0");
                break;
            case ClassKind::general_nonconvex: break;
        }
    }
};

struct RuleConstant
{
    double value;
    std::string label;
    bool exact = true;
};

/**
 * Lower bound c on E[theta(S_k, x) | x] for the rule: the smooth column of
 * the rate tables on the matrix path, the non-smooth column otherwise.
 */
inline RuleConstant rule_constant(const BlockRule& rule, const CompositeProblem& p, const StepModel& model,
                                  std::uint64_t budget = default_enumeration_budget)
{
    const Index n = p.dim();
    const SymMatrix& M = p.f.smoothness;
    const double nd = static_cast<double>(n);
    const Vector d = M.diag();
    if (rule.kind == RuleKind::cyclic_coord) {
        throw NoGuaranteeError("no rate is available for cyclic selection");
    }
    if (model.is_matrix()) {
        switch (rule.kind) {
            case RuleKind::full_batch: return {1.0 / eig_extremes(M).lambda_max, "1/lambda_max(M)"};
            case RuleKind::uniform_coord: return {1.0 / (nd * d.maxCoeff()), "1/(n max_i M_ii)"};
            case RuleKind::importance_coord:
            case RuleKind::greedy_coord: return {1.0 / d.sum(), "1/sum_i M_ii"};
            case RuleKind::tau_nice:
            case RuleKind::greedy_minibatch: {
                const auto E = expected_inverse_matrix(M, rule.tau, budget);
                return {eig_extremes(E.value).lambda_min, "lambda_min(E[M_[S]^-1])", E.exact};
            }
            default: break;
        }
    } else {
        switch (rule.kind) {
            case RuleKind::full_batch: return {1.0 / eig_extremes(M).lambda_max, "1/lambda_max(M)"};
            case RuleKind::uniform_coord:
            case RuleKind::greedy_coord: return {1.0 / (nd * d.maxCoeff()), "1/(n max_i M_ii)"};
            case RuleKind::importance_coord:
                throw NoGuaranteeError("no non-smooth rate is available for importance sampling");
            case RuleKind::tau_nice:
            case RuleKind::greedy_minibatch: {
                const auto lt = L_tau(M, rule.tau, budget);
                return {static_cast<double>(rule.tau) / (nd * lt.value), "tau/(n L_tau)", lt.exact};
            }
            default: break;
        }
    }
    throw NoGuaranteeError("no rate is available for rule " + rule.name());
}

struct RateBound
{
    std::string rule;
    ClassKind kind;
    RuleConstant constant;
    double xi0;
    std::function<double(double)> K_real;

    // Iterations needed for accuracy eps; saturates at uint64 max.
    std::uint64_t K(double eps) const
    {
        const double k = K_real(eps);
        if (!(k > 0.0)) return 0;
        if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
        return static_cast<std::uint64_t>(std::ceil(k));
    }
};

/**
 * k >= (2 L xi0 / eps) log(xi0 / phi(eps)) with phi(t) = c t^p; 0 when phi(eps) >= xi0.
 */
inline std::uint64_t gradient_dominated_K(double c, double p, double L, double xi0, double eps)
{
    if (!(c > 0.0 && p > 0.0 && L > 0.0 && eps > 0.0)) throw ClassParameterError("gradient domination needs c, p, L, eps > 0");
    const double phi = c * std::pow(eps, p);
    if (phi >= xi0) return 0;
    const double k = 2.0 * L * xi0 / eps * std::log(xi0 / phi);
    if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(std::ceil(k));
}

inline RateBound predict_K(const BlockRule& rule, const FunctionClass& cls, const CompositeProblem& p,
                           const StepModel& model, double xi0, std::uint64_t budget = default_enumeration_budget)
{
    cls.validate();
    if (!(xi0 >= 0.0)) throw ClassParameterError("initial gap must be non-negative");
    RateBound out{rule.name(), cls.kind, rule_constant(rule, p, model, budget), xi0, {}};
    const double c = out.constant.value;
    switch (cls.kind) {
        case ClassKind::strongly_pl:
            out.K_real = [=](double eps) { return eps >= xi0 ? 0.0 : std::log(xi0 / eps) / (c * cls.mu); };
            break;
        case ClassKind::weakly_pl:
            out.K_real = [=](double eps) { return eps >= xi0 ? 0.0 : 1.0 / (cls.rho * c * eps); };
            break;
        case ClassKind::general_nonconvex:
            out.K_real = [=](double eps) { return eps >= xi0 ? 0.0 : xi0 / (c * eps) * std::log(xi0 / eps); };
            break;
        case ClassKind::gradient_dominated: {
            if (rule.kind != RuleKind::full_batch || !p.smooth()) {
                throw NoGuaranteeError("gradient domination rates exist only for smooth full-batch descent");
            }
            const double L = 1.0 / c;
            out.K_real = [=](double eps) {
                const double phi = cls.c * std::pow(eps, cls.p);
                return phi >= xi0 ? 0.0 : 2.0 * L * xi0 / eps * std::log(xi0 / phi);
            };
            break;
        }
    }
    return out;
}

inline RateBound predict_K(const BlockRule& rule, const FunctionClass& cls, const CompositeProblem& p, double xi0)
{
    return predict_K(rule, cls, p, step_model_for(p, rule), xi0);
}

// Largest eps with K(eps) <= k, i.e. the accuracy guaranteed after k iterations.
inline double guaranteed_accuracy(const RateBound& rb, double k)
{
    if (!(rb.xi0 > 0.0)) return 0.0;
    if (k <= 0.0) return rb.xi0;
    double lo = rb.xi0 * 1e-300;
    double hi = rb.xi0;
    if (rb.K_real(lo) <= k) return lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (rb.K_real(mid) <= k) hi = mid;
        else lo = mid;
        if (hi / lo < 1.0 + 1e-12) break;
    }
    return hi;
}

/**
 * Strongly PL parameter implied by strong convexity. With the L * I model:
 * min{L/2, L lambda_F / (lambda_F - lambda_f + L)}. The smooth certificate
 * does not depend on L, and the bound becomes lambda_f (its L -> inf limit).
 */
inline double strongly_convex_mu(const CompositeProblem& p, double L)
{
    const auto lF = p.strong_convexity_F();
    if (!lF || !p.f.strong_convexity) throw ClassParameterError("strong convexity parameters are not declared");
    if (!(*lF > 0.0)) throw ClassParameterError("F is not strongly convex");
    const double lf = *p.f.strong_convexity;
    if (p.smooth()) return lf;
    if (!(L > 0.0)) throw ClassParameterError("L must be positive");
    return std::min(L / 2.0, L * *lF / (*lF - lf + L));
}

inline double strongly_convex_mu(const CompositeProblem& p, const StepModel& model)
{
    return strongly_convex_mu(p, model.is_matrix() ? p.L_scalar : model.L);
}

enum class RadiusMethod { ellipsoid_exact, ellipsoid_shifted, ray_bisection };

struct RhoEstimate
{
    double rho;
    double R;
    double xi0;
    RadiusMethod method;
};

/**
 * rho(x0) = min{L/(2 xi0), 1/(2R^2)} with R = max |x - x*| over the level set
 * {F <= F(x0)}; R is exact for strongly convex quadratics and an
 * over-estimate (ray bisection, inflated by 10%) otherwise.
 */
inline RhoEstimate weakly_convex_rho(const CompositeProblem& p, const Vector& x0, double L,
                                     std::uint64_t directions = 10000, std::uint64_t seed = 0)
{
    if (!p.convex()) throw ClassParameterError("weak-PL parameter requires convex f and g");
    if (!p.opt_value || !p.minimizer) throw ClassParameterError("weak-PL parameter requires a minimizer");
    const double F0 = p.F(x0);
    const double xi0 = F0 - *p.opt_value;
    if (!(xi0 > at_optimum_tolerance(F0))) throw ClassParameterError("x0 is already optimal");
    if (!(L > 0.0)) throw ClassParameterError("L must be positive");
    const Vector& xs = *p.minimizer;

    RhoEstimate out{0.0, 0.0, xi0, RadiusMethod::ray_bisection};
    const bool quad = p.f.constant_hessian && p.f.strong_convexity && *p.f.strong_convexity > 0.0;
    if (quad && p.smooth()) {
        out.R = std::sqrt(2.0 * xi0 / *p.f.strong_convexity);
        out.method = RadiusMethod::ellipsoid_exact;
    } else if (quad && p.g.nonnegative && p.f.known_opt_value && p.f.known_minimizer) {
        // {F <= F0} lies inside the f-level set {f <= F0}, an ellipsoid around argmin f.
        const double r = std::sqrt(2.0 * (F0 - *p.f.known_opt_value) / *p.f.strong_convexity);
        out.R = r + (xs - *p.f.known_minimizer).norm();
        out.method = RadiusMethod::ellipsoid_shifted;
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> N(0.0, 1.0);
        const Index n = p.dim();
        double best = 0.0;
        for (std::uint64_t t = 0; t < directions; ++t) {
            Vector d(n);
            for (Index i = 0; i < n; ++i) d[i] = N(rng);
            d.normalize();
            double lo = 0.0;
            double hi = 1.0;
            while (p.F(xs + hi * d) <= F0) {
                lo = hi;
                hi *= 2.0;
                if (hi > 1e12) throw ClassParameterError("level set appears unbounded");
            }
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (p.F(xs + mid * d) <= F0) lo = mid;
                else hi = mid;
            }
            best = std::max(best, hi);
        }
        out.R = 1.1 * best;
    }
    if (!(out.R > 0.0)) throw ClassParameterError("degenerate level set radius");
    out.rho = std::min(L / (2.0 * xi0), 1.0 / (2.0 * out.R * out.R));
    return out;
}

} // namespace bcd
