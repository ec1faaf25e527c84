#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <bcd/errors.hpp>
#include <bcd/linalg.hpp>
#include <bcd/objectives.hpp>

namespace bcd {

/**
 * Local quadratic model used for a step: either the smoothness matrix M
 * itself (smooth problems only) or L * I.
 */
struct StepModel
{
    StepKind kind = StepKind::scalar;
    double L = 1.0;

    static StepModel matrix() { return {StepKind::matrix, 0.0}; }
    static StepModel scalar(double L) { return {StepKind::scalar, L}; }
    bool is_matrix() const noexcept { return kind == StepKind::matrix; }
};

inline StepModel default_model(const CompositeProblem& p)
{
    return p.uses_matrix_step() ? StepModel::matrix() : StepModel::scalar(p.L_scalar);
}

struct Certificate
{
    double lambda_total = 0.0;
    Vector lambda_per_coord;
    // scalar L of the model; 0 for the matrix model, where lambda is L-free
    double L_used = 0.0;
};

struct BlockStep
{
    CoordSet S;
    Vector u_S;
    double decrease = 0.0;
};

// Scalar subproblem min_v { g v + (L/2) v^2 + g_i(x_i + v) - g_i(x_i) } at coordinate i.
struct ScalarStep
{
    double v;
    double lambda;
};

inline ScalarStep scalar_step(const SeparableRegularizer& reg, double xi, double gi, double L, Index i)
{
    if (reg.is_zero) {
        return {-gi / L, 0.5 * gi * gi};
    }
    const double v = reg.prox(xi - gi / L, L, i) - xi;
    if (!std::isfinite(v)) throw NumericError("prox returned a non-finite point");
    const double model = gi * v + 0.5 * L * v * v + reg.value_i(xi + v, i) - reg.value_i(xi, i);
    return {v, std::max(0.0, -L * model)};
}

inline double lambda_i(const CompositeProblem& p, const Vector& x, const Vector& grad, Index i, double L)
{
    return scalar_step(p.g, x[i], grad[i], L, i).lambda;
}

inline double lambda_i(const CompositeProblem& p, const Vector& x, Index i, double L)
{
    return lambda_i(p, x, p.f.gradient(x), i, L);
}

inline Certificate certificate(const CompositeProblem& p, const Vector& x, const Vector& grad,
                               const StepModel& model)
{
    const Index n = p.dim();
    Certificate c;
    c.lambda_per_coord.resize(n);
    if (p.smooth()) {
        for (Index i = 0; i < n; ++i) c.lambda_per_coord[i] = 0.5 * grad[i] * grad[i];
    } else {
        if (model.is_matrix()) throw ConfigError("matrix step model requires a zero regularizer");
        for (Index i = 0; i < n; ++i) c.lambda_per_coord[i] = lambda_i(p, x, grad, i, model.L);
    }
    c.lambda_total = c.lambda_per_coord.sum();
    c.L_used = model.is_matrix() ? 0.0 : model.L;
    return c;
}

inline Certificate certificate(const CompositeProblem& p, const Vector& x, const StepModel& model)
{
    return certificate(p, x, p.f.gradient(x), model);
}

inline Certificate certificate(const CompositeProblem& p, const Vector& x)
{
    return certificate(p, x, default_model(p));
}

// Convergence threshold on the gap, relative to the starting objective.
inline double at_optimum_tolerance(double F0) { return 1e-14 * std::max(1.0, std::abs(F0)); }

inline double optimality_gap(const CompositeProblem& p, double Fx)
{
    if (!p.opt_value) throw UnverifiableError("optimality gap needs a reference optimum value");
    return Fx - *p.opt_value;
}

// mu(x) = lambda(x) / xi(x). Throws AtOptimumError when xi is within tolerance of 0.
inline double forcing(double lambda_total, double xi, double tolerance)
{
    if (xi <= tolerance) throw AtOptimumError("gap within the at-optimum tolerance");
    return lambda_total / xi;
}

inline double forcing(const CompositeProblem& p, const Vector& x, const StepModel& model,
                      std::optional<double> F0 = std::nullopt)
{
    const double Fx = p.F(x);
    const double xi = optimality_gap(p, Fx);
    return forcing(certificate(p, x, model).lambda_total, xi, at_optimum_tolerance(F0.value_or(Fx)));
}

inline double forcing(const CompositeProblem& p, const Vector& x)
{
    return forcing(p, x, default_model(p));
}

/**
 * Minimizer of the block model U_S(x, .). For the matrix model solves
 * M_S u = -grad_S; for L * I solves coordinatewise through the prox.
 * `full_factor` optionally supplies a Cholesky factor of M for S = [n].
 */
inline BlockStep block_step(const CompositeProblem& p, const Vector& x, const Vector& grad,
                            const CoordSet& S, const StepModel& model,
                            const Eigen::LLT<Matrix>* full_factor = nullptr)
{
    check_set_for(S, p.dim());
    BlockStep st{S, Vector(S.size()), 0.0};
    if (model.is_matrix()) {
        if (!p.smooth()) throw ConfigError("matrix step model requires a zero regularizer");
        const Vector gS = mask_vector(grad, S);
        Vector y;
        if (S.is_full() && full_factor) {
            y = full_factor->solve(gS);
        } else {
            y = solve_spd(principal_submatrix(p.f.smoothness, S), gS);
        }
        st.u_S = -y;
        st.decrease = std::max(0.0, 0.5 * gS.dot(y));
        return st;
    }
    double dec = 0.0;
    for (Index j = 0; j < S.size(); ++j) {
        const Index i = S[j];
        const auto s = scalar_step(p.g, x[i], grad[i], model.L, i);
        st.u_S[j] = s.v;
        dec += s.lambda;
    }
    st.decrease = dec / model.L;
    return st;
}

inline BlockStep block_step(const CompositeProblem& p, const Vector& x, const CoordSet& S,
                            const StepModel& model)
{
    return block_step(p, x, p.f.gradient(x), S, model);
}

inline BlockStep block_step(const CompositeProblem& p, const Vector& x, const CoordSet& S)
{
    return block_step(p, x, S, default_model(p));
}

// U_S(x, u) evaluated directly from its definition.
inline double block_model_value(const CompositeProblem& p, const Vector& x, const Vector& grad,
                                const CoordSet& S, const Vector& u_S, const StepModel& model)
{
    const Vector gS = mask_vector(grad, S);
    double quad;
    if (model.is_matrix()) {
        quad = 0.5 * u_S.dot(principal_submatrix(p.f.smoothness, S).dense() * u_S);
    } else {
        quad = 0.5 * model.L * u_S.squaredNorm();
    }
    double reg = 0.0;
    if (!p.g.is_zero) {
        for (Index j = 0; j < S.size(); ++j) {
            const Index i = S[j];
            reg += p.g.value_i(x[i] + u_S[j], i) - p.g.value_i(x[i], i);
        }
    }
    return gS.dot(u_S) + quad + reg;
}

// theta(S, x) = (block model decrease) / lambda(x); zero when lambda(x) = 0.
inline double proportion(double decrease, double lambda_total)
{
    return lambda_total > 0.0 ? decrease / lambda_total : 0.0;
}

inline double proportion(const CompositeProblem& p, const Vector& x, const CoordSet& S, const StepModel& model)
{
    const Vector grad = p.f.gradient(x);
    const auto cert = certificate(p, x, grad, model);
    return proportion(block_step(p, x, grad, S, model).decrease, cert.lambda_total);
}

inline double proportion(const CompositeProblem& p, const Vector& x, const CoordSet& S)
{
    return proportion(p, x, S, default_model(p));
}

} // namespace bcd
