#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <bcd/errors.hpp>
#include <bcd/linalg.hpp>

namespace bcd {

// Raw data behind an f(x) = (1/2m)|Ax-b|^2 + (1/m) cos(<c,x>) objective.
struct LsqCosData
{
    Matrix A;
    Vector b;
    Vector c;
};

// Axis-aligned box [lo, hi]^n on which a box-restricted smoothness matrix is valid.
struct Box
{
    double lo;
    double hi;

    bool contains(const Vector& x) const
    {
        return (x.array() >= lo).all() && (x.array() <= hi).all();
    }
};

/**
 * Smooth part f of the composite objective. M must majorize the Hessian
 * (globally, or on `box` when set).
 */
struct Objective
{
    Index dim = 0;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    SymMatrix smoothness;
    std::optional<double> strong_convexity;
    std::optional<double> known_opt_value;
    std::optional<Vector> known_minimizer;
    std::optional<Matrix> constant_hessian;
    std::optional<Box> box;
    std::shared_ptr<const LsqCosData> lsq_cos;
    bool convex = false;
    std::string name;

    void validate() const
    {
        if (dim < 1) throw SizeMismatchError("objective dimension must be positive");
        if (smoothness.order() != dim) {
            throw SizeMismatchError("smoothness matrix order does not match dimension");
        }
        if (!is_positive_definite(smoothness)) {
            throw NotPositiveDefiniteError("smoothness matrix of '" + name + "' is not positive definite");
        }
        if (strong_convexity) {
            const auto ev = eig_extremes(smoothness);
            if (*strong_convexity < 0.0 ||
                *strong_convexity > ev.lambda_min * (1.0 + 1e-10) + 1e-300) {
                throw ClassParameterError("strong convexity exceeds lambda_min(M)");
            }
        }
    }
};

/**
 * g(x) = sum_i g_i(x_i). prox(c, l, i) returns argmin_v (l/2)(v-c)^2 + g_i(v).
 * `strong_convexity` is the modulus of g itself; F's modulus is that plus f's.
 */
struct SeparableRegularizer
{
    std::function<double(double, Index)> value_i;
    std::function<double(double, double, Index)> prox;
    std::optional<double> strong_convexity;
    bool is_zero = false;
    bool convex = true;
    bool nonnegative = true;
    double l1_weight = 0.0;
    std::string name;

    double value(const Vector& x) const
    {
        if (is_zero) return 0.0;
        double s = 0.0;
        for (Index i = 0; i < x.size(); ++i) s += value_i(x[i], i);
        return s;
    }
};

inline SeparableRegularizer make_zero_regularizer()
{
    SeparableRegularizer g;
    g.value_i = [](double, Index) { return 0.0; };
    g.prox = [](double c, double, Index) { return c; };
    g.strong_convexity = 0.0;
    g.is_zero = true;
    g.name = "zero";
    return g;
}

inline double soft_threshold(double c, double t)
{
    const double a = std::abs(c) - t;
    return a > 0.0 ? std::copysign(a, c) : 0.0;
}

// g(x) = lambda * |x|_1. lambda = 0 yields the zero regularizer semantics
// (identity prox, is_zero set) under an l1 name.
inline SeparableRegularizer make_l1(double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ConfigError("l1 weight must be a finite non-negative number");
    }
    SeparableRegularizer g;
    g.value_i = [lambda](double v, Index) { return lambda * std::abs(v); };
    g.prox = [lambda](double c, double ell, Index) {
        return lambda == 0.0 ? c : soft_threshold(c, lambda / ell);
    };
    g.strong_convexity = 0.0;
    g.is_zero = (lambda == 0.0);
    g.l1_weight = lambda;
    g.name = "l1";
    return g;
}

enum class StepKind { matrix, scalar };

/**
 * F = f + g. step == matrix is only admissible for g = 0 and uses M_S
 * directly; step == scalar replaces M by L * I with L chosen per rule
 * (L_scalar when nothing more specific is known).
 */
struct CompositeProblem
{
    Objective f;
    SeparableRegularizer g;
    double L_scalar = 0.0;
    StepKind step = StepKind::matrix;
    std::optional<double> opt_value;
    bool opt_empirical = false;
    std::optional<Vector> minimizer;

    Index dim() const noexcept { return f.dim; }
    bool smooth() const noexcept { return g.is_zero; }
    bool uses_matrix_step() const noexcept { return step == StepKind::matrix && smooth(); }

    double F(const Vector& x) const { return f.value(x) + g.value(x); }

    std::optional<double> strong_convexity_F() const
    {
        if (!f.strong_convexity || !g.strong_convexity) return std::nullopt;
        return *f.strong_convexity + *g.strong_convexity;
    }

    bool convex() const noexcept { return f.convex && g.convex; }
};

inline CompositeProblem make_problem(Objective f, SeparableRegularizer g)
{
    f.validate();
    CompositeProblem p;
    p.L_scalar = eig_extremes(f.smoothness).lambda_max;
    p.step = g.is_zero ? StepKind::matrix : StepKind::scalar;
    if (g.is_zero) {
        p.opt_value = f.known_opt_value;
        p.minimizer = f.known_minimizer;
    }
    p.f = std::move(f);
    p.g = std::move(g);
    return p;
}

inline CompositeProblem make_smooth_problem(Objective f)
{
    return make_problem(std::move(f), make_zero_regularizer());
}

// -------------------------------------------------------------------------
// f(x) = (1/2m)|Ax - b|^2 + (1/m) cos(<c, x>)
// -------------------------------------------------------------------------

namespace detail {

// Global minimizer of phi(t) = (t - t0)^2 / (2q) + cos(t).
inline double minimize_reduced_phi(double t0, double q)
{
    const auto phi = [&](double t) { return (t - t0) * (t - t0) / (2.0 * q) + std::cos(t); };
    // Any global minimizer satisfies (t - t0)^2 / (2q) <= 2 and |t - t0| <= q.
    const double half = std::min(q, 2.0 * std::sqrt(q)) + 0.5;
    double step = 0.05;
    const double max_points = 1e7;
    if (2.0 * half / step > max_points) step = 2.0 * half / max_points;
    double best_t = t0;
    double best = phi(t0);
    for (double t = t0 - half; t <= t0 + half; t += step) {
        const double v = phi(t);
        if (v < best) {
            best = v;
            best_t = t;
        }
    }
    // golden-section polish on the bracketing cell
    double a = best_t - step;
    double b = best_t + step;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a);
    double x2 = a + r * (b - a);
    double f1 = phi(x1);
    double f2 = phi(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::abs(best_t)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = phi(x2);
        }
    }
    double t = 0.5 * (a + b);
    // a few Newton steps on phi'(t) = (t - t0)/q - sin t
    for (int it = 0; it < 5; ++it) {
        const double d1 = (t - t0) / q - std::sin(t);
        const double d2 = 1.0 / q - std::cos(t);
        if (!(d2 > 0.0)) break;
        const double tn = t - d1 / d2;
        if (!(phi(tn) <= phi(t))) break;
        t = tn;
    }
    return t;
}

} // namespace detail

/**
 * Exact global minimizer when A has full column rank. Minimizing over the
 * affine slice <c,x> = t first leaves a 1-D problem in t, solved globally.
 */
inline std::optional<std::pair<double, Vector>> lsq_cos_global_minimum(const LsqCosData& d)
{
    const Index m = d.A.rows();
    const Index n = d.A.cols();
    if (m < n) return std::nullopt;
    Eigen::JacobiSVD<Matrix> svd(d.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s[s.size() - 1] <= 1e-12 * s[0]) return std::nullopt;
    const Matrix& U = svd.matrixU();
    const Matrix& V = svd.matrixV();
    const Vector x_ls = V * ((U.transpose() * d.b).array() / s.array()).matrix();
    const Vector w = V * ((V.transpose() * d.c).array() / s.array().square()).matrix();
    const double q = d.c.dot(w);
    const double t0 = d.c.dot(x_ls);
    Vector x = x_ls;
    if (q > 0.0) {
        const double t = detail::minimize_reduced_phi(t0, q);
        x = x_ls + ((t - t0) / q) * w;
    }
    const auto f = [&](const Vector& z) {
        return 0.5 * (d.A * z - d.b).squaredNorm() / static_cast<double>(m) +
               std::cos(d.c.dot(z)) / static_cast<double>(m);
    };
    // Newton polish with the true Hessian (A^T A - cos(t) cc^T)/m
    const Matrix AtA = d.A.transpose() * d.A;
    for (int it = 0; it < 3; ++it) {
        const double t = d.c.dot(x);
        const Vector g = (d.A.transpose() * (d.A * x - d.b) - std::sin(t) * d.c) / static_cast<double>(m);
        const Matrix H = (AtA - std::cos(t) * d.c * d.c.transpose()) / static_cast<double>(m);
        Eigen::LLT<Matrix> llt(H);
        if (llt.info() != Eigen::Success) break;
        const Vector xn = x - llt.solve(g);
        if (!(f(xn) <= f(x))) break;
        x = xn;
    }
    return std::make_pair(f(x), x);
}

inline Objective make_lsq_cos(Matrix A, Vector b, Vector c, bool compute_optimum = true)
{
    const Index m = A.rows();
    const Index n = A.cols();
    if (m < 1 || n < 1) throw SizeMismatchError("lsq_cos: A must be at least 1x1");
    if (b.size() != m) throw SizeMismatchError("lsq_cos: b length must equal rows of A");
    if (c.size() != n) throw SizeMismatchError("lsq_cos: c length must equal columns of A");

    auto data = std::make_shared<LsqCosData>(LsqCosData{std::move(A), std::move(b), std::move(c)});
    const double inv_m = 1.0 / static_cast<double>(m);

    Objective f;
    f.dim = n;
    f.name = "lsq_cos";
    f.lsq_cos = data;
    f.value = [data, inv_m](const Vector& x) {
        return 0.5 * inv_m * (data->A * x - data->b).squaredNorm() + inv_m * std::cos(data->c.dot(x));
    };
    f.gradient = [data, inv_m](const Vector& x) {
        Vector g = data->A.transpose() * (data->A * x - data->b);
        g -= std::sin(data->c.dot(x)) * data->c;
        return Vector(inv_m * g);
    };
    Matrix M = data->A.transpose() * data->A + data->c * data->c.transpose();
    M *= inv_m;
    f.smoothness = SymMatrix(0.5 * (M + M.transpose()));
    f.convex = data->c.isZero(0.0);
    if (compute_optimum) {
        if (auto opt = lsq_cos_global_minimum(*data)) {
            f.known_opt_value = opt->first;
            f.known_minimizer = opt->second;
        }
    }
    return f;
}

// -------------------------------------------------------------------------
// Quadratics f(x) = 1/2 x^T H x + q^T x
// -------------------------------------------------------------------------

enum class QuadSmoothness { hessian, scalar };

inline Objective make_quadratic(const Matrix& H, const Vector& q, QuadSmoothness form = QuadSmoothness::hessian)
{
    const SymMatrix Hs(H);
    const Index n = Hs.order();
    if (q.size() != n) throw SizeMismatchError("quadratic: linear term length mismatch");
    const auto ev = eig_extremes(Hs);
    if (!(ev.lambda_min >= 0.0)) throw ClassParameterError("quadratic: Hessian must be PSD");

    auto Hp = std::make_shared<const Matrix>(Hs.dense());
    auto qp = std::make_shared<const Vector>(q);

    Objective f;
    f.dim = n;
    f.name = "quadratic";
    f.value = [Hp, qp](const Vector& x) { return 0.5 * x.dot(*Hp * x) + qp->dot(x); };
    f.gradient = [Hp, qp](const Vector& x) { return Vector(*Hp * x + *qp); };
    f.smoothness = form == QuadSmoothness::hessian ? Hs : SymMatrix::identity(n, ev.lambda_max);
    f.constant_hessian = Hs.dense();
    f.strong_convexity = std::max(0.0, ev.lambda_min);
    f.convex = true;
    if (ev.lambda_min > 0.0) {
        Eigen::LLT<Matrix> llt(Hs.dense());
        const Vector xs = -llt.solve(q);
        f.known_minimizer = xs;
        f.known_opt_value = 0.5 * q.dot(xs);
    }
    return f;
}

// Random SPD matrix Q diag(ev) Q^T with eigenvalues log-spaced in [lo, hi].
inline Matrix random_spd(Index n, double lo, double hi, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Matrix G(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) G(i, j) = N(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    Vector ev(n);
    for (Index i = 0; i < n; ++i) {
        const double t = n == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        ev[i] = lo * std::pow(hi / lo, t);
    }
    Matrix out = Q * ev.asDiagonal() * Q.transpose();
    return 0.5 * (out + out.transpose());
}

// -------------------------------------------------------------------------
// Class-membership examples with box-restricted smoothness
// -------------------------------------------------------------------------

namespace detail {

// sup over a uniform grid of the box of lambda_max(hess(x)), padded by 2%.
template <class Hess>
SymMatrix box_smoothness(Hess&& hess, Box box, int points = 201)
{
    double sup = 0.0;
    for (int a = 0; a < points; ++a) {
        for (int b = 0; b < points; ++b) {
            const double x1 = box.lo + (box.hi - box.lo) * a / (points - 1);
            const double x2 = box.lo + (box.hi - box.lo) * b / (points - 1);
            const Eigen::Matrix2d H = hess(x1, x2);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H, Eigen::EigenvaluesOnly);
            sup = std::max(sup, es.eigenvalues()[1]);
        }
    }
    return SymMatrix::identity(2, std::max(sup, 1e-12));
}

inline double huber(double z) { return std::abs(z) < 1.0 ? z * z : 2.0 * std::abs(z) - 1.0; }
inline double huber_d(double z) { return std::abs(z) < 1.0 ? 2.0 * z : std::copysign(2.0, z); }
inline double huber_dd(double z) { return std::abs(z) < 1.0 ? 2.0 : 0.0; }

} // namespace detail

inline Objective make_product_square(Box box = {-2.0, 2.0})
{
    Objective f;
    f.dim = 2;
    f.name = "product_square";
    f.value = [](const Vector& x) { return x[0] * x[0] * x[1] * x[1]; };
    f.gradient = [](const Vector& x) {
        Vector g(2);
        g << 2.0 * x[0] * x[1] * x[1], 2.0 * x[0] * x[0] * x[1];
        return g;
    };
    f.smoothness = detail::box_smoothness(
        [](double a, double b) {
            Eigen::Matrix2d H;
            H << 2.0 * b * b, 4.0 * a * b, 4.0 * a * b, 2.0 * a * a;
            return H;
        },
        box);
    f.box = box;
    f.known_opt_value = 0.0;
    f.known_minimizer = Vector::Zero(2);
    f.name = "product_square";
    return f;
}

inline Objective make_huber_product(Box box = {-2.0, 2.0})
{
    using detail::huber;
    using detail::huber_d;
    using detail::huber_dd;
    Objective f;
    f.dim = 2;
    f.name = "huber_product";
    f.value = [](const Vector& x) { return huber(x[0]) * huber(x[1]); };
    f.gradient = [](const Vector& x) {
        Vector g(2);
        g << huber_d(x[0]) * huber(x[1]), huber(x[0]) * huber_d(x[1]);
        return g;
    };
    f.smoothness = detail::box_smoothness(
        [](double a, double b) {
            Eigen::Matrix2d H;
            H << huber_dd(a) * huber(b), huber_d(a) * huber_d(b),
                 huber_d(a) * huber_d(b), huber(a) * huber_dd(b);
            return H;
        },
        box);
    f.box = box;
    f.known_opt_value = 0.0;
    f.known_minimizer = Vector::Zero(2);
    return f;
}

/**
 * c at which f(x) = 1/2 (x - pi/c)^2 + cos(cx) has a flat inflection point,
 * i.e. f'(x) = f''(x) = 0 at x = -acos(1/c^2)/c. Found by bisection.
 */
inline double flat_inflection_c()
{
    const auto h = [](double c) {
        const double x = -std::acos(1.0 / (c * c)) / c;
        return x - std::numbers::pi / c - c * std::sin(c * x);
    };
    double lo = 2.1;
    double hi = 2.2;
    double hlo = h(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double hm = h(mid);
        if ((hm < 0.0) == (hlo < 0.0)) {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double flat_inflection_point(double c) { return -std::acos(1.0 / (c * c)) / c; }

inline Objective make_plateau_1d(double c)
{
    if (!(c > 0.0)) throw ConfigError("plateau: c must be positive");
    Matrix A(1, 1);
    A(0, 0) = 1.0;
    Vector b(1);
    b[0] = std::numbers::pi / c;
    Vector cv(1);
    cv[0] = c;
    Objective f = make_lsq_cos(std::move(A), std::move(b), std::move(cv));
    f.name = "plateau";
    return f;
}

// -------------------------------------------------------------------------
// Random instances
// -------------------------------------------------------------------------

struct GeneratedInstance
{
    Index m;
    Index n;
    std::uint64_t seed;
    double lambda;
    Matrix A;
    Vector b;
    Vector c;
    Vector y;
};

namespace detail {

inline Matrix orthonormal_factor(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0.0, 1.0);
    Matrix G(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) G(i, j) = N(rng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
    const Matrix R = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
    for (Index j = 0; j < cols; ++j) {
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    }
    return Q;
}

inline Vector unit_gaussian(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = N(rng);
    const double nv = v.norm();
    return nv > 0.0 ? Vector(v / nv) : v;
}

} // namespace detail

// Singular values linearly spaced in [1/m, 1] (a single value of 1 when n = 1).
inline Vector prescribed_singular_values(Index m, Index n)
{
    Vector s(n);
    const double lo = 1.0 / static_cast<double>(m);
    for (Index i = 0; i < n; ++i) {
        const double t = n == 1 ? 1.0 : static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
        s[i] = lo + (1.0 - lo) * t;
    }
    return s;
}

inline GeneratedInstance gen_instance(Index m, Index n, std::uint64_t seed, double lambda = 0.0)
{
    if (n < 1 || m < 1) throw ConfigError("gen: m and n must be positive");
    if (m < n) throw ConfigError("gen: m must be at least n");
    if (!(lambda >= 0.0)) throw ConfigError("gen: lambda must be non-negative");
    std::mt19937_64 rng(seed);
    const Matrix U = detail::orthonormal_factor(m, n, rng);
    const Matrix V = detail::orthonormal_factor(n, n, rng);
    const Vector s = prescribed_singular_values(m, n);
    GeneratedInstance inst{m, n, seed, lambda, U * s.asDiagonal() * V.transpose(), {}, {}, {}};
    inst.y = detail::unit_gaussian(n, rng);
    inst.b = inst.A * inst.y;
    inst.c = detail::unit_gaussian(n, rng);
    return inst;
}

inline CompositeProblem to_problem(const GeneratedInstance& inst)
{
    Objective f = make_lsq_cos(inst.A, inst.b, inst.c, inst.lambda == 0.0);
    return make_problem(std::move(f), inst.lambda == 0.0 ? make_zero_regularizer() : make_l1(inst.lambda));
}

} // namespace bcd
