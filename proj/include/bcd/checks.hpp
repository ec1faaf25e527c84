#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <bcd/descent.hpp>
#include <bcd/harness.hpp>
#include <bcd/objectives.hpp>
#include <bcd/prox.hpp>
#include <bcd/rates.hpp>
#include <bcd/selection.hpp>

namespace bcd::checks {

/**
 * Outcome of one named numeric assertion. worst_margin is the smallest
 * (bound - observed) seen, in the check's own normalization; it is negative
 * exactly when the check fails on a margin.
 */
struct Check
{
    std::string name;
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::string detail;
    std::size_t samples = 0;

    void margin(double m, const std::string& where = {})
    {
        ++samples;
        if (m < worst_margin) worst_margin = m;
        if (!(m >= 0.0) && pass) {
            pass = false;
            detail = where.empty() ? "violated" : "violated at " + where;
        }
    }

    void fail(const std::string& why)
    {
        if (pass) detail = why;
        pass = false;
    }
};

using Suite = std::vector<Check>;

inline bool all_pass(const Suite& s)
{
    return std::all_of(s.begin(), s.end(), [](const Check& c) { return c.pass; });
}

inline std::string format_check(const Check& c)
{
    std::ostringstream os;
    os << (c.pass ? "PASS " : "FAIL ") << c.name << "  worst_margin=";
    if (std::isinf(c.worst_margin)) os << "n/a";
    else os << c.worst_margin;
    os << "  samples=" << c.samples;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    return os.str();
}

namespace detail {

inline Vector gaussian(Index n, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> N(0.0, scale);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = N(rng);
    return v;
}

inline Vector uniform_box(Index n, std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> U(lo, hi);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = U(rng);
    return v;
}

// Relative shortfall: >= 0 iff value >= bound * (1 - rel).
inline double rel_margin(double value, double bound, double rel = 1e-12)
{
    const double scale = std::max(std::abs(bound), 1e-300);
    return (value - bound) / scale + rel;
}

} // namespace detail

// -------------------------------------------------------------------------
// core linear algebra
// -------------------------------------------------------------------------

inline Check mask_embed_roundtrip(std::uint64_t seed)
{
    Check c{"linalg.mask_embed_roundtrip"};
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 200; ++t) {
        const Index n = 1 + static_cast<Index>(rng() % 12);
        std::vector<Index> idx;
        for (Index i = 0; i < n; ++i)
            if (rng() % 2) idx.push_back(i);
        if (idx.empty()) idx.push_back(static_cast<Index>(rng() % n));
        const CoordSet S(idx, n);
        const Vector u = detail::gaussian(S.size(), rng);
        const Vector e = embed_vector(u, S, n);
        double err = (mask_vector(e, S) - u).cwiseAbs().maxCoeff();
        for (Index i = 0; i < n; ++i)
            if (!S.contains(i) && e[i] != 0.0) err = 1.0;
        c.margin(-err, std::to_string(t));
    }
    return c;
}

inline Check principal_submatrices_spd(std::uint64_t seed, Index n = 8)
{
    Check c{"linalg.principal_submatrices_spd"};
    for (std::uint64_t s = 0; s < 5; ++s) {
        const SymMatrix M(random_spd(n, 1e-2, 1e2, seed + s));
        for (Index tau = 1; tau <= n; ++tau) {
            for_each_subset(n, tau, [&](std::span<const Index> S) {
                const SymMatrix sub(principal_submatrix(M.dense(), S));
                c.margin(is_positive_definite(sub) ? 0.0 : -1.0);
            });
        }
    }
    return c;
}

inline Check rayleigh_bounds(std::uint64_t seed)
{
    Check c{"linalg.rayleigh_within_extremes"};
    std::mt19937_64 rng(seed);
    const SymMatrix M(random_spd(9, 0.5, 40.0, seed));
    const auto ev = eig_extremes(M);
    for (int t = 0; t < 100; ++t) {
        Vector v = detail::gaussian(9, rng);
        v.normalize();
        const double rq = v.dot(M.dense() * v);
        const double tol = 1e-12 * ev.lambda_max;
        c.margin(std::min(rq - ev.lambda_min, ev.lambda_max - rq) + tol);
    }
    return c;
}

inline Check subset_counts()
{
    Check c{"linalg.subset_counts"};
    for (Index n = 1; n <= 10; ++n) {
        for (Index tau = 1; tau <= n; ++tau) {
            std::uint64_t count = 0;
            std::vector<std::vector<Index>> seen;
            for_each_subset(n, tau, [&](std::span<const Index> S) {
                ++count;
                seen.emplace_back(S.begin(), S.end());
            });
            std::sort(seen.begin(), seen.end());
            const bool distinct = std::adjacent_find(seen.begin(), seen.end()) == seen.end();
            c.margin(count == binomial(n, tau) && distinct ? 0.0 : -1.0, std::to_string(n) + "," + std::to_string(tau));
        }
    }
    return c;
}

// Cholesky success on a declared smoothness matrix.
inline Check smoothness_spd(const SymMatrix& M, const std::string& label)
{
    Check c{"linalg.smoothness_spd[" + label + "]"};
    c.margin(is_positive_definite(M) ? 0.0 : -1.0);
    if (!c.pass) c.detail = "Cholesky factorization of M failed";
    return c;
}

// -------------------------------------------------------------------------
// objectives
// -------------------------------------------------------------------------

// Points for objectives with a box-restricted smoothness matrix stay inside the box.
inline Vector sample_point(const Objective& f, std::mt19937_64& rng, double scale)
{
    if (f.box) return detail::uniform_box(f.dim, rng, f.box->lo, f.box->hi);
    return detail::gaussian(f.dim, rng, scale);
}

inline Check gradient_fd(const Objective& f, std::uint64_t seed, double scale = 1.0, int points = 20)
{
    Check c{"objectives.gradient_fd[" + f.name + "]"};
    std::mt19937_64 rng(seed);
    const double h = 1e-6;
    for (int t = 0; t < points; ++t) {
        const Vector x = sample_point(f, rng, scale);
        const Vector g = f.gradient(x);
        Vector fd(f.dim);
        for (Index i = 0; i < f.dim; ++i) {
            Vector xp = x;
            Vector xm = x;
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (f.value(xp) - f.value(xm)) / (2.0 * h);
        }
        const double rel = (fd - g).norm() / std::max(g.norm(), 1e-8);
        c.margin(1e-6 - rel, std::to_string(t));
    }
    return c;
}

inline Check m_smoothness(const Objective& f, std::uint64_t seed, double scale = 1.0, int pairs = 100)
{
    Check c{"objectives.m_smoothness[" + f.name + "]"};
    std::mt19937_64 rng(seed);
    for (int t = 0; t < pairs; ++t) {
        Vector x = sample_point(f, rng, scale);
        Vector y = sample_point(f, rng, scale);
        const Vector h = y - x;
        const double rhs = f.value(x) + f.gradient(x).dot(h) + 0.5 * h.dot(f.smoothness.dense() * h) + 1e-10;
        c.margin(rhs - f.value(y), std::to_string(t));
    }
    return c;
}

// h^T hess h <= h^T M h for lsq_cos, hess = (A^T A - cos(<c,x>) cc^T)/m.
inline Check lsq_cos_hessian_domination(const Objective& f, std::uint64_t seed)
{
    Check c{"objectives.hessian_domination[" + f.name + "]"};
    if (!f.lsq_cos) {
        c.fail("not an lsq_cos objective");
        return c;
    }
    const auto& d = *f.lsq_cos;
    const double m = static_cast<double>(d.A.rows());
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 50; ++t) {
        const Vector x = detail::gaussian(f.dim, rng);
        const Vector h = detail::gaussian(f.dim, rng);
        const double Ah = (d.A * h).squaredNorm();
        const double ch = d.c.dot(h);
        const double hess = (Ah - std::cos(d.c.dot(x)) * ch * ch) / m;
        const double major = h.dot(f.smoothness.dense() * h);
        c.margin((major - hess) / std::max(1e-300, major) + 1e-12);
    }
    return c;
}

inline Check l1_prox_grid(std::uint64_t seed)
{
    Check c{"objectives.l1_prox_optimality"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    std::uniform_real_distribution<double> P(0.05, 1.5);
    for (int t = 0; t < 50; ++t) {
        const double lambda = P(rng);
        const double ell = P(rng) * 2.0;
        const double center = U(rng);
        const auto g = make_l1(lambda);
        const double v = g.prox(center, ell, 0);
        const auto obj = [&](double z) { return 0.5 * ell * (z - center) * (z - center) + lambda * std::abs(z); };
        const double fv = obj(v);
        double worst = std::numeric_limits<double>::infinity();
        for (int k = -500; k < 500; ++k) worst = std::min(worst, obj(v + 1e-3 * k) - fv);
        c.margin(worst + 1e-14);
    }
    return c;
}

inline Check gen_instance_structure(Index m, Index n, std::uint64_t seed)
{
    Check c{"objectives.gen_instance_structure"};
    const auto a = gen_instance(m, n, seed);
    const auto b = gen_instance(m, n, seed);
    c.margin(a.A == b.A && a.b == b.b && a.c == b.c ? 0.0 : -1.0, "determinism");
    Eigen::JacobiSVD<Matrix> svd(a.A);
    const Vector want = prescribed_singular_values(m, n);
    c.margin(1e-8 - (svd.singularValues() - want).cwiseAbs().maxCoeff(), "singular values");
    const Objective f = make_lsq_cos(a.A, a.b, a.c, false);
    const double expect = std::cos(a.c.dot(a.y)) / static_cast<double>(m);
    c.margin(1e-14 - std::abs(f.value(a.y) - expect), "f(y)");
    c.margin(1e-12 - std::abs(a.y.norm() - 1.0), "|y|");
    c.margin(1e-12 - std::abs(a.c.norm() - 1.0), "|c|");
    return c;
}

// -------------------------------------------------------------------------
// prox engine
// -------------------------------------------------------------------------

inline Check certificate_identities(const CompositeProblem& p, std::uint64_t seed, const std::string& label)
{
    Check c{"prox.certificate_identities[" + label + "]"};
    std::mt19937_64 rng(seed);
    const StepModel model = default_model(p);
    for (int t = 0; t < 30; ++t) {
        const Vector x = sample_point(p.f, rng, 1.0);
        const Vector g = p.f.gradient(x);
        const auto cert = certificate(p, x, g, model);
        double sum = 0.0;
        for (Index i = 0; i < p.dim(); ++i) {
            const double li = p.smooth() ? 0.5 * g[i] * g[i] : lambda_i(p, x, g, i, model.L);
            if (li < 0.0) c.fail("negative lambda_i");
            sum += li;
        }
        const double scale = std::max(cert.lambda_total, 1e-300);
        c.margin(1e-10 - std::abs(sum - cert.lambda_total) / scale, "separability");
        if (p.smooth()) c.margin(1e-12 - std::abs(cert.lambda_total - 0.5 * g.squaredNorm()) / scale, "smooth identity");
    }
    return c;
}

inline Check theta_monotone_diag(std::uint64_t seed)
{
    Check c{"prox.theta_monotone_under_inclusion"};
    std::mt19937_64 rng(seed);
    const Index n = 8;
    Vector d = detail::uniform_box(n, rng, 0.5, 5.0);
    Vector q = detail::gaussian(n, rng);
    const auto p = make_smooth_problem(make_quadratic(Matrix(d.asDiagonal()), q));
    for (int t = 0; t < 100; ++t) {
        const Vector x = detail::gaussian(n, rng);
        std::vector<Index> T;
        for (Index i = 0; i < n; ++i)
            if (rng() % 2) T.push_back(i);
        if (T.empty()) T.push_back(0);
        std::vector<Index> S;
        for (const Index i : T)
            if (rng() % 2) S.push_back(i);
        if (S.empty()) S.push_back(T.front());
        const double tS = proportion(p, x, CoordSet(S, n));
        const double tT = proportion(p, x, CoordSet(T, n));
        c.margin(tT - tS + 1e-15);
        if (tS < 0.0) c.fail("negative theta");
    }
    return c;
}

inline Check greedy_dominance(const CompositeProblem& p, std::uint64_t seed, const std::string& label)
{
    Check c{"prox.greedy_max_ge_mean[" + label + "]"};
    std::mt19937_64 rng(seed);
    const StepModel model = default_model(p);
    const Index n = p.dim();
    for (int t = 0; t < 50; ++t) {
        const Vector x = sample_point(p.f, rng, 1.0);
        const Vector g = p.f.gradient(x);
        const auto cert = certificate(p, x, g, model);
        Vector th(n);
        for (Index i = 0; i < n; ++i) {
            const Index one[1] = {i};
            th[i] = theta_of(p, g, cert, one, model);
        }
        Vector w = detail::uniform_box(n, rng, 0.0, 1.0);
        w /= w.sum();
        c.margin(th.maxCoeff() - w.dot(th) + 1e-15);
    }
    return c;
}

// Lower bound on the full-space model decrease for convex problems with a known minimizer.
inline Check lemma5_lower_bound(const CompositeProblem& p, std::uint64_t seed, const std::string& label, int points = 100)
{
    Check c{"prox.convex_decrease_lower_bound[" + label + "]"};
    if (!p.opt_value || !p.minimizer) {
        c.fail("needs a known minimizer");
        return c;
    }
    const StepModel model = StepModel::scalar(p.L_scalar);
    const double L = model.L;
    const double lF = p.strong_convexity_F().value_or(0.0);
    const double lf = p.f.strong_convexity.value_or(0.0);
    std::mt19937_64 rng(seed);
    for (int t = 0; t < points; ++t) {
        const Vector x = *p.minimizer + detail::gaussian(p.dim(), rng, 1.0);
        const double xi = p.F(x) - *p.opt_value;
        const double r2 = (x - *p.minimizer).squaredNorm();
        if (!(xi > 0.0) || !(r2 > 0.0)) continue;
        const double lhs = certificate(p, x, model).lambda_total / L;
        const double a = xi + 0.5 * lF * r2;
        const double rhs = std::min(0.5 * xi, a * a / (2.0 * (lF - lf + L) * r2));
        c.margin(detail::rel_margin(lhs, rhs, 1e-10));
    }
    return c;
}

/**
 * lambda_total of an l1 problem against a per-coordinate grid search over
 * v in [-3, 3] with step 1e-5.
 */
inline Check lambda_grid_oracle(Index n, int points, std::uint64_t seed)
{
    Check c{"prox.lambda_grid_oracle"};
    const auto inst = gen_instance(4 * n, n, seed, 1.0 / (8.0 * n));
    const auto p = to_problem(inst);
    const double L = p.L_scalar;
    const double lam = inst.lambda;
    std::mt19937_64 rng(seed + 17);
    int done = 0;
    for (int attempt = 0; done < points && attempt < 50 * points; ++attempt) {
        const Vector x = detail::uniform_box(n, rng, -1.0, 1.0);
        const Vector g = p.f.gradient(x);
        bool in_range = true;
        for (Index i = 0; i < n; ++i) {
            const double v = soft_threshold(x[i] - g[i] / L, lam / L) - x[i];
            if (std::abs(v) > 2.9) in_range = false;
        }
        if (!in_range) continue;
        ++done;
        double oracle = 0.0;
        for (Index i = 0; i < n; ++i) {
            double best = 0.0;
            for (long k = -300000; k <= 300000; ++k) {
                const double v = 1e-5 * static_cast<double>(k);
                const double val = g[i] * v + 0.5 * L * v * v + lam * (std::abs(x[i] + v) - std::abs(x[i]));
                best = std::min(best, val);
            }
            oracle += -L * best;
        }
        const double mine = certificate(p, x, StepModel::scalar(L)).lambda_total;
        c.margin(1e-4 - std::abs(mine - oracle) / std::max(oracle, 1e-300), std::to_string(done));
    }
    if (done < points) c.fail("could not place enough points inside the grid range");
    return c;
}

// -------------------------------------------------------------------------
// selection: proportion lower bounds
// -------------------------------------------------------------------------

struct ThetaSuiteOptions
{
    Index m = 40;
    Index n = 12;
    int instances = 3;
    int points = 50;
    std::vector<Index> taus = {2, 3, 4};
    std::uint64_t seed = 0;
};

/**
 * All proportion-function lower bounds: smooth rules on the matrix path and
 * non-smooth rules with theta evaluated at L_tau. One Check per bound.
 */
inline Suite theta_bounds(const ThetaSuiteOptions& o)
{
    Check uni{"selection.uniform_ge_1/(n max M_ii)"};
    Check imp{"selection.importance_ge_1/sum M_ii"};
    Check gre{"selection.greedy_ge_1/sum M_ii"};
    Check gre_imp{"selection.greedy_ge_importance"};
    Check nice{"selection.nice_ge_lambda_min(E[M_S^-1])"};
    Check gmb{"selection.greedymb_ge_nice"};
    Check ns_uni{"selection.nonsmooth_uniform_ge_1/(n L_1)"};
    Check ns_gre{"selection.nonsmooth_greedy_ge_1/(n L_1)"};
    Check ns_nice{"selection.nonsmooth_nice_ge_tau/(n L_tau)"};
    Check ns_gmb{"selection.nonsmooth_greedymb_ge_tau/(n L_tau)"};

    for (int inst_id = 0; inst_id < o.instances; ++inst_id) {
        const std::uint64_t s = o.seed + 1000 * static_cast<std::uint64_t>(inst_id);
        const auto inst = gen_instance(o.m, o.n, s);
        const auto ps = to_problem(inst);
        auto inst_ns = inst;
        inst_ns.lambda = 1.0 / (2.0 * static_cast<double>(o.m));
        const auto pn = to_problem(inst_ns);
        const SymMatrix& M = ps.f.smoothness;
        const double nd = static_cast<double>(o.n);
        const double c_uni = 1.0 / (nd * M.diag().maxCoeff());
        const double c_imp = 1.0 / M.diag().sum();
        std::vector<double> c_nice;
        for (const Index tau : o.taus) {
            c_nice.push_back(eig_extremes(expected_inverse_matrix(M, tau).value).lambda_min);
        }
        std::vector<StepModel> ns_models;
        for (const Index tau : o.taus) ns_models.push_back(StepModel::scalar(L_tau(M, tau).value));
        const StepModel L1 = StepModel::scalar(L_tau(M, 1).value);

        std::mt19937_64 rng(s + 7);
        for (int t = 0; t < o.points; ++t) {
            const Vector x = detail::gaussian(o.n, rng, 1.0);
            const std::string where = "instance " + std::to_string(inst_id) + " point " + std::to_string(t);
            const auto M_model = StepModel::matrix();
            const double lam_s = certificate(ps, x, M_model).lambda_total;
            if (lam_s > 0.0) {
                const double eu = exact_expected_theta(parse_rule("uniform"), ps, x, M_model).value;
                const double ei = exact_expected_theta(parse_rule("importance"), ps, x, M_model).value;
                const double eg = exact_expected_theta(parse_rule("greedy"), ps, x, M_model).value;
                uni.margin(detail::rel_margin(eu, c_uni), where);
                imp.margin(detail::rel_margin(ei, c_imp), where);
                gre.margin(detail::rel_margin(eg, c_imp), where);
                gre_imp.margin(detail::rel_margin(eg, ei), where);
                for (std::size_t j = 0; j < o.taus.size(); ++j) {
                    BlockRule r_nice{RuleKind::tau_nice, o.taus[j], 0};
                    BlockRule r_gmb{RuleKind::greedy_minibatch, o.taus[j], 0};
                    const auto en = exact_expected_theta(r_nice, ps, x, M_model);
                    const double eg2 = exact_expected_theta(r_gmb, ps, x, M_model).value;
                    if (!en.exact) nice.fail("expectation not enumerated");
                    nice.margin(detail::rel_margin(en.value, c_nice[j]), where + " tau " + std::to_string(o.taus[j]));
                    gmb.margin(detail::rel_margin(eg2, en.value), where + " tau " + std::to_string(o.taus[j]));
                }
            }
            const double lam_n = certificate(pn, x, L1).lambda_total;
            if (lam_n > 0.0) {
                const double target1 = 1.0 / (nd * L1.L);
                ns_uni.margin(detail::rel_margin(exact_expected_theta(parse_rule("uniform"), pn, x, L1).value, target1), where);
                ns_gre.margin(detail::rel_margin(exact_expected_theta(parse_rule("greedy"), pn, x, L1).value, target1), where);
                for (std::size_t j = 0; j < o.taus.size(); ++j) {
                    const StepModel& mdl = ns_models[j];
                    const double target = static_cast<double>(o.taus[j]) / (nd * mdl.L);
                    BlockRule r_nice{RuleKind::tau_nice, o.taus[j], 0};
                    BlockRule r_gmb{RuleKind::greedy_minibatch, o.taus[j], 0};
                    ns_nice.margin(detail::rel_margin(exact_expected_theta(r_nice, pn, x, mdl).value, target), where);
                    ns_gmb.margin(detail::rel_margin(exact_expected_theta(r_gmb, pn, x, mdl).value, target), where);
                }
            }
        }
    }
    return {uni, imp, gre, gre_imp, nice, gmb, ns_uni, ns_gre, ns_nice, ns_gmb};
}

inline Check selection_frequencies(std::uint64_t seed)
{
    Check c{"selection.sampling_frequencies"};
    {
        const auto p = make_smooth_problem(make_quadratic(Matrix::Identity(4, 4), Vector::Zero(4)));
        Selector sel(BlockRule{RuleKind::tau_nice, 2, seed}, p, StepModel::matrix());
        const Vector z = Vector::Zero(4);
        std::vector<int> hits(4, 0);
        const int draws = 100000;
        for (int t = 0; t < draws; ++t)
            for (const Index i : sel.select({z, z, z, t}).S) ++hits[static_cast<std::size_t>(i)];
        for (int i = 0; i < 4; ++i) c.margin(0.01 - std::abs(hits[static_cast<std::size_t>(i)] / double(draws) - 0.5), "nice");
    }
    {
        Matrix D = Matrix::Zero(2, 2);
        D(0, 0) = 1.0;
        D(1, 1) = 3.0;
        const auto p = make_smooth_problem(make_quadratic(D, Vector::Zero(2)));
        Selector sel(BlockRule{RuleKind::importance_coord, 1, seed}, p, StepModel::matrix());
        const Vector z = Vector::Zero(2);
        int first = 0;
        const int draws = 100000;
        for (int t = 0; t < draws; ++t) first += sel.select({z, z, z, t}).S[0] == 0 ? 1 : 0;
        c.margin(0.01 - std::abs(first / double(draws) - 0.25), "importance");
    }
    return c;
}

inline Check selection_determinism(const CompositeProblem& p, std::uint64_t seed)
{
    Check c{"selection.determinism"};
    const Vector x = Vector::Zero(p.dim());
    const Vector g = p.f.gradient(x);
    const StepModel model = default_model(p);
    const auto cert = certificate(p, x, g, model);
    for (const auto* spec : {"uniform", "nice:3", "importance"}) {
        if (std::string(spec) == "importance" && !model.is_matrix()) continue;
        Selector a(parse_rule(spec, seed), p, model);
        Selector b(parse_rule(spec, seed), p, model);
        for (Index k = 0; k < 500; ++k) {
            const SelectionContext ctx{x, g, cert.lambda_per_coord, k};
            if (!(a.select(ctx).S == b.select(ctx).S)) {
                c.fail(std::string("streams differ for ") + spec);
                break;
            }
        }
        c.margin(0.0);
    }
    return c;
}

// -------------------------------------------------------------------------
// descent
// -------------------------------------------------------------------------

struct RunSuiteResult
{
    Check one_step;
    Check monotone;
    Check product;
    double seconds = 0.0;
};

/**
 * Runs each rule with diagnostics and folds the per-run trace checks into
 * three suite-level checks.
 */
inline RunSuiteResult lemma4_runs(const CompositeProblem& p, const std::vector<std::string>& rules, std::uint64_t K,
                                  std::uint64_t seed, const std::string& label, std::optional<Vector> x0 = std::nullopt)
{
    RunSuiteResult out{{"descent.one_step_bound[" + label + "]"},
                       {"descent.monotone[" + label + "]"},
                       {"descent.k_step_product[" + label + "]"}};
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        RunConfig cfg;
        cfg.max_iters = K;
        cfg.record_diagnostics = true;
        cfg.x0 = x0;
        const auto rule = parse_rule(rules[i], seed + i);
        try {
            const auto r = run(p, rule, cfg);
            const auto rep = verify_trace(r);
            out.one_step.margin(rep.get("one_step").worst_margin, rules[i]);
            out.monotone.margin(rep.get("monotone").worst_margin, rules[i]);
            out.product.margin(rep.get("k_step_product").worst_margin, rules[i]);
            if (!rep.get("one_step").pass) out.one_step.fail(rules[i] + ": " + rep.get("one_step").detail);
        } catch (const Error& e) {
            out.one_step.fail(rules[i] + ": " + e.what());
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

struct PolyakResult
{
    Check contraction{"descent.polyak_contraction"};
    Check iterations{"rates.polyak_iterations_le_prediction"};
};

/**
 * Full batch on f = 1/2 x^T H x with smoothness L * I, L = lambda_max(H),
 * for a random SPD H and for H = L * I.
 */
inline PolyakResult polyak_rate(Index n, std::uint64_t seed, double eps = 1e-10)
{
    PolyakResult out;
    for (int variant = 0; variant < 2; ++variant) {
        const double L = 4.0;
        const Matrix H = variant == 0 ? random_spd(n, 0.2, L, seed) : Matrix(L * Matrix::Identity(n, n));
        const auto p = make_smooth_problem(make_quadratic(H, Vector::Zero(n), QuadSmoothness::scalar));
        const auto ev = eig_extremes(SymMatrix(H));
        const double rate = 1.0 - ev.lambda_min / ev.lambda_max;
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(variant));
        RunConfig cfg;
        cfg.x0 = detail::gaussian(n, rng);
        cfg.max_iters = 100000;
        cfg.stop_on = StopOn::gap;
        cfg.epsilon = eps;
        cfg.record_diagnostics = true;
        const auto r = run(p, BlockRule{}, cfg);
        const std::string tag = variant == 0 ? "random SPD" : "L*I";
        for (std::size_t k = 0; k < r.trace.size(); ++k) {
            const double xi = *r.trace[k].xi;
            const double xi_next = k + 1 < r.trace.size() ? *r.trace[k + 1].xi : *r.final_xi;
            if (xi <= 0.0) continue;
            out.contraction.margin(rate + 1e-9 - xi_next / xi, tag + " k=" + std::to_string(k));
        }
        const double xi0 = p.F(*cfg.x0) - *p.opt_value;
        const auto rb = predict_K(BlockRule{}, FunctionClass::strongly_pl(ev.lambda_min), p, StepModel::matrix(), xi0);
        const double predicted = static_cast<double>(rb.K(eps));
        const double observed = static_cast<double>(r.trace.size());
        if (r.termination != Termination::reached_gap && r.termination != Termination::at_optimum) {
            out.iterations.fail(tag + ": did not reach the target gap");
        }
        out.iterations.margin(predicted - observed, tag);
    }
    return out;
}

inline Check smooth_nonsmooth_consistency(std::uint64_t seed)
{
    Check c{"descent.zero_l1_matches_smooth"};
    const Index n = 8;
    const Matrix H = random_spd(n, 0.5, 10.0, seed);
    std::mt19937_64 rng(seed);
    const Vector q = detail::gaussian(n, rng);
    const double L = eig_extremes(SymMatrix(H)).lambda_max;
    const auto smooth = make_smooth_problem(make_quadratic(H, q, QuadSmoothness::scalar));
    auto l1zero = make_problem(make_quadratic(H, q, QuadSmoothness::scalar), make_l1(0.0));
    l1zero.step = StepKind::scalar;
    for (const auto* spec : {"full", "uniform", "greedy", "nice:3", "greedymb:3", "cyclic"}) {
        RunConfig cfg;
        cfg.max_iters = 200;
        const auto rule = parse_rule(spec, seed);
        const auto a = run(smooth, rule, cfg);
        const auto b = run(l1zero, rule, cfg, StepModel::scalar(L));
        bool same = a.trace.size() == b.trace.size() && a.x == b.x;
        for (std::size_t k = 0; same && k < a.trace.size(); ++k) {
            same = a.trace[k].F == b.trace[k].F && a.trace[k].S == b.trace[k].S;
        }
        c.margin(same ? 0.0 : -1.0, spec);
    }
    return c;
}

inline Check run_determinism(const CompositeProblem& p, std::uint64_t seed)
{
    Check c{"descent.determinism"};
    for (const auto* spec : {"uniform", "nice:3"}) {
        RunConfig cfg;
        cfg.max_iters = 300;
        cfg.record_diagnostics = p.opt_value.has_value();
        const auto a = run(p, parse_rule(spec, seed), cfg);
        const auto b = run(p, parse_rule(spec, seed), cfg);
        bool same = a.x == b.x && a.trace.size() == b.trace.size();
        for (std::size_t k = 0; same && k < a.trace.size(); ++k) same = a.trace[k].F == b.trace[k].F && a.trace[k].S == b.trace[k].S;
        c.margin(same ? 0.0 : -1.0, spec);
    }
    return c;
}

// Sequence recursion instantiated from a convex full-batch run:
// alpha_k = xi_k, beta_k = 1 / (2 L |x^k - x*|^2).
inline Check wpl_recursion_from_run(std::uint64_t seed)
{
    Check c{"descent.wpl_recursion_sequence_bound"};
    const Index n = 6;
    const Matrix H = random_spd(n, 0.01, 1.0, seed);
    std::mt19937_64 rng(seed);
    const auto p = make_smooth_problem(make_quadratic(H, detail::gaussian(n, rng), QuadSmoothness::scalar));
    RunConfig cfg;
    cfg.max_iters = 400;
    cfg.keep_iterates = true;
    cfg.record_diagnostics = true;
    const auto r = run(p, BlockRule{}, cfg);
    std::vector<double> alpha;
    std::vector<double> beta;
    for (std::size_t k = 0; k < r.iterates.size(); ++k) {
        const double xi = p.F(r.iterates[k]) - *p.opt_value;
        const double d2 = (r.iterates[k] - *p.minimizer).squaredNorm();
        if (!(xi > 1e-13) || !(d2 > 0.0)) break;
        alpha.push_back(xi);
        beta.push_back(1.0 / (2.0 * p.L_scalar * d2));
    }
    const auto sc = sequence_bound_check(alpha, beta, 1e-9);
    if (sc.precondition_violated_at) c.fail("recursion violated at t=" + std::to_string(*sc.precondition_violated_at));
    c.margin(sc.worst_margin);
    return c;
}

// -------------------------------------------------------------------------
// rates
// -------------------------------------------------------------------------

inline Check L_tau_identities(std::uint64_t seed)
{
    Check c{"rates.L_tau_identities"};
    for (std::uint64_t s = 0; s < 5; ++s) {
        const SymMatrix M(random_spd(6, 0.1, 10.0, seed + s));
        c.margin(L_tau(M, 1).value == M.diag().maxCoeff() ? 0.0 : -1.0, "L_1");
        c.margin(L_tau(M, 6).value == eig_extremes(M).lambda_max ? 0.0 : -1.0, "L_n");
        Vector d = M.diag();
        std::sort(d.data(), d.data() + d.size(), std::greater<>());
        const double lt = L_tau(M, 3).value;
        c.margin(d.head(3).sum() - lt, "trace bound");
        c.margin(eig_extremes(M).lambda_max * (1 + 1e-12) - lt, "interlacing");
    }
    return c;
}

inline Check eso_vs_expected_inverse(std::uint64_t seed)
{
    Check c{"rates.eso_bound_le_lambda_min"};
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 10; ++t) {
        Matrix A(5, 3);
        for (Index j = 0; j < 3; ++j) A.col(j) = detail::gaussian(5, rng);
        const SymMatrix M(A.transpose() * A);
        for (Index tau = 1; tau <= 3; ++tau) {
            const double lmin = eig_extremes(expected_inverse_matrix(M, tau).value).lambda_min;
            const double eso = eso_lower_bound(eso_v(A, tau));
            c.margin(detail::rel_margin(lmin, eso, 1e-12));
        }
    }
    return c;
}

inline Check predict_K_monotone(const CompositeProblem& p)
{
    Check c{"rates.predict_K_monotone"};
    for (const auto* spec : {"full", "uniform", "nice:2"}) {
        const auto rule = parse_rule(spec);
        for (const auto& cls : {FunctionClass::strongly_pl(0.3), FunctionClass::weakly_pl(0.2), FunctionClass::general()}) {
            const auto rb = predict_K(rule, cls, p, step_model_for(p, rule), 1.0);
            std::uint64_t prev = 0;
            for (double eps = 0.9; eps > 1e-9; eps /= 3.0) {
                const auto k = rb.K(eps);
                c.margin(k >= prev ? 0.0 : -1.0, spec);
                prev = k;
            }
            c.margin(rb.K(1.0) == 0 ? 0.0 : -1.0, "eps = xi0");
        }
    }
    // larger c never yields a larger K: compare uniform (1/(n max M_ii)) with full (1/lambda_max(M)).
    const auto full = predict_K(parse_rule("full"), FunctionClass::general(), p, StepModel::matrix(), 1.0);
    const auto uni = predict_K(parse_rule("uniform"), FunctionClass::general(), p, StepModel::matrix(), 1.0);
    if (full.constant.value >= uni.constant.value) c.margin(full.K(1e-4) <= uni.K(1e-4) ? 0.0 : -1.0, "constant order");
    return c;
}

/**
 * Observed iterations to eps never exceed the strongly-PL prediction on a
 * strongly convex quadratic, for every rule with a guarantee.
 */
inline Check empirical_le_predicted(Index n, std::uint64_t seed, double eps = 1e-6)
{
    Check c{"rates.observed_K_le_predicted"};
    auto p = make_random_quadratic(n, 20.0, seed, 0.0);
    const Vector x0 = Vector::Zero(n);
    const double xi0 = p.F(x0) - *p.opt_value;
    const double mu = *p.f.strong_convexity;
    for (const auto* spec : {"full", "uniform", "importance", "greedy", "nice:2", "greedymb:2"}) {
        const auto rule = parse_rule(spec, seed);
        const auto model = step_model_for(p, rule);
        const auto rb = predict_K(rule, FunctionClass::strongly_pl(mu), p, model, xi0);
        RunConfig cfg;
        cfg.max_iters = rb.K(eps) + 1;
        cfg.stop_on = StopOn::gap;
        cfg.epsilon = eps;
        const auto r = run(p, rule, cfg, model);
        const double observed = static_cast<double>(r.trace.size());
        if (r.termination != Termination::reached_gap) c.fail(std::string(spec) + " did not reach eps");
        c.margin((static_cast<double>(rb.K(eps)) - observed) / static_cast<double>(rb.K(eps)), spec);
    }
    return c;
}

/**
 * Strong-convexity forcing bound: mu(x) >= min{L/2, L lambda_F / (lambda_F - lambda_f + L)} - 1e-8
 * on quadratic + l1 instances with analytically certified lambda_f = lambda_F = lambda_min(H).
 */
inline Check theorem5(int instances, int points, std::uint64_t seed, Index n = 8)
{
    Check c{"rates.strongly_convex_forcing_bound"};
    for (int t = 0; t < instances; ++t) {
        const std::uint64_t s = seed + 31 * static_cast<std::uint64_t>(t);
        auto p = make_random_quadratic(n, 2.0 + t, s, 0.05 + 0.05 * (t % 5));
        attach_reference_optimum(p);
        const StepModel model = StepModel::scalar(p.L_scalar);
        const double bound = strongly_convex_mu(p, model.L);
        std::mt19937_64 rng(s + 3);
        for (int k = 0; k < points; ++k) {
            const Vector x = *p.minimizer + detail::gaussian(n, rng, 1.0 + (k % 4));
            const double Fx = p.F(x);
            const double xi = Fx - *p.opt_value;
            if (!(xi > 1e-9)) continue;
            const double mu = certificate(p, x, model).lambda_total / xi;
            c.margin(mu - (bound - 1e-8), "instance " + std::to_string(t));
        }
    }
    return c;
}

namespace detail {

// Random point of the level set {F <= F(x0)} by bisection along a random ray from x*.
inline Vector level_set_point(const CompositeProblem& p, double F0, std::mt19937_64& rng)
{
    Vector d = gaussian(p.dim(), rng);
    d.normalize();
    double lo = 0.0;
    double hi = 1.0;
    while (p.F(*p.minimizer + hi * d) <= F0) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (p.F(*p.minimizer + mid * d) <= F0) lo = mid;
        else hi = mid;
    }
    std::uniform_real_distribution<double> U(0.05, 1.0);
    return *p.minimizer + U(rng) * lo * d;
}

} // namespace detail

/**
 * Weak-convexity forcing bound mu(x) >= xi(x) min{L/(2 xi0), 1/(2R^2)} at
 * sampled level-set points, with R from the rates module.
 */
inline Check theorem8(int instances, int points, std::uint64_t seed, Index n = 6)
{
    Check c{"rates.weakly_convex_forcing_bound"};
    for (int t = 0; t < instances; ++t) {
        const std::uint64_t s = seed + 97 * static_cast<std::uint64_t>(t);
        const bool composite = t % 2 == 1;
        auto p = make_random_quadratic(n, 5.0 + 3 * t, s, composite ? 0.2 : 0.0);
        if (composite) attach_reference_optimum(p);
        std::mt19937_64 rng(s + 5);
        const Vector x0 = *p.minimizer + detail::gaussian(n, rng, 2.0);
        const StepModel model = composite ? StepModel::scalar(p.L_scalar) : StepModel::matrix();
        const double L = p.L_scalar;
        const auto est = weakly_convex_rho(p, x0, L, 2000, s);
        const double F0 = p.F(x0);
        for (int k = 0; k < points; ++k) {
            const Vector x = detail::level_set_point(p, F0, rng);
            const double xi = p.F(x) - *p.opt_value;
            if (!(xi > 1e-9)) continue;
            const double mu = certificate(p, x, model).lambda_total / xi;
            c.margin(detail::rel_margin(mu, xi * est.rho, 1e-10), "instance " + std::to_string(t));
        }
    }
    return c;
}

// |grad f(x)| |x| >= f(x) for f = x1^2 x2^2 on [-2, 2]^2.
inline Check wpl_product_square(int points, std::uint64_t seed)
{
    Check c{"rates.wpl1_product_square"};
    const auto f = make_product_square();
    std::mt19937_64 rng(seed);
    for (int t = 0; t < points; ++t) {
        const Vector x = detail::uniform_box(2, rng, -2.0, 2.0);
        c.margin(f.gradient(x).norm() * x.norm() - f.value(x) + 1e-10);
    }
    return c;
}

/**
 * The Huber product is not strongly PL: some grid point on [-50, 50]^2 has
 * |grad f|^2 / (2 f) < 1e-3. Passing means a witness was found.
 */
inline Check huber_not_strongly_pl()
{
    Check c{"rates.huber_product_strong_pl_witness"};
    const auto f = make_huber_product();
    const int half = 400;
    double best = std::numeric_limits<double>::infinity();
    for (int a = -half; a <= half; ++a) {
        for (int b = -half; b <= half; ++b) {
            // log-spaced magnitudes resolve both the origin and the far field
            const auto coord = [&](int k) {
                if (k == 0) return 0.0;
                const double mag = 1e-4 * std::pow(50.0 / 1e-4, (std::abs(k) - 1) / double(half - 1));
                return std::copysign(mag, double(k));
            };
            Vector x(2);
            x << coord(a), coord(b);
            const double fx = f.value(x);
            if (!(fx > 0.0)) continue;
            best = std::min(best, f.gradient(x).squaredNorm() / (2.0 * fx));
        }
    }
    c.margin(1e-3 - best);
    c.detail = "min mu on grid = " + std::to_string(best);
    return c;
}

struct PlateauResult
{
    Check check{"rates.nonconvex_disjunction_plateau"};
    std::uint64_t predicted_K = 0;
    std::uint64_t iterations = 0;
    double final_xi = 0.0;
    double min_lambda = 0.0;
    double seconds = 0.0;
};

/**
 * Full batch on the flat-inflection plateau, run up to K = predict_K with
 * early stop once either conclusion holds: xi <= eps or lambda <= eps.
 */
inline PlateauResult plateau_disjunction(double eps = 1e-6)
{
    PlateauResult out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = make_smooth_problem(make_plateau_1d(flat_inflection_c()));
    Vector x0 = Vector::Constant(1, -2.0);
    const double xi0 = p.F(x0) - *p.opt_value;
    const auto rb = predict_K(BlockRule{}, FunctionClass::general(), p, StepModel::matrix(), xi0);
    out.predicted_K = rb.K(eps);
    RunConfig cfg;
    cfg.max_iters = out.predicted_K;
    cfg.x0 = x0;
    cfg.record_diagnostics = true;
    cfg.stop_on = StopOn::certificate;
    cfg.epsilon = eps;
    const auto r = run(p, BlockRule{}, cfg);
    out.iterations = r.trace.size();
    out.final_xi = *r.final_xi;
    out.min_lambda = *r.final_lambda;
    for (const auto& row : r.trace) out.min_lambda = std::min(out.min_lambda, *row.lambda);
    const bool holds = out.final_xi <= eps || out.min_lambda <= eps;
    out.check.margin(holds ? std::max(eps - out.final_xi, eps - out.min_lambda) / eps : -1.0);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.check.detail = "K=" + std::to_string(out.predicted_K) + " ran " + std::to_string(out.iterations) +
                       " xi=" + std::to_string(out.final_xi) + " min lambda=" + std::to_string(out.min_lambda);
    return out;
}

/**
 * Random positive sequences that satisfy alpha^{t+1} <= (1 - alpha^t beta^t) alpha^t
 * obey alpha^k <= alpha^0 / (1 + alpha^0 sum beta^t).
 */
inline Check lemma3_sequences(int count, std::uint64_t seed)
{
    Check c{"descent.sequence_bound_random"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int s = 0; s < count; ++s) {
        const int len = 5 + static_cast<int>(rng() % 200);
        std::vector<double> alpha{0.01 + 10.0 * U(rng)};
        std::vector<double> beta;
        for (int t = 0; t < len; ++t) {
            // alpha^t beta^t < 1 keeps the recursion factor positive
            const double b = U(rng) * 0.999 / alpha.back();
            const double shrink = 0.01 + 0.99 * U(rng);
            beta.push_back(std::max(b, 1e-300));
            alpha.push_back(std::max((1.0 - alpha.back() * beta.back()) * alpha.back() * shrink, 1e-300));
        }
        const auto r = sequence_bound_check(alpha, beta);
        if (!r.pass) c.fail("sequence " + std::to_string(s));
        c.margin(r.worst_margin, std::to_string(s));
    }
    return c;
}

// -------------------------------------------------------------------------
// full invariant suite
// -------------------------------------------------------------------------

struct SuiteOptions
{
    std::uint64_t seed = 0;
    Index n = 12;
    Index m = 40;
    Index descent_m = 200;
    Index descent_n = 50;
    std::uint64_t descent_iters = 300;
    bool corrupt_smoothness = false;
};

inline Suite full_suite(const SuiteOptions& o)
{
    Suite s;
    const auto add = [&](Check c) { s.push_back(std::move(c)); };
    const auto inst = gen_instance(o.m, o.n, o.seed);
    const auto ps = to_problem(inst);
    auto inst_ns = inst;
    inst_ns.lambda = 1.0 / (2.0 * static_cast<double>(o.m));
    const auto pn_raw = to_problem(inst_ns);

    add(mask_embed_roundtrip(o.seed));
    add(principal_submatrices_spd(o.seed));
    add(rayleigh_bounds(o.seed));
    add(subset_counts());
    if (o.corrupt_smoothness) {
        Matrix bad = ps.f.smoothness.dense();
        bad(0, 0) = -1.0;
        add(smoothness_spd(SymMatrix(bad), "corrupted"));
    } else {
        add(smoothness_spd(ps.f.smoothness, "lsq_cos"));
    }

    const auto plateau = make_plateau_1d(flat_inflection_c());
    const auto quad = make_random_quadratic(o.n, 50.0, o.seed, 0.0);
    for (const Objective* f : {&ps.f, &plateau, &quad.f}) {
        add(gradient_fd(*f, o.seed));
        add(m_smoothness(*f, o.seed));
    }
    const auto prod = make_product_square();
    const auto hub = make_huber_product();
    add(gradient_fd(prod, o.seed));
    add(m_smoothness(prod, o.seed));
    add(gradient_fd(hub, o.seed));
    add(m_smoothness(hub, o.seed));
    add(lsq_cos_hessian_domination(ps.f, o.seed));
    add(l1_prox_grid(o.seed));
    add(gen_instance_structure(o.m, o.n, o.seed));

    add(certificate_identities(ps, o.seed, "smooth"));
    add(certificate_identities(pn_raw, o.seed, "l1"));
    add(theta_monotone_diag(o.seed));
    add(greedy_dominance(ps, o.seed, "smooth"));
    add(greedy_dominance(pn_raw, o.seed, "l1"));
    {
        auto qc = make_random_quadratic(6, 8.0, o.seed, 0.1);
        attach_reference_optimum(qc);
        add(lemma5_lower_bound(qc, o.seed, "quadratic+l1"));
        const auto qs = make_random_quadratic(6, 8.0, o.seed + 1, 0.0);
        add(lemma5_lower_bound(qs, o.seed, "quadratic"));
    }
    add(lambda_grid_oracle(std::min<Index>(o.n, 10), 5, o.seed));

    ThetaSuiteOptions to;
    to.m = o.m;
    to.n = o.n;
    to.seed = o.seed;
    to.instances = 1;
    to.points = 10;
    for (auto& c : theta_bounds(to)) add(std::move(c));
    add(selection_frequencies(o.seed));
    add(selection_determinism(ps, o.seed));

    // descent runs use the default experiment size, where the gap stays above
    // the rounding floor of F for the whole run
    const auto dinst = gen_instance(o.descent_m, o.descent_n, o.seed);
    const auto dps = to_problem(dinst);
    auto dinst_ns = dinst;
    dinst_ns.lambda = 1.0 / (2.0 * static_cast<double>(o.descent_m));
    auto dpn = to_problem(dinst_ns);
    const Vector dx0 = generated_start(o.descent_n, o.seed);
    const std::vector<std::string> smooth_rules{"full", "uniform", "importance", "greedy", "cyclic", "nice:3", "greedymb:3"};
    const std::vector<std::string> ns_rules{"full", "uniform", "greedy", "cyclic", "nice:3", "greedymb:3"};
    {
        auto r = lemma4_runs(dps, smooth_rules, o.descent_iters, o.seed, "smooth", dx0);
        add(r.one_step);
        add(r.monotone);
        add(r.product);
    }
    {
        dpn.opt_value = reference_optimum(dpn, 20000, dx0).first;
        for (const auto& spec : ns_rules) {
            RunConfig cfg;
            cfg.max_iters = o.descent_iters;
            cfg.x0 = dx0;
            dpn.opt_value = std::min(*dpn.opt_value, run(dpn, parse_rule(spec, o.seed), cfg).final_F);
        }
        dpn.opt_empirical = true;
        auto r = lemma4_runs(dpn, ns_rules, o.descent_iters, o.seed, "l1", dx0);
        add(r.one_step);
        add(r.monotone);
        add(r.product);
    }
    {
        auto pr = polyak_rate(10, o.seed);
        add(pr.contraction);
        add(pr.iterations);
    }
    add(smooth_nonsmooth_consistency(o.seed));
    add(run_determinism(dps, o.seed));
    add(wpl_recursion_from_run(o.seed));
    add(lemma3_sequences(100, o.seed));

    add(L_tau_identities(o.seed));
    add(eso_vs_expected_inverse(o.seed));
    add(predict_K_monotone(ps));
    add(empirical_le_predicted(6, o.seed));
    add(theorem5(5, 40, o.seed));
    add(theorem8(4, 40, o.seed));
    add(wpl_product_square(10000, o.seed));
    add(huber_not_strongly_pl());
    add(plateau_disjunction().check);
    return s;
}

} // namespace bcd::checks
