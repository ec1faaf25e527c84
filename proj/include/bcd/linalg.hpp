#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <bcd/errors.hpp>

namespace bcd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Default cap on the number of subsets any exact enumeration may visit.
inline constexpr std::uint64_t default_enumeration_budget = 2'000'000;

/**
 * A non-empty, strictly increasing set of 0-based coordinate indices in
 * [0, ambient_dim). User-facing text uses 1-based indices; see to_string().
 */
class CoordSet
{
public:
    CoordSet(std::vector<Index> indices, Index ambient_dim) :
        indices_(std::move(indices)), n_(ambient_dim)
    {
        if (indices_.empty()) {
            throw InvalidSetError("coordinate set must be non-empty");
        }
        for (std::size_t j = 0; j < indices_.size(); ++j) {
            const auto i = indices_[j];
            if (i < 0 || i >= n_) {
                throw InvalidSetError(
                    "coordinate index " + std::to_string(i + 1) +
                    " outside [1, " + std::to_string(n_) + "]");
            }
            if (j > 0 && indices_[j - 1] >= i) {
                throw InvalidSetError("coordinate indices must be strictly increasing");
            }
        }
    }

    static CoordSet full(Index n)
    {
        std::vector<Index> idx(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        return CoordSet(std::move(idx), n);
    }

    static CoordSet single(Index i, Index n) { return CoordSet({i}, n); }

    // Accepts arbitrary order and duplicates; sorts and dedups first.
    static CoordSet from_unsorted(std::vector<Index> idx, Index n)
    {
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        return CoordSet(std::move(idx), n);
    }

    // Parses a `;`-joined list of 1-based indices, e.g. "1;3".
    static CoordSet parse_one_based(const std::string& text, Index n)
    {
        std::vector<Index> idx;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ';')) {
            if (tok.empty()) continue;
            idx.push_back(static_cast<Index>(std::stoll(tok)) - 1);
        }
        return CoordSet(std::move(idx), n);
    }

    Index size() const noexcept { return static_cast<Index>(indices_.size()); }
    Index ambient_dim() const noexcept { return n_; }
    Index operator[](Index j) const { return indices_[static_cast<std::size_t>(j)]; }
    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }
    std::span<const Index> indices() const noexcept { return indices_; }
    bool is_full() const noexcept { return size() == n_; }

    bool contains(Index i) const
    {
        return std::binary_search(indices_.begin(), indices_.end(), i);
    }

    std::string to_string() const
    {
        std::string out;
        for (std::size_t j = 0; j < indices_.size(); ++j) {
            if (j) out += ';';
            out += std::to_string(indices_[j] + 1);
        }
        return out;
    }

    friend bool operator==(const CoordSet&, const CoordSet&) = default;

private:
    std::vector<Index> indices_;
    Index n_;
};

/**
 * Dense symmetric matrix. Construction checks symmetry to 1e-12 relative;
 * positive definiteness is checked lazily by the factorizations.
 */
class SymMatrix
{
public:
    SymMatrix() = default;

    explicit SymMatrix(Matrix m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols()) {
            throw SizeMismatchError("symmetric matrix must be square");
        }
        const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
        if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw SizeMismatchError("matrix is not symmetric");
        }
        // store the exactly symmetric part
        m_ = 0.5 * (m_ + m_.transpose()).eval();
    }

    static SymMatrix identity(Index n, double scale = 1.0)
    {
        return SymMatrix(scale * Matrix::Identity(n, n));
    }

    static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

    Index order() const noexcept { return m_.rows(); }
    double operator()(Index i, Index j) const { return m_(i, j); }
    const Matrix& dense() const noexcept { return m_; }
    Vector diag() const { return m_.diagonal(); }

    bool is_diagonal() const
    {
        for (Index j = 0; j < m_.cols(); ++j)
            for (Index i = 0; i < m_.rows(); ++i)
                if (i != j && m_(i, j) != 0.0) return false;
        return true;
    }

private:
    Matrix m_;
};

inline void check_set_for(const CoordSet& S, Index n)
{
    if (S.ambient_dim() != n) {
        throw InvalidSetError(
            "coordinate set built for dimension " + std::to_string(S.ambient_dim()) +
            " used with dimension " + std::to_string(n));
    }
}

// x_S: the |S| entries of x indexed by S.
inline Vector mask_vector(const Vector& x, const CoordSet& S)
{
    check_set_for(S, x.size());
    Vector out(S.size());
    for (Index j = 0; j < S.size(); ++j) out[j] = x[S[j]];
    return out;
}

// u placed on S inside an n-vector of zeros (x_[S] notation).
inline Vector embed_vector(const Vector& u, const CoordSet& S, Index n)
{
    check_set_for(S, n);
    if (u.size() != S.size()) {
        throw SizeMismatchError(
            "embed: vector of length " + std::to_string(u.size()) +
            " does not match |S| = " + std::to_string(S.size()));
    }
    Vector out = Vector::Zero(n);
    for (Index j = 0; j < S.size(); ++j) out[S[j]] = u[j];
    return out;
}

// Entrywise extraction M_S; works on any square matrix, symmetric or not.
inline Matrix principal_submatrix(const Matrix& M, std::span<const Index> S)
{
    const auto k = static_cast<Index>(S.size());
    Matrix out(k, k);
    for (Index c = 0; c < k; ++c)
        for (Index r = 0; r < k; ++r)
            out(r, c) = M(S[static_cast<std::size_t>(r)], S[static_cast<std::size_t>(c)]);
    return out;
}

inline SymMatrix principal_submatrix(const SymMatrix& M, const CoordSet& S)
{
    check_set_for(S, M.order());
    return SymMatrix(principal_submatrix(M.dense(), S.indices()));
}

// Embeds a |S|x|S| block on rows/cols S of an n x n zero matrix.
inline Matrix embed_matrix(const Matrix& block, const CoordSet& S, Index n)
{
    check_set_for(S, n);
    Matrix out = Matrix::Zero(n, n);
    for (Index c = 0; c < S.size(); ++c)
        for (Index r = 0; r < S.size(); ++r)
            out(S[r], S[c]) = block(r, c);
    return out;
}

/**
 * Solves M y = rhs for symmetric positive definite M by Cholesky.
 * Diagonal systems are divided through directly so that a diagonal M and
 * a scalar step L produce bit-identical steps.
 */
inline Vector solve_spd(const SymMatrix& M, const Vector& rhs)
{
    if (rhs.size() != M.order()) {
        throw SizeMismatchError("solve_spd: right-hand side length mismatch");
    }
    if (M.is_diagonal()) {
        Vector y(rhs.size());
        for (Index i = 0; i < rhs.size(); ++i) {
            const double d = M(i, i);
            if (!(d > 0.0)) {
                throw NotPositiveDefiniteError("solve_spd: non-positive diagonal entry");
            }
            y[i] = rhs[i] / d;
        }
        return y;
    }
    Eigen::LLT<Matrix> llt(M.dense());
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefiniteError("solve_spd: Cholesky factorization failed");
    }
    return llt.solve(rhs);
}

// True iff the Cholesky factorization of M succeeds.
inline bool is_positive_definite(const SymMatrix& M)
{
    if (M.order() == 0) return false;
    Eigen::LLT<Matrix> llt(M.dense());
    return llt.info() == Eigen::Success;
}

struct EigExtremes
{
    double lambda_min;
    double lambda_max;
};

// Extreme eigenvalues by Householder tridiagonalization + implicit QR.
inline EigExtremes eig_extremes(const SymMatrix& M)
{
    if (M.order() == 0) throw SizeMismatchError("eig_extremes: empty matrix");
    if (M.order() == 1) return {M(0, 0), M(0, 0)};
    Eigen::SelfAdjointEigenSolver<Matrix> es(M.dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericError("eig_extremes: eigenvalue iteration did not converge");
    }
    const auto& ev = es.eigenvalues();
    return {ev[0], ev[ev.size() - 1]};
}

// C(n, k), saturating at uint64 max.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // r * num / i is exact at every step; guard the multiply
        if (r > std::numeric_limits<std::uint64_t>::max() / num) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        r = r * num / i;
    }
    return r;
}

inline void check_enumeration(Index n, Index tau, std::uint64_t budget)
{
    if (tau < 1 || tau > n) {
        throw InvalidSetError(
            "subset size " + std::to_string(tau) + " outside [1, " + std::to_string(n) + "]");
    }
    const auto count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(tau));
    if (count > budget) {
        throw EnumerationTooLargeError(
            "C(" + std::to_string(n) + "," + std::to_string(tau) + ") = " +
            std::to_string(count) + " exceeds enumeration budget " + std::to_string(budget));
    }
}

/**
 * Calls fn(span<const Index>) for every cardinality-tau subset of [0, n)
 * in lexicographic order. Throws EnumerationTooLargeError before visiting
 * anything if C(n, tau) exceeds the budget.
 */
template <class Fn>
void for_each_subset(Index n, Index tau, Fn&& fn, std::uint64_t budget = default_enumeration_budget)
{
    check_enumeration(n, tau, budget);
    std::vector<Index> idx(static_cast<std::size_t>(tau));
    for (Index j = 0; j < tau; ++j) idx[static_cast<std::size_t>(j)] = j;
    const std::span<const Index> view(idx);
    while (true) {
        fn(view);
        // advance to the next combination
        Index j = tau - 1;
        while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - tau + j) --j;
        if (j < 0) break;
        ++idx[static_cast<std::size_t>(j)];
        for (Index t = j + 1; t < tau; ++t)
            idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
    }
}

// Pull-style stream over the same lexicographic sequence.
class SubsetStream
{
public:
    SubsetStream(Index n, Index tau, std::uint64_t budget = default_enumeration_budget) :
        n_(n), tau_(tau)
    {
        check_enumeration(n, tau, budget);
        idx_.resize(static_cast<std::size_t>(tau));
        for (Index j = 0; j < tau; ++j) idx_[static_cast<std::size_t>(j)] = j;
    }

    std::optional<CoordSet> next()
    {
        if (done_) return std::nullopt;
        CoordSet out(idx_, n_);
        Index j = tau_ - 1;
        while (j >= 0 && idx_[static_cast<std::size_t>(j)] == n_ - tau_ + j) --j;
        if (j < 0) {
            done_ = true;
        } else {
            ++idx_[static_cast<std::size_t>(j)];
            for (Index t = j + 1; t < tau_; ++t)
                idx_[static_cast<std::size_t>(t)] = idx_[static_cast<std::size_t>(t - 1)] + 1;
        }
        return out;
    }

private:
    Index n_;
    Index tau_;
    std::vector<Index> idx_;
    bool done_ = false;
};

inline std::vector<CoordSet> enumerate_subsets(
    Index n, Index tau, std::uint64_t budget = default_enumeration_budget)
{
    std::vector<CoordSet> out;
    SubsetStream s(n, tau, budget);
    while (auto S = s.next()) out.push_back(std::move(*S));
    return out;
}

namespace detail {

// g_S^T (M_S)^{-1} g_S for a small block, without heap allocation for
// |S| <= 4. Returns -1 when M_S is not positive definite.
template <int K>
double quad_inverse_fixed(const Matrix& M, std::span<const Index> S, const Vector& g)
{
    Eigen::Matrix<double, K, K> A;
    Eigen::Matrix<double, K, 1> b;
    for (int c = 0; c < K; ++c) {
        b[c] = g[S[static_cast<std::size_t>(c)]];
        for (int r = 0; r < K; ++r)
            A(r, c) = M(S[static_cast<std::size_t>(r)], S[static_cast<std::size_t>(c)]);
    }
    Eigen::LLT<Eigen::Matrix<double, K, K>> llt(A);
    if (llt.info() != Eigen::Success) return -1.0;
    return b.dot(llt.solve(b));
}

inline double quad_inverse(const Matrix& M, std::span<const Index> S, const Vector& g)
{
    switch (S.size()) {
        case 1: {
            const double d = M(S[0], S[0]);
            if (!(d > 0.0)) return -1.0;
            const double v = g[S[0]];
            return v * v / d;
        }
        case 2: return quad_inverse_fixed<2>(M, S, g);
        case 3: return quad_inverse_fixed<3>(M, S, g);
        case 4: return quad_inverse_fixed<4>(M, S, g);
        default: {
            const Matrix A = principal_submatrix(M, S);
            Vector b(static_cast<Index>(S.size()));
            for (std::size_t j = 0; j < S.size(); ++j) b[static_cast<Index>(j)] = g[S[j]];
            Eigen::LLT<Matrix> llt(A);
            if (llt.info() != Eigen::Success) return -1.0;
            return b.dot(llt.solve(b));
        }
    }
}

} // namespace detail

} // namespace bcd
