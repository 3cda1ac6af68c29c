#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "convolution.hpp"
#include "errors.hpp"
#include "measure.hpp"
#include "test_function.hpp"

namespace monolev {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// One factor (A_i, H_i, Omega_i): a hermitian operator and a unit state vector.
struct FactorSpace {
    CMatrix op;
    CVector omega;

    Eigen::Index dim() const { return op.rows(); }
};

inline FactorSpace make_factor(CMatrix op, std::optional<CVector> omega = std::nullopt) {
    require(op.rows() == op.cols() && op.rows() >= 1, Errc::InvalidArgument, "factor operator must be square");
    require((op - op.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, op.cwiseAbs().maxCoeff()),
            Errc::InvalidArgument, "factor operator must be hermitian");
    CVector w = omega ? *omega : CVector(CVector::Unit(op.rows(), 0));
    require(w.size() == op.rows(), Errc::InvalidArgument, "state vector size mismatch");
    require(std::abs(w.norm() - 1.0) <= 1e-12, Errc::InvalidArgument, "state vector must be a unit vector");
    return {std::move(op), std::move(w)};
}

namespace detail {

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline double op_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() <= 512) return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
    return m.norm();  // Frobenius bound beyond desk sizes
}

}  // namespace detail

constexpr Eigen::Index kMaxModelDim = 4096;

/// Iterated monotone product: J_i(X) = 1^{(i-1)} (x) X (x) P^{(n-i)}, Omega = (x) omega_i.
class MatrixModel {
public:
    explicit MatrixModel(std::vector<FactorSpace> factors) : factors_(std::move(factors)) {
        require(!factors_.empty(), Errc::InvalidArgument, "model needs at least one factor");
        Eigen::Index d = 1;
        for (const auto& f : factors_) {
            d *= f.dim();
            require(d <= kMaxModelDim, Errc::DimensionCap,
                    "total dimension exceeds " + std::to_string(kMaxModelDim));
        }
        dim_ = d;
        omega_ = factors_[0].omega;
        for (std::size_t i = 1; i < factors_.size(); ++i) omega_ = detail::kron(omega_, factors_[i].omega);
    }

    std::size_t size() const { return factors_.size(); }
    Eigen::Index dim() const { return dim_; }
    const FactorSpace& factor(std::size_t i) const { return factors_.at(i); }
    const CVector& omega() const { return omega_; }

    /// J_i(x) for an operator x on factor i (0-based).
    CMatrix embed(std::size_t i, const CMatrix& x) const {
        require(i < factors_.size(), Errc::InvalidArgument, "factor index out of range");
        Eigen::Index before = 1;
        for (std::size_t k = 0; k < i; ++k) before *= factors_[k].dim();
        CMatrix out = detail::kron(CMatrix::Identity(before, before), x);
        for (std::size_t k = i + 1; k < factors_.size(); ++k) {
            const CVector& w = factors_[k].omega;
            out = detail::kron(out, CMatrix(w * w.adjoint()));
        }
        return out;
    }
    CMatrix X(std::size_t i) const { return embed(i, factors_.at(i).op); }
    CMatrix sum() const {
        CMatrix s = CMatrix::Zero(dim_, dim_);
        for (std::size_t i = 0; i < factors_.size(); ++i) s += X(i);
        return s;
    }
    cplx state(const CMatrix& z) const { return omega_.dot(z * omega_); }

    /// The first k factors as a model of their own.
    MatrixModel prefix(std::size_t k) const {
        require(k >= 1 && k <= factors_.size(), Errc::InvalidArgument, "bad prefix length");
        return MatrixModel(std::vector<FactorSpace>(factors_.begin(), factors_.begin() + static_cast<long>(k)));
    }

private:
    std::vector<FactorSpace> factors_;
    Eigen::Index dim_ = 1;
    CVector omega_;
};

namespace detail {

// Tridiagonal matrix from recurrence coefficients.
inline CMatrix jacobi_matrix(const std::vector<double>& alpha, const std::vector<double>& beta_sqrt) {
    const auto n = static_cast<Eigen::Index>(alpha.size());
    CMatrix J = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) J(i, i) = alpha[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = beta_sqrt[static_cast<std::size_t>(i)];
    return J;
}

}  // namespace detail

/// d x d Jacobi matrix of a discrete measure by Lanczos on its nodes. Returns fewer
/// rows when the measure has fewer than d support points, unless `strict`.
inline CMatrix jacobi_from_nodes(const std::vector<Atom>& nodes, int d, bool strict = false) {
    require(d >= 1, Errc::InvalidArgument, "Jacobi dimension must be >= 1");
    const std::size_t n = nodes.size();
    require(n >= 1, Errc::EmptyMeasure, "no nodes");
    Eigen::VectorXd x(static_cast<Eigen::Index>(n)), v0(static_cast<Eigen::Index>(n));
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x(static_cast<Eigen::Index>(i)) = nodes[i].position;
        v0(static_cast<Eigen::Index>(i)) = std::sqrt(nodes[i].mass);
        scale = std::max(scale, std::abs(nodes[i].position));
    }
    scale = std::max(scale, 1.0);
    require(v0.norm() > 0.0, Errc::EmptyMeasure, "measure has no mass");
    std::vector<Eigen::VectorXd> basis{v0 / v0.norm()};
    std::vector<double> alpha, beta;
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd u = x.cwiseProduct(basis.back());
        alpha.push_back(basis.back().dot(u));
        // Full reorthogonalization, twice.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) u -= b.dot(u) * b;
        if (k + 1 == d) break;
        const double b = u.norm();
        if (b <= 1e-9 * scale) {
            if (strict) fail(Errc::MomentBreakdown, "measure has only " + std::to_string(k + 1) + " support points");
            break;
        }
        beta.push_back(b);
        basis.push_back(u / b);
    }
    return detail::jacobi_matrix(alpha, beta);
}

/// Nodes and weights of a discretized measure: atoms plus trapezoidal density nodes.
inline std::vector<Atom> quadrature_nodes(const DiscretizedMeasure& mu) {
    std::vector<Atom> nodes = mu.atoms();
    if (const auto& d = mu.density())
        for (std::size_t j = 0; j < d->size(); ++j)
            if (d->values[j] > 0.0) nodes.push_back({d->node(j), d->weight(j) * d->values[j]});
    return nodes;
}

/// Each measure becomes a d x d Jacobi factor (fewer rows for measures with fewer
/// support points) with omega = e_1; factors embed in list order.
inline MatrixModel model_from_measures(const std::vector<DiscretizedMeasure>& measures, int d) {
    require(d >= 1 && d <= 16, Errc::InvalidArgument, "nodes per factor must be in [1, 16]");
    std::vector<FactorSpace> f;
    for (const auto& mu : measures) {
        require(mu.is_probability(), Errc::NotProbability, "model factors need probability measures");
        f.push_back(make_factor(jacobi_from_nodes(quadrature_nodes(mu), d)));
    }
    return MatrixModel(std::move(f));
}

/// Jacobi matrix from moments m_0..m_{2d-1} by the Chebyshev algorithm.
inline CMatrix jacobi_from_moments(const std::vector<double>& m, int d, bool strict = false) {
    require(d >= 1 && static_cast<int>(m.size()) >= 2 * d, Errc::InvalidArgument, "need moments m_0..m_{2d-1}");
    require(m[0] > 0.0, Errc::MomentBreakdown, "m_0 must be positive");
    const int L = 2 * d;
    std::vector<double> alpha{m[1] / m[0]}, beta{m[0]};
    std::vector<double> prev(static_cast<std::size_t>(L), 0.0), cur(m.begin(), m.begin() + L);
    for (int k = 1; k < d; ++k) {
        std::vector<double> next(static_cast<std::size_t>(L), 0.0);
        for (int l = k; l < L - k; ++l) {
            const auto ul = static_cast<std::size_t>(l);
            next[ul] = cur[ul + 1] - alpha.back() * cur[ul] - beta.back() * prev[ul];
        }
        const auto uk = static_cast<std::size_t>(k);
        const double b = next[uk] / cur[uk - 1];
        const double scale = std::max(1.0, std::abs(alpha.front()));
        if (!(b > 1e-12 * scale * scale)) {
            if (strict) fail(Errc::MomentBreakdown, "moment sequence is not positive definite at order " + std::to_string(k));
            break;
        }
        alpha.push_back(next[uk + 1] / next[uk] - cur[uk] / cur[uk - 1]);
        beta.push_back(b);
        prev = std::move(cur);
        cur = std::move(next);
    }
    std::vector<double> bs;
    for (std::size_t i = 1; i < beta.size(); ++i) bs.push_back(std::sqrt(beta[i]));
    return detail::jacobi_matrix(alpha, bs);
}

inline MatrixModel model_from_moments(const std::vector<std::vector<double>>& moments, int d) {
    require(d >= 1 && d <= 16, Errc::InvalidArgument, "nodes per factor must be in [1, 16]");
    std::vector<FactorSpace> f;
    for (const auto& m : moments) f.push_back(make_factor(jacobi_from_moments(m, d)));
    return MatrixModel(std::move(f));
}

namespace detail {

// Random element of span{X^k, k = 1..3}, embedded in factor i.
inline CMatrix random_element(const MatrixModel& model, std::size_t i, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const CMatrix& x = model.factor(i).op;
    CMatrix p = CMatrix::Zero(x.rows(), x.cols());
    CMatrix xk = x;
    for (int k = 1; k <= 3; ++k) {
        p += cplx(g(rng), g(rng)) * xk;
        xk = xk * x;
    }
    return model.embed(i, p);
}

}  // namespace detail

struct IndependenceResiduals {
    double a = 0.0;  // max ||XYZ - Phi(Y) XZ||
    double b = 0.0;  // max |Phi(X_1..X_n Y Z_m..Z_1) - prod Phi|
    std::size_t patterns_a = 0;
    std::size_t patterns_b = 0;
};

/// Random checks of both monotone independence conditions over admissible index patterns.
inline IndependenceResiduals check_monotone_independence(const MatrixModel& model, int trials, std::mt19937_64& rng) {
    require(model.size() >= 2, Errc::InvalidArgument, "independence needs at least two factors");
    IndependenceResiduals r;
    const std::size_t n = model.size();
    std::vector<std::array<std::size_t, 3>> pat_a;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (j > std::max(i, k)) pat_a.push_back({i, j, k});
    std::uniform_int_distribution<std::size_t> pick_a(0, pat_a.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_j(0, n - 1);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < trials; ++t) {
        const auto [i, j, k] = pat_a[pick_a(rng)];
        const CMatrix X = detail::random_element(model, i, rng);
        const CMatrix Y = detail::random_element(model, j, rng);
        const CMatrix Z = detail::random_element(model, k, rng);
        const double scale = std::max(1.0, X.norm() * Y.norm() * Z.norm());
        r.a = std::max(r.a, detail::op_norm(X * Y * Z - model.state(Y) * X * Z) / scale);
        ++r.patterns_a;

        // (b): decreasing chain down to Y, increasing chain back out.
        const std::size_t jb = pick_j(rng);
        std::vector<std::size_t> left, right;
        for (std::size_t q = n; q-- > jb + 1;) {
            if (coin(rng)) left.push_back(q);
            if (coin(rng)) right.push_back(q);
        }
        CMatrix prod = CMatrix::Identity(model.dim(), model.dim());
        cplx expect = 1.0;
        double bscale = 1.0;
        for (std::size_t q : left) {
            const CMatrix E = detail::random_element(model, q, rng);
            expect *= model.state(E);
            bscale *= std::max(1.0, E.norm());
            prod = prod * E;
        }
        {
            const CMatrix E = detail::random_element(model, jb, rng);
            expect *= model.state(E);
            bscale *= std::max(1.0, E.norm());
            prod = prod * E;
        }
        for (auto it = right.rbegin(); it != right.rend(); ++it) {
            const CMatrix E = detail::random_element(model, *it, rng);
            expect *= model.state(E);
            bscale *= std::max(1.0, E.norm());
            prod = prod * E;
        }
        r.b = std::max(r.b, std::abs(model.state(prod) - expect) / bscale);
        ++r.patterns_b;
    }
    return r;
}

namespace detail {

// Splits the model into the first `first` factors and the rest.
inline std::pair<Eigen::Index, CVector> split_tail(const MatrixModel& model, std::size_t first) {
    require(first >= 1 && first < model.size(), Errc::InvalidArgument, "conditional expectation needs two blocks");
    Eigen::Index d1 = 1;
    for (std::size_t i = 0; i < first; ++i) d1 *= model.factor(i).dim();
    CVector w2 = model.factor(first).omega;
    for (std::size_t i = first + 1; i < model.size(); ++i) w2 = kron(w2, model.factor(i).omega);
    return {d1, w2};
}

}  // namespace detail

/// E_1(Z) = J_1^{-1}(P Z P) with P = 1 (x) P_2, where block 1 is the first `first`
/// factors (default: all but the last). When block 1 is a single factor the result must
/// commute with its operator, i.e. lie in the algebra it generates.
inline CMatrix conditional_E1(const MatrixModel& model, const CMatrix& Z, std::size_t first = 0) {
    if (first == 0) first = model.size() - 1;
    require(Z.rows() == model.dim() && Z.cols() == model.dim(), Errc::InvalidArgument, "operator size mismatch");
    const auto [d1, w2] = detail::split_tail(model, first);
    const Eigen::Index d2 = w2.size();
    CMatrix W(d1, d1);
    for (Eigen::Index i = 0; i < d1; ++i)
        for (Eigen::Index j = 0; j < d1; ++j)
            W(i, j) = w2.dot(Z.block(i * d2, j * d2, d2, d2) * w2);
    if (first == 1) {
        const CMatrix& X1 = model.factor(0).op;
        const double scale = std::max(1.0, W.norm() * std::max(1.0, X1.norm()));
        if ((W * X1 - X1 * W).norm() > 1e-10 * scale)
            fail(Errc::NotCompressible, "compression does not lie in the algebra of the first factor");
    }
    return W;
}

namespace detail {

// Full-pivot LU of z - A; a tiny pivot ratio puts z on the spectrum.
inline Eigen::FullPivLU<CMatrix> pencil_lu(const CMatrix& A, cplx z) {
    Eigen::FullPivLU<CMatrix> lu(z * CMatrix::Identity(A.rows(), A.cols()) - A);
    const auto d = lu.matrixLU().diagonal().cwiseAbs();
    if (!(d.minCoeff() >= 1e-13 * std::max(d.maxCoeff(), 1e-300))) fail(Errc::SingularResolvent, "z lies on the spectrum");
    return lu;
}

inline CMatrix resolvent(const CMatrix& A, cplx z) { return pencil_lu(A, z).inverse(); }

inline cplx reciprocal_cauchy(const CMatrix& A, const CVector& w, cplx z) {
    return 1.0 / w.dot(pencil_lu(A, z).solve(w));
}

}  // namespace detail

/// ||E_1((z - (X_1 + X_2))^{-1}) - (H_{X_2}(z) - X_1)^{-1}|| for the split after `first`
/// factors; X_1 is the sum over block 1 and X_2 the sum over block 2.
inline double resolvent_identity_residual(const MatrixModel& model, cplx z, std::size_t first = 0) {
    if (first == 0) first = model.size() - 1;
    CMatrix X2 = CMatrix::Zero(model.dim(), model.dim());
    for (std::size_t i = first; i < model.size(); ++i) X2 += model.X(i);
    const CMatrix lhs = conditional_E1(model, detail::resolvent(model.sum(), z), first);
    const cplx H2 = detail::reciprocal_cauchy(X2, model.omega(), z);
    const CMatrix X1 = model.prefix(first).sum();
    return detail::op_norm(lhs - detail::resolvent(X1, H2));
}

/// |H_{X_1 + ... + X_n}(z) - H_{X_1}(...H_{X_n}(z)...)|, last factor innermost.
inline double H_composition_residual(const MatrixModel& model, cplx z) {
    require(z.imag() > 0.0, Errc::LowerHalfPlane, "z must lie in the upper half-plane");
    const cplx whole = detail::reciprocal_cauchy(model.sum(), model.omega(), z);
    cplx w = z;
    for (std::size_t i = model.size(); i-- > 0;)
        w = detail::reciprocal_cauchy(model.factor(i).op, model.factor(i).omega, w);
    return std::abs(whole - w);
}

namespace detail {

// f(A) for hermitian A through its eigendecomposition.
inline CMatrix apply_function(const CMatrix& A, const TestFunction& f) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(A);
    CVector fv(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(es.eigenvalues()(i));
    return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
}

// Spectral measure of A in the vector w.
inline DiscretizedMeasure spectral_measure(const CMatrix& A, const CVector& w) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(A);
    std::vector<Atom> atoms;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        atoms.push_back({es.eigenvalues()(i), std::norm(es.eigenvectors().col(i).dot(w))});
    return make_measure(std::move(atoms), std::nullopt, true, 1e-9);
}

}  // namespace detail

/// ||E_1(f(X_1 + X_2)) - (Tf)(X_1)|| on a two-factor model, with Tf(x) = \int f d(delta_x |> mu_2)
/// computed by the shift kernels of the convolution module.
inline double corollary_T_residual(const MatrixModel& model, const TestFunction& f) {
    require(model.size() == 2, Errc::InvalidArgument, "corollary check needs a two-factor model");
    const CMatrix lhs = conditional_E1(model, detail::apply_function(model.sum(), f));
    const DiscretizedMeasure mu2 = detail::spectral_measure(model.factor(1).op, model.factor(1).omega);
    const CMatrix& X1 = model.factor(0).op;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(X1);
    CVector tv(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < tv.size(); ++i)
        tv(i) = integrate(shift_convolve(es.eigenvalues()(i), mu2), f).value;
    const CMatrix rhs = es.eigenvectors() * tv.asDiagonal() * es.eigenvectors().adjoint();
    return detail::op_norm(lhs - rhs);
}

/// Phi((sum_i J_i(X_i))^k).
inline double moments_of_sum(const MatrixModel& model, int k) {
    require(k >= 0, Errc::InvalidArgument, "negative moment order");
    const CMatrix S = model.sum();
    CVector v = model.omega();
    for (int i = 0; i < k; ++i) v = S * v;
    return model.omega().dot(v).real();
}

struct TraceWitness {
    CMatrix X, Y1, Y2;
    double gap = 0.0;  // |Phi(X Y1 Y2) - Phi(Y2 X Y1)|
};

/// Searches X in A_1 and Y1, Y2 in A_2 (the last factor) with Phi(X Y1 Y2) != Phi(Y2 X Y1).
inline TraceWitness trace_failure_demo(const MatrixModel& model, std::mt19937_64& rng, int trials = 200) {
    require(model.size() >= 2, Errc::InvalidArgument, "trace demo needs at least two factors");
    const std::size_t last = model.size() - 1;
    auto gap = [&](const CMatrix& X, const CMatrix& Y1, const CMatrix& Y2) {
        return std::abs(model.state(X * Y1 * Y2) - model.state(Y2 * X * Y1));
    };
    TraceWitness best{model.X(0), model.X(last), model.X(last), 0.0};
    best.gap = gap(best.X, best.Y1, best.Y2);
    for (int t = 0; t < trials; ++t) {
        const CMatrix X = detail::random_element(model, 0, rng);
        const CMatrix Y1 = detail::random_element(model, last, rng);
        const CMatrix Y2 = detail::random_element(model, last, rng);
        const double scale = std::max(1.0, X.norm() * Y1.norm() * Y2.norm());
        const double g = gap(X, Y1, Y2) / scale;
        if (g > best.gap) best = {X, Y1, Y2, g};
    }
    if (!(best.gap > 1e-12))
        fail(Errc::NoWitnessFound, "the state on the last factor is multiplicative; the product is tracial here");
    return best;
}

}  // namespace monolev
