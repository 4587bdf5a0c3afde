#pragma once

#include "polgap/fwd.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace polgap {

/// Parametric QP  min_u u^T H u + u^T h x  s.t.  L u <= b  with H > 0 and
/// b >= 0, so u = 0 is always feasible. The MPC action is the first entry of
/// the minimizer.
template <typename Scalar>
struct CondensedQp {
    MatrixX<Scalar> H;  // N x N, symmetric positive definite
    MatrixX<Scalar> h;  // N x n_x
    MatrixX<Scalar> L;  // n_in x N
    VectorX<Scalar> b;  // n_in, elementwise nonnegative

    CondensedQp(MatrixX<Scalar> H_in, MatrixX<Scalar> h_in, MatrixX<Scalar> L_in,
                VectorX<Scalar> b_in)
        : H(std::move(H_in)), h(std::move(h_in)), L(std::move(L_in)), b(std::move(b_in))
    {
        const Index N = H.rows();
        if (H.cols() != N) throw DimensionMismatch("CondensedQp: H must be square");
        if (h.rows() != N) throw DimensionMismatch("CondensedQp: h must have N rows");
        if (L.cols() != N && L.rows() > 0)
            throw DimensionMismatch("CondensedQp: L must have N columns");
        if (b.size() != L.rows())
            throw DimensionMismatch("CondensedQp: b must match the rows of L");

        const Scalar scale = std::max(Scalar(1), H.template lpNorm<Eigen::Infinity>());
        if ((H - H.transpose()).template lpNorm<Eigen::Infinity>() > Scalar(1e-9) * scale)
            throw InvariantViolation("CondensedQp: H must be symmetric");
        H = symmetrized(H);  // store the exact symmetric part
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(H, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= Scalar(1e-10))
            throw NotPositiveDefinite("CondensedQp: H must be positive definite");
        if (b.size() > 0 && b.minCoeff() < Scalar(0))
            throw InvariantViolation("CondensedQp: b must be elementwise nonnegative");
    }

    Index horizon() const { return H.rows(); }
    Index state_dim() const { return h.cols(); }
    Index constraint_count() const { return L.rows(); }

    /// First-coordinate selector [1, 0, ..., 0].
    RowVectorX<Scalar> c_mpc() const
    {
        RowVectorX<Scalar> c = RowVectorX<Scalar>::Zero(horizon());
        c(0) = Scalar(1);
        return c;
    }
};

template <typename Scalar>
struct QpSolution {
    VectorX<Scalar> z;            // minimizer, length N
    Scalar u;                     // first coordinate of z
    VectorX<Scalar> multipliers;  // KKT multipliers, length n_in, zero off the active set
    int iterations = 0;
};

template <typename Scalar>
struct QpOptions {
    Scalar tolerance = Scalar(1e-8);
    long max_iterations = 100000;
};

template <typename Scalar>
struct KktResidual {
    Scalar stationarity;     // ||2 H z + h x + L^T mu||_inf
    Scalar primal;           // max(0, max_i (L z - b)_i)
    Scalar complementarity;  // max_i |mu_i (L z - b)_i|
    Scalar dual;             // max(0, -min_i mu_i)

    Scalar max() const
    {
        return std::max(std::max(stationarity, primal), std::max(complementarity, dual));
    }
};

template <typename Scalar>
KktResidual<Scalar> kkt_residual(const CondensedQp<Scalar>& qp, const VectorX<Scalar>& x,
                                 const QpSolution<Scalar>& sol)
{
    KktResidual<Scalar> r{};
    VectorX<Scalar> grad = Scalar(2) * qp.H * sol.z + qp.h * x;
    if (qp.constraint_count() > 0) grad += qp.L.transpose() * sol.multipliers;
    r.stationarity = grad.template lpNorm<Eigen::Infinity>();
    if (qp.constraint_count() > 0) {
        VectorX<Scalar> slack = qp.L * sol.z - qp.b;
        r.primal = std::max(Scalar(0), slack.maxCoeff());
        r.complementarity = (sol.multipliers.array() * slack.array()).abs().maxCoeff();
        r.dual = std::max(Scalar(0), -sol.multipliers.minCoeff());
    } else {
        r.primal = r.complementarity = r.dual = Scalar(0);
    }
    return r;
}

namespace detail {

// Equality-constrained step: minimize u^T H u + c^T u subject to the working
// set rows held at their bounds. Solved through the bordered KKT system; a
// complete orthogonal decomposition tolerates linearly dependent rows.
template <typename Scalar>
void solve_eqp(const MatrixX<Scalar>& H, const VectorX<Scalar>& c,
               const MatrixX<Scalar>& L, const VectorX<Scalar>& b,
               const std::vector<Index>& working, VectorX<Scalar>& u_out,
               VectorX<Scalar>& mu_out)
{
    const Index n = H.rows();
    const Index m = static_cast<Index>(working.size());
    MatrixX<Scalar> K = MatrixX<Scalar>::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = Scalar(2) * H;
    VectorX<Scalar> rhs(n + m);
    rhs.head(n) = -c;
    for (Index k = 0; k < m; ++k) {
        K.block(n + k, 0, 1, n) = L.row(working[static_cast<std::size_t>(k)]);
        K.block(0, n + k, n, 1) = L.row(working[static_cast<std::size_t>(k)]).transpose();
        rhs(n + k) = b(working[static_cast<std::size_t>(k)]);
    }
    Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod(K);
    VectorX<Scalar> sol = cod.solve(rhs);
    u_out = sol.head(n);
    mu_out = sol.tail(m);
}

}  // namespace detail

/// Primal active-set solve starting from the always-feasible point u = 0.
/// Ties are broken by lowest constraint index, which makes the pivot order
/// deterministic; the objective never increases along the iterates, so the
/// returned point satisfies z^T H z + z^T h x <= 0.
template <typename Scalar, typename Derived>
QpSolution<Scalar> solve_qp(const CondensedQp<Scalar>& qp,
                            const Eigen::MatrixBase<Derived>& x_expr,
                            const QpOptions<Scalar>& opts = {})
{
    const VectorX<Scalar> x = x_expr;
    if (x.size() != qp.state_dim())
        throw DimensionMismatch("solve_qp: bad state dimension");

    const Index n = qp.horizon();
    const Index m = qp.constraint_count();
    const VectorX<Scalar> c = qp.h * x;

    QpSolution<Scalar> sol;
    sol.z = VectorX<Scalar>::Zero(n);
    sol.multipliers = VectorX<Scalar>::Zero(m);

    if (m == 0) {
        sol.z = (Scalar(2) * qp.H).ldlt().solve(-c);
        sol.u = sol.z(0);
        return sol;
    }

    // b >= 0 makes u = 0 feasible; the loop preserves feasibility.
    const Scalar scale =
        std::max({Scalar(1), qp.H.template lpNorm<Eigen::Infinity>(),
                  c.template lpNorm<Eigen::Infinity>()});

    std::vector<Index> working;
    VectorX<Scalar> u = VectorX<Scalar>::Zero(n);
    VectorX<Scalar> u_star(n), mu_w;

    for (long iter = 0; iter < opts.max_iterations; ++iter) {
        sol.iterations = static_cast<int>(iter + 1);
        detail::solve_eqp(qp.H, c, qp.L, qp.b, working, u_star, mu_w);
        VectorX<Scalar> d = u_star - u;

        if (d.template lpNorm<Eigen::Infinity>() <= Scalar(1e-12) * std::max(Scalar(1), scale)) {
            // at the working-set minimizer: check dual feasibility
            Index drop = -1;
            for (std::size_t k = 0; k < working.size(); ++k) {
                if (mu_w(static_cast<Index>(k)) < -opts.tolerance) {
                    if (drop < 0 || working[k] < working[static_cast<std::size_t>(drop)])
                        drop = static_cast<Index>(k);
                }
            }
            if (drop < 0) {
                sol.z = u;
                sol.u = u(0);
                sol.multipliers.setZero();
                for (std::size_t k = 0; k < working.size(); ++k)
                    sol.multipliers(working[k]) = mu_w(static_cast<Index>(k));
                return sol;
            }
            working.erase(working.begin() + drop);
            continue;
        }

        // step toward the subproblem minimizer, stopping at the first blocker
        Scalar alpha = Scalar(1);
        Index blocker = -1;
        for (Index i = 0; i < m; ++i) {
            if (std::find(working.begin(), working.end(), i) != working.end()) continue;
            const Scalar li_d = qp.L.row(i).dot(d);
            if (li_d <= Scalar(0)) continue;
            const Scalar gap = qp.b(i) - qp.L.row(i).dot(u);
            const Scalar a = std::max(Scalar(0), gap) / li_d;
            if (a < alpha - Scalar(1e-14)) {
                alpha = a;
                blocker = i;
            }
        }
        u += alpha * d;
        if (blocker >= 0)
            working.push_back(blocker);
        else if (alpha == Scalar(1))
            u = u_star;  // land exactly on the subproblem minimizer
    }
    throw QpSolverFailure("solve_qp: iteration limit reached");
}

}  // namespace polgap
