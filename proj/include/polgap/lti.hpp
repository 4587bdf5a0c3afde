#pragma once

#include "polgap/fwd.hpp"
#include "polgap/qp.hpp"

#include <utility>

namespace polgap {

/// Discrete-time linear dynamics x[k+1] = A x[k] + B u[k].
template <typename Scalar>
struct LtiSystem {
    MatrixX<Scalar> A;  // n_x x n_x
    MatrixX<Scalar> B;  // n_x x n_u

    LtiSystem(MatrixX<Scalar> A_in, MatrixX<Scalar> B_in)
        : A(std::move(A_in)), B(std::move(B_in))
    {
        if (A.rows() != A.cols())
            throw DimensionMismatch("LtiSystem: A must be square");
        if (B.rows() != A.rows())
            throw DimensionMismatch("LtiSystem: B must have as many rows as A");
        if (B.cols() < 1)
            throw DimensionMismatch("LtiSystem: B must have at least one column");
    }

    Index state_dim() const { return A.rows(); }
    Index input_dim() const { return B.cols(); }
};

/// Finite-horizon input-constrained MPC problem over a scalar input sequence:
/// minimize the stacked state/input quadratic cost subject to L u <= b.
template <typename Scalar>
struct LtiMpcSpec {
    LtiSystem<Scalar> system;
    Index N;             // horizon
    MatrixX<Scalar> Q;   // N*n_x x N*n_x, symmetric PSD, weights [x1;...;xN]
    MatrixX<Scalar> R;   // N x N, symmetric PSD, weights [u0;...;u_{N-1}]
    MatrixX<Scalar> L;   // n_in x N
    VectorX<Scalar> b;   // n_in, elementwise nonnegative

    LtiMpcSpec(LtiSystem<Scalar> sys, Index horizon, MatrixX<Scalar> Q_in,
               MatrixX<Scalar> R_in, MatrixX<Scalar> L_in, VectorX<Scalar> b_in)
        : system(std::move(sys)),
          N(horizon),
          Q(std::move(Q_in)),
          R(std::move(R_in)),
          L(std::move(L_in)),
          b(std::move(b_in))
    {
        if (N < 1) throw DimensionMismatch("LtiMpcSpec: horizon must be positive");
        const Index nx = system.state_dim();
        if (Q.rows() != N * nx || Q.cols() != N * nx)
            throw DimensionMismatch("LtiMpcSpec: Q must be (N*n_x) x (N*n_x)");
        if (R.rows() != N || R.cols() != N)
            throw DimensionMismatch("LtiMpcSpec: R must be N x N");
        if (L.cols() != N)
            throw DimensionMismatch("LtiMpcSpec: L must have N columns");
        if (b.size() != L.rows())
            throw DimensionMismatch("LtiMpcSpec: b must match the rows of L");
        check_symmetric_psd(Q, "Q");
        check_symmetric_psd(R, "R");
        if (b.size() > 0 && b.minCoeff() < Scalar(0))
            throw InvariantViolation("LtiMpcSpec: b must be elementwise nonnegative");
    }

    Index state_dim() const { return system.state_dim(); }

private:
    static void check_symmetric_psd(const MatrixX<Scalar>& M, const char* name)
    {
        const Scalar scale = std::max(Scalar(1), M.template lpNorm<Eigen::Infinity>());
        if ((M - M.transpose()).template lpNorm<Eigen::Infinity>() > Scalar(1e-9) * scale)
            throw InvariantViolation(std::string("LtiMpcSpec: ") + name + " must be symmetric");
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(symmetrized(M),
                                                          Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < Scalar(-1e-9) * scale)
            throw NotPositiveDefinite(std::string("LtiMpcSpec: ") + name +
                                      " must be positive semidefinite");
    }
};

/// Stacked prediction matrices: [x1;...;xN] = T x0 + S [u0;...;u_{N-1}].
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>>
prediction_matrices(const LtiSystem<Scalar>& sys, Index N)
{
    const Index nx = sys.state_dim();
    const Index nu = sys.input_dim();
    MatrixX<Scalar> T = MatrixX<Scalar>::Zero(N * nx, nx);
    MatrixX<Scalar> S = MatrixX<Scalar>::Zero(N * nx, N * nu);

    MatrixX<Scalar> Apow = sys.A;  // A^(i+1) for block row i
    for (Index i = 0; i < N; ++i) {
        T.block(i * nx, 0, nx, nx) = Apow;
        if (i + 1 < N) Apow = sys.A * Apow;
    }
    // block (i,j) of S is A^(i-j) B for i >= j
    MatrixX<Scalar> AB = sys.B;
    for (Index d = 0; d < N; ++d) {
        for (Index j = 0; j + d < N; ++j)
            S.block((j + d) * nx, j * nu, nx, nu) = AB;
        if (d + 1 < N) AB = sys.A * AB;
    }
    return {std::move(T), std::move(S)};
}

/// Eliminates the predicted states so the horizon cost becomes
/// u^T H u + u^T h x with H = S^T Q S + R and h = 2 S^T Q T.
template <typename Scalar>
CondensedQp<Scalar> condense(const LtiMpcSpec<Scalar>& spec)
{
    if (spec.system.input_dim() != 1)
        throw DimensionMismatch("condense: only scalar-input systems are supported");

    auto [T, S] = prediction_matrices(spec.system, spec.N);
    MatrixX<Scalar> H = symmetrized(S.transpose() * spec.Q * S + spec.R);
    MatrixX<Scalar> h = Scalar(2) * S.transpose() * spec.Q * T;
    return CondensedQp<Scalar>(std::move(H), std::move(h), spec.L, spec.b);
}

/// Rolls the dynamics out and evaluates the stacked quadratic cost directly,
/// without condensation. Test oracle for condense + solve_qp.
template <typename Scalar, typename DerivedX, typename DerivedU>
Scalar horizon_cost_oracle(const LtiMpcSpec<Scalar>& spec,
                           const Eigen::MatrixBase<DerivedX>& x_expr,
                           const Eigen::MatrixBase<DerivedU>& u_expr)
{
    const VectorX<Scalar> x = x_expr;
    const VectorX<Scalar> u = u_expr;
    if (x.size() != spec.state_dim())
        throw DimensionMismatch("horizon_cost_oracle: bad state dimension");
    if (u.size() != spec.N)
        throw DimensionMismatch("horizon_cost_oracle: input sequence must have length N");

    const Index nx = spec.state_dim();
    VectorX<Scalar> stacked(spec.N * nx);
    VectorX<Scalar> xi = x;
    for (Index k = 0; k < spec.N; ++k) {
        xi = spec.system.A * xi + spec.system.B * u.segment(k, 1);
        stacked.segment(k * nx, nx) = xi;
    }
    return stacked.dot(spec.Q * stacked) + u.dot(spec.R * u);
}

}  // namespace polgap
