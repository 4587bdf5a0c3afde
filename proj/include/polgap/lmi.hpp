#pragma once

#include "polgap/qc.hpp"

#include <map>
#include <utility>
#include <vector>

namespace polgap {

/// Affine matrix inequality F0 + sum_i theta_i F_i <= 0 over the variable
/// space described by layout, with a linear objective to minimize. Cone
/// membership of the variables (nonnegative / free / shifted-PSD groups) is
/// carried by the layout. The encoding is solver-agnostic.
struct LmiProblem {
    Index dim = 0;
    Eigen::MatrixXd F0;
    std::vector<Eigen::MatrixXd> basis;  // one (possibly empty) matrix per variable
    Eigen::VectorXd objective;           // minimize objective . theta
    MultiplierLayout layout;

    Index var_count() const { return layout.size(); }

    Eigen::MatrixXd assemble(const Eigen::VectorXd& theta) const
    {
        if (theta.size() != var_count())
            throw DimensionMismatch("LmiProblem::assemble: assignment size mismatch");
        Eigen::MatrixXd F = F0;
        for (Index i = 0; i < var_count(); ++i)
            if (basis[i].size() > 0) F += theta[i] * basis[i];
        return F;
    }
};

/// Relative weights of the two bound terms in the SDP objective
/// omega_x * gamma_x + omega * gamma.
struct BoundWeights {
    double omega_x = 1.0;
    double omega = 1.0;
};

/// Full expansion of ||u_NN - u_MPC||^2 - gamma_x ||x||^2 - gamma over zeta,
/// including the D_nn cross terms, so the identity holds for any offset.
template <typename Scalar>
QuadForm<Scalar> assemble_omega(const ImplicitNetwork<Scalar>& net,
                                Index horizon, const MultiplierLayout& layout)
{
    const Index n_x = net.state_dim();
    const Index M = net.width();
    const Index N = horizon;
    detail::ZetaDims<Scalar> zd{n_x, M, N};
    QuadForm<Scalar> qf(zd.dim());

    RowVectorX<Scalar> c_mpc = RowVectorX<Scalar>::Zero(N);
    c_mpc(0) = Scalar(1);

    auto& F = qf.constant;
    F.block(n_x, n_x, M, M) = symmetrized(net.C_nn.transpose() * net.C_nn);
    F.block(n_x, n_x + M, M, N) = -net.C_nn.transpose() * c_mpc;
    F.block(n_x + M, n_x, N, M) = -(net.C_nn.transpose() * c_mpc).transpose();
    F.block(n_x + M, n_x + M, N, N) = symmetrized(c_mpc.transpose() * c_mpc);
    F.block(n_x, zd.c(), M, 1) = net.C_nn.transpose() * net.D_nn;
    F.block(zd.c(), n_x, 1, M) = net.C_nn * net.D_nn;
    F.block(n_x + M, zd.c(), N, 1) = -c_mpc.transpose() * net.D_nn;
    F.block(zd.c(), n_x + M, 1, N) = -c_mpc * net.D_nn;
    F(zd.c(), zd.c()) = net.D_nn * net.D_nn;

    {
        MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
        B.topLeftCorner(n_x, n_x) = -MatrixX<Scalar>::Identity(n_x, n_x);
        qf.terms.push_back({layout.at(Tag::gamma_x).offset, std::move(B)});
    }
    {
        MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
        B(zd.c(), zd.c()) = Scalar(-1);
        qf.terms.push_back({layout.at(Tag::gamma).offset, std::move(B)});
    }
    return qf;
}

namespace detail {

inline void merge_quad_form(LmiProblem& p, const QuadForm<double>& qf)
{
    if (qf.dim != p.dim)
        throw DimensionMismatch("merge_quad_form: dimension mismatch");
    p.F0 += qf.constant;
    for (const auto& [id, basis] : qf.terms) {
        if (p.basis[id].size() == 0)
            p.basis[id] = basis;
        else
            p.basis[id] += basis;
    }
}

// index maps used to embed the smaller forms into zeta = [x; z_nn; z_mpc; 1]
inline std::vector<Index> mu_to_zeta(Index n_x, Index M, Index N)
{
    std::vector<Index> map(static_cast<std::size_t>(n_x + M + 1));
    for (Index i = 0; i < n_x + M; ++i) map[static_cast<std::size_t>(i)] = i;
    map[static_cast<std::size_t>(n_x + M)] = n_x + M + N;
    return map;
}

inline std::vector<Index> x1_to_zeta(Index n_x, Index M, Index N)
{
    std::vector<Index> map(static_cast<std::size_t>(n_x + 1));
    for (Index i = 0; i < n_x; ++i) map[static_cast<std::size_t>(i)] = i;
    map[static_cast<std::size_t>(n_x)] = n_x + M + N;
    return map;
}

}  // namespace detail

/// Builds the analysis LMI of the error-bound SDP:
/// Lambda_NN + Lambda_MPC + X + Omega + margin * I <= 0, minimizing
/// omega_x gamma_x + omega gamma. The margin keeps returned certificates
/// strictly on the feasible side of the matrix inequality.
inline LmiProblem build_analysis_problem(const ImplicitNetwork<double>& net,
                                         const CondensedQp<double>& qp,
                                         const InputBox<double>& box,
                                         const QcConfig& cfg,
                                         const BoundWeights& weights = {},
                                         double margin = 1e-8)
{
    if (net.state_dim() != qp.state_dim() || net.state_dim() != box.dim())
        throw DimensionMismatch("build_analysis_problem: state dimensions differ");
    const Index n_x = net.state_dim();
    const Index M = net.width();
    const Index N = qp.horizon();

    LmiProblem p;
    p.layout = make_analysis_layout(net, qp, cfg);
    p.dim = n_x + M + N + 1;
    p.F0 = Eigen::MatrixXd::Zero(p.dim, p.dim);
    p.basis.assign(static_cast<std::size_t>(p.layout.size()), Eigen::MatrixXd());
    p.objective = Eigen::VectorXd::Zero(p.layout.size());
    p.objective[p.layout.at(Tag::gamma_x).offset] = weights.omega_x;
    p.objective[p.layout.at(Tag::gamma).offset] = weights.omega;

    const auto lam_nn = lambda_from_hat(net, activation_lambda_hat(net, p.layout, cfg));
    detail::merge_quad_form(p, lam_nn.padded(p.dim, detail::mu_to_zeta(n_x, M, N)));
    detail::merge_quad_form(p, mpc_qc(qp, p.layout, cfg, &net));
    detail::merge_quad_form(
        p, box_qc(box, p.layout).padded(p.dim, detail::x1_to_zeta(n_x, M, N)));
    detail::merge_quad_form(p, assemble_omega(net, N, p.layout));

    p.F0 += margin * Eigen::MatrixXd::Identity(p.dim, p.dim);
    return p;
}

/// Builds the synthesis LMI (the QP is the decision variable, the constraint
/// multipliers are fixed to one) with H constrained to H >= hessian_shift * I
/// through its psd variable group.
inline LmiProblem build_synthesis_problem(const ImplicitNetwork<double>& net,
                                          const InputBox<double>& box, Index N,
                                          const QcConfig& cfg,
                                          const BoundWeights& weights = {},
                                          double margin = 1e-8,
                                          double hessian_shift = 1e-6)
{
    if (net.state_dim() != box.dim())
        throw DimensionMismatch("build_synthesis_problem: state dimensions differ");
    if (N < 1) throw DimensionMismatch("build_synthesis_problem: horizon must be positive");
    const Index n_x = net.state_dim();
    const Index M = net.width();

    LmiProblem p;
    p.layout = make_synthesis_layout(net, N, cfg, hessian_shift);
    p.dim = n_x + M + N + 1;
    p.F0 = Eigen::MatrixXd::Zero(p.dim, p.dim);
    p.basis.assign(static_cast<std::size_t>(p.layout.size()), Eigen::MatrixXd());
    p.objective = Eigen::VectorXd::Zero(p.layout.size());
    p.objective[p.layout.at(Tag::gamma_x).offset] = weights.omega_x;
    p.objective[p.layout.at(Tag::gamma).offset] = weights.omega;

    const auto lam_nn = lambda_from_hat(net, activation_lambda_hat(net, p.layout, cfg));
    detail::merge_quad_form(p, lam_nn.padded(p.dim, detail::mu_to_zeta(n_x, M, N)));
    detail::merge_quad_form(p, mpc_qc_synthesis<double>(N, n_x, M, p.layout));
    detail::merge_quad_form(
        p, box_qc(box, p.layout).padded(p.dim, detail::x1_to_zeta(n_x, M, N)));
    detail::merge_quad_form(p, assemble_omega(net, N, p.layout));

    p.F0 += margin * Eigen::MatrixXd::Identity(p.dim, p.dim);
    return p;
}

/// Diagonal congruence D F D applied to every matrix of the problem so the
/// largest entry of F0 stays moderate; multiplier values and the objective are
/// untouched, only the conditioning changes. Returns the scaling vector.
inline Eigen::VectorXd equilibrate(LmiProblem& p, double target = 1e3)
{
    Eigen::VectorXd d = Eigen::VectorXd::Ones(p.dim);
    for (int pass = 0; pass < 8; ++pass) {
        const Eigen::VectorXd rowmax = p.F0.cwiseAbs().rowwise().maxCoeff();
        if (rowmax.maxCoeff() <= target) break;
        Eigen::VectorXd s(p.dim);
        for (Index i = 0; i < p.dim; ++i)
            s[i] = 1.0 / std::sqrt(std::max(rowmax[i] / target, 1.0));
        p.F0 = symmetrized(s.asDiagonal() * p.F0 * s.asDiagonal());
        for (auto& B : p.basis)
            if (B.size() > 0) B = symmetrized(s.asDiagonal() * B * s.asDiagonal());
        d = d.cwiseProduct(s);
    }
    return d;
}

}  // namespace polgap
