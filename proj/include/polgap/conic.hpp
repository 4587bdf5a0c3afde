#pragma once

#include "polgap/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>
#include <vector>

namespace polgap {

enum class ConicStatus {
    optimal,
    infeasible,
    unbounded,
    iteration_limit,
    numerical_failure,
};

inline const char* conic_status_name(ConicStatus s)
{
    switch (s) {
        case ConicStatus::optimal: return "optimal";
        case ConicStatus::infeasible: return "infeasible";
        case ConicStatus::unbounded: return "unbounded";
        case ConicStatus::iteration_limit: return "iteration_limit";
        case ConicStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

struct ConicOptions {
    double tol_gap = 1e-9;    // relative duality gap
    double tol_feas = 1e-9;   // relative primal/dual infeasibility
    int max_iterations = 200;
    double step_fraction = 0.98;
    bool trace = false;       // per-iteration diagnostics on stderr
};

struct ConicStats {
    ConicStatus status = ConicStatus::numerical_failure;
    int iterations = 0;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double primal_infeasibility = std::numeric_limits<double>::quiet_NaN();
    double dual_infeasibility = std::numeric_limits<double>::quiet_NaN();
    double objective_value = std::numeric_limits<double>::quiet_NaN();
};

struct ConicSolution {
    ConicStatus status = ConicStatus::numerical_failure;
    Eigen::VectorXd assignment;  // variable values theta
    ConicStats stats;
};

namespace detail {

// Dual-form block SDP:  max b.y  s.t.  Z = C - sum_i y_i A_i >= 0.
// The main LMI is block 0; every nonnegative scalar variable owns a 1x1 block
// and every shifted-PSD variable group owns a block of its own, so the cone
// constraints of the LmiProblem become one uniform semidefinite condition.
struct BlockSdp {
    std::vector<Index> dims;
    std::vector<Eigen::MatrixXd> C;
    // per variable: list of (block, coefficient matrix)
    std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>> A;
    // per block: variables touching it
    std::vector<std::vector<Index>> touching;
    Eigen::VectorXd b;
    Index total_dim = 0;

    void add_block(Index d, Eigen::MatrixXd Cb)
    {
        dims.push_back(d);
        C.push_back(std::move(Cb));
        touching.emplace_back();
        total_dim += d;
    }

    void add_coeff(Index var, int block, Eigen::MatrixXd mat)
    {
        A[static_cast<std::size_t>(var)].push_back({block, std::move(mat)});
        touching[static_cast<std::size_t>(block)].push_back(var);
    }
};

// Variables are rescaled so every coefficient collection has unit Frobenius
// norm; var_scale maps solved values back (theta_true = theta_scaled / scale).
inline BlockSdp to_block_sdp(const LmiProblem& p, Eigen::VectorXd& var_scale)
{
    BlockSdp s;
    const Index m = p.var_count();
    s.A.resize(static_cast<std::size_t>(m));
    s.b = -p.objective;
    var_scale = Eigen::VectorXd::Ones(m);

    s.add_block(p.dim, -p.F0);
    for (Index i = 0; i < m; ++i)
        if (p.basis[static_cast<std::size_t>(i)].size() > 0)
            s.add_coeff(i, 0, p.basis[static_cast<std::size_t>(i)]);

    for (const auto& g : p.layout.groups()) {
        if (g.cone == Cone::nonneg) {
            for (Index k = 0; k < g.count; ++k) {
                const int blk = static_cast<int>(s.dims.size());
                s.add_block(1, Eigen::MatrixXd::Zero(1, 1));
                Eigen::MatrixXd a(1, 1);
                a(0, 0) = -1.0;
                s.add_coeff(g.offset + k, blk, std::move(a));
            }
        } else if (g.cone == Cone::psd) {
            const int blk = static_cast<int>(s.dims.size());
            const Index d = g.psd_dim;
            s.add_block(d, -g.psd_shift * Eigen::MatrixXd::Identity(d, d));
            Index coord = g.offset;
            for (Index j = 0; j < d; ++j)
                for (Index i = 0; i <= j; ++i) {
                    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
                    a(i, j) = -1.0;
                    a(j, i) = -1.0;
                    if (i == j) a(i, i) = -1.0;
                    s.add_coeff(coord++, blk, std::move(a));
                }
        }
    }

    for (Index i = 0; i < m; ++i) {
        double nrm2 = 0;
        for (const auto& [blk, mat] : s.A[static_cast<std::size_t>(i)])
            nrm2 += mat.squaredNorm();
        const double sc = std::sqrt(nrm2);
        if (sc > 0 && std::abs(sc - 1.0) > 1e-12) {
            for (auto& [blk, mat] : s.A[static_cast<std::size_t>(i)]) mat /= sc;
            s.b[i] /= sc;
            var_scale[i] = sc;
        }
    }
    return s;
}

using BlockMat = std::vector<Eigen::MatrixXd>;

inline double block_dot(const BlockMat& a, const BlockMat& b)
{
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += (a[k].array() * b[k].array()).sum();
    return s;
}

inline double block_fro(const BlockMat& a)
{
    double s = 0;
    for (const auto& m : a) s += m.squaredNorm();
    return std::sqrt(s);
}

// largest alpha with S + alpha dS >= 0, via eigenvalues of L^-1 dS L^-T
inline double max_step(const BlockMat& S, const BlockMat& dS)
{
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < S.size(); ++k) {
        if (S[k].rows() == 1) {
            if (dS[k](0, 0) < 0) alpha = std::min(alpha, -S[k](0, 0) / dS[k](0, 0));
            continue;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(S[k]);
        if (llt.info() != Eigen::Success) return 0.0;
        Eigen::MatrixXd W = llt.matrixL().solve(dS[k]);
        W = llt.matrixL().solve(W.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(W),
                                                          Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
}

inline bool is_pd(const BlockMat& S)
{
    for (const auto& m : S) {
        if (m.rows() == 1) {
            if (!(m(0, 0) > 0)) return false;
        } else {
            Eigen::LLT<Eigen::MatrixXd> llt(m);
            if (llt.info() != Eigen::Success) return false;
        }
    }
    return true;
}

}  // namespace detail

/// Interior-point solve of the LMI problem on the homogeneous self-dual
/// embedding (Nesterov-Todd scaling, Mehrotra predictor-corrector, Gondzio
/// centrality corrections). The embedding starts from an exactly feasible
/// interior point of the extended system, so only complementarity has to be
/// driven to zero; tau/kappa decide between optimality and infeasibility.
inline ConicSolution conic_solve(const LmiProblem& problem, const ConicOptions& opts = {})
{
    using detail::BlockMat;
    Eigen::VectorXd var_scale;
    const detail::BlockSdp sdp = detail::to_block_sdp(problem, var_scale);
    const Index m = problem.var_count();
    const std::size_t nblk = sdp.dims.size();
    const double nbar = static_cast<double>(sdp.total_dim) + 1.0;

    ConicSolution out;
    out.assignment = Eigen::VectorXd::Zero(m);
    if (m == 0) {
        out.status = out.stats.status = ConicStatus::optimal;
        return out;
    }

    auto a_apply = [&](const BlockMat& Xb) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
        for (Index i = 0; i < m; ++i)
            for (const auto& [blk, mat] : sdp.A[static_cast<std::size_t>(i)])
                r[i] += (mat.array() * Xb[static_cast<std::size_t>(blk)].array()).sum();
        return r;
    };
    auto a_star_sub = [&](const Eigen::VectorXd& y, BlockMat& acc) {
        for (Index i = 0; i < m; ++i)
            for (const auto& [blk, mat] : sdp.A[static_cast<std::size_t>(i)])
                acc[static_cast<std::size_t>(blk)] -= y[i] * mat;
    };
    auto dot_blocks = [&](const BlockMat& a, const BlockMat& b) {
        return detail::block_dot(a, b);
    };

    // interior starting point of the embedding
    BlockMat X(nblk), Z(nblk);
    for (std::size_t k = 0; k < nblk; ++k) {
        X[k] = Eigen::MatrixXd::Identity(sdp.dims[k], sdp.dims[k]);
        Z[k] = Eigen::MatrixXd::Identity(sdp.dims[k], sdp.dims[k]);
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    double tau = 1.0, kappa = 1.0, theta = 1.0;

    // embedding data chosen so the starting point solves the extended system
    const Eigen::VectorXd r_p = sdp.b - a_apply(X);
    BlockMat R_d(nblk);
    double c_tr = 0;
    for (std::size_t k = 0; k < nblk; ++k) {
        R_d[k] = sdp.C[k] - Z[k];
        c_tr += sdp.C[k].trace();
    }
    const double r_g = 1.0 + c_tr;
    const double beta_bar = nbar;

    const double b_norm = sdp.b.norm();
    double c_norm = 0;
    for (const auto& Cb : sdp.C) c_norm += Cb.squaredNorm();
    c_norm = std::sqrt(c_norm);

    double mu = (dot_blocks(X, Z) + tau * kappa) / nbar;
    const double mu0 = mu;

    BlockMat e2(nblk), work(nblk);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        out.stats.iterations = iter;

        // residuals of the extended system (stay at roundoff level)
        Eigen::VectorXd e1 = a_apply(X) - sdp.b * tau + r_p * theta;
        for (std::size_t k = 0; k < nblk; ++k)
            e2[k] = sdp.C[k] * tau - R_d[k] * theta - Z[k];
        {
            BlockMat tmp = e2;
            a_star_sub(y, tmp);
            e2 = tmp;
        }
        const double pobj_h = dot_blocks(sdp.C, X);
        const double dobj_h = sdp.b.dot(y);
        const double e3 = dobj_h - pobj_h + r_g * theta - kappa;
        double rd_x = 0;
        for (std::size_t k = 0; k < nblk; ++k)
            rd_x += (R_d[k].array() * X[k].array()).sum();
        const double e4 = -r_p.dot(y) + rd_x - r_g * tau + beta_bar;

        mu = (dot_blocks(X, Z) + tau * kappa) / nbar;

        // de-homogenized convergence test
        const double pobj = pobj_h / tau;
        const double dobj = dobj_h / tau;
        const double rel_gap =
            std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double rel_pinf = (a_apply(X) / tau - sdp.b).norm() / (1.0 + b_norm);
        double dinf_acc = 0;
        {
            BlockMat tmp(nblk);
            for (std::size_t k = 0; k < nblk; ++k) tmp[k] = sdp.C[k] - Z[k] / tau;
            Eigen::VectorXd yt = y / tau;
            a_star_sub(yt, tmp);
            dinf_acc = detail::block_fro(tmp);
        }
        const double rel_dinf = dinf_acc / (1.0 + c_norm);

        out.assignment = (y / tau).cwiseQuotient(var_scale);
        out.stats.gap = rel_gap;
        out.stats.primal_infeasibility = rel_pinf;
        out.stats.dual_infeasibility = rel_dinf;
        out.stats.objective_value = problem.objective.dot(out.assignment);

        if (opts.trace)
            std::fprintf(stderr,
                         "[conic] it=%3d mu=%9.2e tau=%8.2e kappa=%8.2e gap=%9.2e "
                         "pinf=%9.2e dinf=%9.2e obj=%12.5e\n",
                         iter, mu, tau, kappa, rel_gap, rel_pinf, rel_dinf,
                         out.stats.objective_value);

        if (rel_gap <= opts.tol_gap && rel_pinf <= opts.tol_feas &&
            rel_dinf <= opts.tol_feas) {
            out.status = out.stats.status = ConicStatus::optimal;
            return out;
        }

        // infeasibility / unboundedness rays
        if (tau < 1e-10 * std::max(1.0, kappa) || mu < 1e-14 * mu0) {
            if (dobj_h > 1e-12) {
                // Farkas ray for the equality side: the LMI objective is
                // unbounded below
                out.status = out.stats.status = ConicStatus::unbounded;
            } else if (pobj_h < -1e-12) {
                // improving ray for the semidefinite side: no multiplier
                // assignment satisfies the LMI
                out.status = out.stats.status = ConicStatus::infeasible;
            } else {
                out.status = out.stats.status = ConicStatus::numerical_failure;
            }
            return out;
        }

        // Nesterov-Todd scaling per block: W = G G^T with G = L_x V S^(-1/2)
        // from the SVD L_z^T L_x = U S V^T, so that W Z W = X
        BlockMat Zinv(nblk), Wnt(nblk), Gs(nblk), Gsinv(nblk);
        std::vector<Eigen::VectorXd> sigma_nt(nblk);
        bool ok = true;
        for (std::size_t k = 0; k < nblk && ok; ++k) {
            Eigen::LLT<Eigen::MatrixXd> lltz(Z[k]);
            Eigen::LLT<Eigen::MatrixXd> lltx(X[k]);
            if (lltz.info() != Eigen::Success || lltx.info() != Eigen::Success) {
                ok = false;
                break;
            }
            Zinv[k] = lltz.solve(Eigen::MatrixXd::Identity(sdp.dims[k], sdp.dims[k]));
            if (sdp.dims[k] == 1) {
                const double g = std::pow(X[k](0, 0) / Z[k](0, 0), 0.25);
                Gs[k] = Eigen::MatrixXd::Constant(1, 1, g);
                Gsinv[k] = Eigen::MatrixXd::Constant(1, 1, 1.0 / g);
                Wnt[k] = Eigen::MatrixXd::Constant(1, 1, g * g);
                sigma_nt[k] =
                    Eigen::VectorXd::Constant(1, std::sqrt(X[k](0, 0) * Z[k](0, 0)));
                continue;
            }
            const Eigen::MatrixXd Lx = lltx.matrixL();
            const Eigen::MatrixXd Lz = lltz.matrixL();
            Eigen::BDCSVD<Eigen::MatrixXd> svd(
                Lz.transpose() * Lx, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const Eigen::VectorXd sv = svd.singularValues();
            if (sv.minCoeff() <= 0) {
                ok = false;
                break;
            }
            Gs[k] = Lx * svd.matrixV() * sv.cwiseSqrt().cwiseInverse().asDiagonal();
            Gsinv[k] = sv.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() *
                       Lx.triangularView<Eigen::Lower>().solve(
                           Eigen::MatrixXd::Identity(sdp.dims[k], sdp.dims[k]));
            Wnt[k] = symmetrized(Gs[k] * Gs[k].transpose());
            sigma_nt[k] = sv;
        }
        if (!ok) {
            out.status = out.stats.status = ConicStatus::numerical_failure;
            return out;
        }

        // Schur complement M_ij = sum_blocks tr(A_i W A_j W)
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + 2, m + 2);
        for (std::size_t k = 0; k < nblk; ++k) {
            const auto& touch = sdp.touching[k];
            for (Index j : touch) {
                const Eigen::MatrixXd* Aj = nullptr;
                for (const auto& [blk, mat] : sdp.A[static_cast<std::size_t>(j)])
                    if (blk == static_cast<int>(k)) Aj = &mat;
                const Eigen::MatrixXd T = Wnt[k] * (*Aj) * Wnt[k];
                for (Index i : touch) {
                    if (i > j) continue;
                    const Eigen::MatrixXd* Ai = nullptr;
                    for (const auto& [blk, mat] : sdp.A[static_cast<std::size_t>(i)])
                        if (blk == static_cast<int>(k)) Ai = &mat;
                    const double v = (Ai->array() * T.array()).sum();
                    K(i, j) += v;
                    if (i != j) K(j, i) += v;
                }
            }
        }

        // scaled images of C and R_d plus the border scalars
        BlockMat WCW(nblk), WRW(nblk);
        for (std::size_t k = 0; k < nblk; ++k) {
            WCW[k] = symmetrized(Wnt[k] * sdp.C[k] * Wnt[k]);
            WRW[k] = symmetrized(Wnt[k] * R_d[k] * Wnt[k]);
        }
        const Eigen::VectorXd u_vec = a_apply(WCW);
        const Eigen::VectorXd v_vec = a_apply(WRW);
        const double c_ww = dot_blocks(sdp.C, WCW);
        const double c_rd = dot_blocks(sdp.C, WRW);
        const double r_ww = dot_blocks(R_d, WRW);

        K.block(0, m, m, 1) = -(u_vec + sdp.b);
        K.block(0, m + 1, m, 1) = v_vec + r_p;
        K.block(m, 0, 1, m) = (sdp.b - u_vec).transpose();
        K(m, m) = c_ww + kappa / tau;
        K(m, m + 1) = r_g - c_rd;
        K.block(m + 1, 0, 1, m) = (v_vec - r_p).transpose();
        K(m + 1, m) = -(c_rd + r_g);
        K(m + 1, m + 1) = r_ww;

        // static proximal regularization tames directions along degenerate
        // optimal faces; the embedding residuals absorb the perturbation on
        // the next iteration
        {
            double kreg = 1e-9;
            if (const char* e = std::getenv("POLGAP_KREG")) kreg = atof(e);
            const double dmax = K.diagonal().cwiseAbs().maxCoeff();
            K.diagonal().array() += kreg * (1.0 + dmax);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> Klu(K);

        // ingredients independent of the direction target
        BlockMat We2W(nblk);
        for (std::size_t k = 0; k < nblk; ++k)
            We2W[k] = symmetrized(Wnt[k] * e2[k] * Wnt[k]);
        const Eigen::VectorXd a_we2 = a_apply(We2W);
        const Eigen::VectorXd a_x = a_apply(X);
        const Eigen::VectorXd a_zinv = a_apply(Zinv);
        const double c_zinv = dot_blocks(sdp.C, Zinv);
        const double r_zinv = dot_blocks(R_d, Zinv);
        const double c_e2 = dot_blocks(sdp.C, We2W);
        const double r_e2 = dot_blocks(R_d, We2W);
        const double c_x = pobj_h;
        const double r_x = rd_x;

        struct Direction {
            Eigen::VectorXd dy;
            BlockMat dX, dZ;
            double dtau = 0, dtheta = 0, dkappa = 0;
        };

        // Newton solve for complementarity target Theta (matrix part) and
        // pair_t (tau*kappa part); with_residuals folds in e1..e4
        auto solve_dir = [&](const BlockMat* Theta, double pair_t,
                             const BlockMat* corr, double corr_tau,
                             bool with_residuals, Direction& d) {
            Eigen::VectorXd rhs(m + 2);
            double c_th = 0, r_th = 0;
            Eigen::VectorXd a_th = Eigen::VectorXd::Zero(m);
            if (Theta) {
                a_th = a_apply(*Theta);
                c_th = dot_blocks(sdp.C, *Theta);
                r_th = dot_blocks(R_d, *Theta);
            }
            double c_co = 0, r_co = 0;
            Eigen::VectorXd a_co = Eigen::VectorXd::Zero(m);
            if (corr) {
                a_co = a_apply(*corr);
                c_co = dot_blocks(sdp.C, *corr);
                r_co = dot_blocks(R_d, *corr);
            }
            rhs.head(m) = -a_th + a_co;
            rhs[m] = c_th - c_co + (pair_t - corr_tau) / tau;
            rhs[m + 1] = -r_th + r_co;
            if (with_residuals) {
                rhs.head(m) += -e1 + a_x + a_we2;
                rhs[m] += -e3 - c_x - c_e2 - kappa;
                rhs[m + 1] += -e4 + r_x + r_e2;
            }
            const Eigen::VectorXd sol = Klu.solve(rhs);
            d.dy = sol.head(m);
            d.dtau = sol[m];
            d.dtheta = sol[m + 1];

            d.dZ.resize(nblk);
            for (std::size_t k = 0; k < nblk; ++k) {
                d.dZ[k] = sdp.C[k] * d.dtau - R_d[k] * d.dtheta;
                if (with_residuals) d.dZ[k] += e2[k];
            }
            a_star_sub(d.dy, d.dZ);

            d.dX.resize(nblk);
            for (std::size_t k = 0; k < nblk; ++k) {
                Eigen::MatrixXd raw = -(Wnt[k] * d.dZ[k] * Wnt[k]);
                if (Theta) raw += (*Theta)[k];
                if (corr) raw -= (*corr)[k];
                if (with_residuals) raw -= X[k];
                d.dX[k] = symmetrized(raw);
            }
            d.dkappa = (pair_t - corr_tau - kappa * d.dtau) / tau;
            if (with_residuals) d.dkappa -= kappa;
        };

        // maps a symmetric correction in the scaled frame back through the
        // inverse Lyapunov operator of the NT point: [L^-1 S]_ij = 2 S_ij /
        // (sigma_i + sigma_j)
        auto lyap_from_scaled = [&](std::size_t k, const Eigen::MatrixXd& S) {
            const Eigen::VectorXd& sv = sigma_nt[k];
            Eigen::MatrixXd T(S.rows(), S.cols());
            for (Index j = 0; j < S.cols(); ++j)
                for (Index i = 0; i < S.rows(); ++i)
                    T(i, j) = 2.0 * S(i, j) / (sv[i] + sv[j]);
            return symmetrized(Gs[k] * T * Gs[k].transpose());
        };

        auto max_alpha = [&](const Direction& d) {
            double a = detail::max_step(X, d.dX);
            a = std::min(a, detail::max_step(Z, d.dZ));
            if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0) a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        // predictor
        Direction aff;
        solve_dir(nullptr, 0.0, nullptr, 0.0, true, aff);
        const double alpha_aff = std::min(1.0, max_alpha(aff));

        auto dir_residuals = [&](const Direction& d, const char* label) {
            const Eigen::VectorXd q1 =
                a_apply(d.dX) - sdp.b * d.dtau + r_p * d.dtheta + e1;
            const double q3 = sdp.b.dot(d.dy) - dot_blocks(sdp.C, d.dX) +
                              r_g * d.dtheta - d.dkappa + e3;
            double rdx = 0;
            for (std::size_t k = 0; k < nblk; ++k)
                rdx += (R_d[k].array() * d.dX[k].array()).sum();
            const double q4 = -r_p.dot(d.dy) + rdx - r_g * d.dtau + e4;
            std::fprintf(stderr,
                         "[conic]        %s |q1|=%9.2e q3=%9.2e q4=%9.2e "
                         "e4=%9.2e\n",
                         label, q1.norm(), q3, q4, e4);
        };
        if (opts.trace) dir_residuals(aff, "aff ");

        double mu_aff = tau + alpha_aff * aff.dtau;
        mu_aff *= kappa + alpha_aff * aff.dkappa;
        for (std::size_t k = 0; k < nblk; ++k)
            mu_aff += ((X[k] + alpha_aff * aff.dX[k]).array() *
                       (Z[k] + alpha_aff * aff.dZ[k]).array())
                          .sum();
        mu_aff /= nbar;
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
        sigma = std::clamp(sigma, 1e-10, 1.0);
        const double nu = sigma * mu;

        // Mehrotra corrector
        BlockMat theta_t(nblk), corr(nblk);
        for (std::size_t k = 0; k < nblk; ++k) {
            theta_t[k] = nu * Zinv[k];
            const Eigen::MatrixXd dXs =
                Gsinv[k] * aff.dX[k] * Gsinv[k].transpose();
            const Eigen::MatrixXd dZs = Gs[k].transpose() * aff.dZ[k] * Gs[k];
            corr[k] = lyap_from_scaled(k, symmetrized(dXs * dZs));
        }
        const double corr_tau = aff.dtau * aff.dkappa;

        Direction dir;
        solve_dir(&theta_t, nu, &corr, corr_tau, true, dir);
        double alpha = std::min(1.0, opts.step_fraction * max_alpha(dir));

        // Gondzio centrality corrections: clip the scaled complementarity
        // spectrum at an aspirational point back into a band around nu
        for (int round = 0; round < 10; ++round) {
            const double a_t = std::min(1.0, 1.5 * alpha + 0.3);
            BlockMat clip(nblk);
            bool active = false;
            for (std::size_t k = 0; k < nblk; ++k) {
                const Eigen::MatrixXd Xs =
                    Gsinv[k] * (X[k] + a_t * dir.dX[k]) * Gsinv[k].transpose();
                const Eigen::MatrixXd Zs =
                    Gs[k].transpose() * (Z[k] + a_t * dir.dZ[k]) * Gs[k];
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                    symmetrized(Xs * Zs));
                Eigen::VectorXd dl = es.eigenvalues();
                bool block_active = false;
                for (Index i = 0; i < dl.size(); ++i) {
                    const double clipped = std::clamp(dl[i], 0.1 * nu, 10.0 * nu);
                    dl[i] = clipped - dl[i];
                    if (dl[i] != 0.0) block_active = true;
                }
                if (!block_active) {
                    clip[k] = Eigen::MatrixXd::Zero(sdp.dims[k], sdp.dims[k]);
                    continue;
                }
                active = true;
                const Eigen::MatrixXd dT = es.eigenvectors() * dl.asDiagonal() *
                                           es.eigenvectors().transpose();
                clip[k] = lyap_from_scaled(k, dT);
            }
            double pair_clip = 0;
            {
                const double prod = (tau + a_t * dir.dtau) * (kappa + a_t * dir.dkappa);
                pair_clip = std::clamp(prod, 0.1 * nu, 10.0 * nu) - prod;
                if (pair_clip != 0.0) active = true;
            }
            if (!active) break;

            Direction cdir;
            solve_dir(&clip, pair_clip, nullptr, 0.0, false, cdir);
            Direction trial;
            trial.dy = dir.dy + cdir.dy;
            trial.dtau = dir.dtau + cdir.dtau;
            trial.dtheta = dir.dtheta + cdir.dtheta;
            trial.dkappa = dir.dkappa + cdir.dkappa;
            trial.dX.resize(nblk);
            trial.dZ.resize(nblk);
            for (std::size_t k = 0; k < nblk; ++k) {
                trial.dX[k] = dir.dX[k] + cdir.dX[k];
                trial.dZ[k] = dir.dZ[k] + cdir.dZ[k];
            }
            const double alpha_new =
                std::min(1.0, opts.step_fraction * max_alpha(trial));
            if (alpha_new < alpha + 0.02) break;
            dir = std::move(trial);
            alpha = alpha_new;
        }

        if (opts.trace) {
            // scaled-frame picture of the main block: centrality spectrum and
            // the relative direction magnitudes
            const Eigen::VectorXd& sv = sigma_nt[0];
            const Eigen::MatrixXd dXs =
                Gsinv[0] * dir.dX[0] * Gsinv[0].transpose();
            const Eigen::MatrixXd dZs = Gs[0].transpose() * dir.dZ[0] * Gs[0];
            Eigen::MatrixXd Dm = sv.asDiagonal();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(symmetrized(
                sv.cwiseSqrt().cwiseInverse().asDiagonal() * dXs *
                sv.cwiseSqrt().cwiseInverse().asDiagonal()));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ez(symmetrized(
                sv.cwiseSqrt().cwiseInverse().asDiagonal() * dZs *
                sv.cwiseSqrt().cwiseInverse().asDiagonal()));
            double worst_ratio = 1e300, worst_step = 1e300;
            int worst_blk = -1, step_blk = -1;
            for (std::size_t k = 1; k < nblk; ++k) {
                const double r = X[k](0, 0) * Z[k](0, 0) / mu;
                if (r < worst_ratio) { worst_ratio = r; worst_blk = static_cast<int>(k); }
                double a = 1e300;
                if (dir.dX[k](0, 0) < 0) a = -X[k](0, 0) / dir.dX[k](0, 0);
                if (dir.dZ[k](0, 0) < 0)
                    a = std::min(a, -Z[k](0, 0) / dir.dZ[k](0, 0));
                if (a < worst_step) { worst_step = a; step_blk = static_cast<int>(k); }
            }
            const double tk_step = std::min(
                dir.dtau < 0 ? -tau / dir.dtau : 1e300,
                dir.dkappa < 0 ? -kappa / dir.dkappa : 1e300);
            std::fprintf(stderr,
                         "[conic]        sigma=%8.2e a_aff=%6.3f alpha=%6.3f "
                         "blk0 dXs/D:[%7.2f,%7.2f] worst1x1 xz/mu=%8.2e@%d "
                         "minstep1x1=%8.2e@%d tkstep=%8.2e\n",
                         sigma, alpha_aff, alpha, ex.eigenvalues().minCoeff(),
                         ex.eigenvalues().maxCoeff(), worst_ratio, worst_blk,
                         worst_step, step_blk, tk_step);
            (void)ez;
            (void)Dm;
        }

        // guard strict interiority under rounding
        BlockMat Xn(nblk), Zn(nblk);
        double tn = 0, kn = 0;
        for (int guard = 0; guard < 40; ++guard) {
            for (std::size_t k = 0; k < nblk; ++k) {
                Xn[k] = X[k] + alpha * dir.dX[k];
                Zn[k] = Z[k] + alpha * dir.dZ[k];
            }
            tn = tau + alpha * dir.dtau;
            kn = kappa + alpha * dir.dkappa;
            if (tn > 0 && kn > 0 && detail::is_pd(Xn) && detail::is_pd(Zn)) break;
            alpha *= 0.8;
        }
        X.swap(Xn);
        Z.swap(Zn);
        y += alpha * dir.dy;
        tau = tn;
        kappa = kn;
        theta += alpha * dir.dtheta;
    }

    out.status = out.stats.status = ConicStatus::iteration_limit;
    return out;
}

}  // namespace polgap
