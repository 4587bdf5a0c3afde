#pragma once

#include "polgap/conic.hpp"

#include <string>
#include <utility>
#include <vector>

namespace polgap {

struct CertificateCheck {
    bool valid = false;
    double lmi_residual = 0;        // largest eigenvalue of the assembled LMI
    double max_cone_violation = 0;  // worst violation across all variable cones
    std::vector<std::string> violations;
};

/// Independent verification of a multiplier assignment: reassembles the LMI,
/// computes its largest eigenvalue with a dense symmetric eigensolver and
/// checks every cone membership. Never trusts solver status.
inline CertificateCheck check_certificate(const LmiProblem& problem,
                                          const Eigen::VectorXd& assignment,
                                          double lmi_tol = 1e-7,
                                          double cone_tol = 1e-9)
{
    if (assignment.size() != problem.var_count())
        throw DimensionMismatch("check_certificate: assignment does not cover the variables");

    CertificateCheck out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        symmetrized(problem.assemble(assignment)), Eigen::EigenvaluesOnly);
    out.lmi_residual = es.eigenvalues().maxCoeff();
    if (out.lmi_residual > lmi_tol)
        out.violations.push_back("LMI residual " + std::to_string(out.lmi_residual) +
                                 " above tolerance");

    for (const auto& g : problem.layout.groups()) {
        if (g.cone == Cone::nonneg) {
            const double lo = assignment.segment(g.offset, g.count).minCoeff();
            if (lo < -cone_tol) {
                out.max_cone_violation = std::max(out.max_cone_violation, -lo);
                out.violations.push_back(std::string(tag_name(g.tag)) +
                                         ": negative entry " + std::to_string(lo));
            }
        } else if (g.cone == Cone::psd) {
            Eigen::MatrixXd H(g.psd_dim, g.psd_dim);
            Index k = g.offset;
            for (Index j = 0; j < g.psd_dim; ++j)
                for (Index i = 0; i <= j; ++i) {
                    H(i, j) = H(j, i) = assignment[k++];
                }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(H, Eigen::EigenvaluesOnly);
            const double viol = g.psd_shift - hs.eigenvalues().minCoeff();
            if (viol > cone_tol) {
                out.max_cone_violation = std::max(out.max_cone_violation, viol);
                out.violations.push_back(std::string(tag_name(g.tag)) +
                                         ": eigenvalue below the required shift by " +
                                         std::to_string(viol));
            }
        }
    }
    out.valid = out.violations.empty();
    return out;
}

/// Proof object for the bound ||u_NN - u_MPC||^2 <= gamma_x ||x||^2 + gamma
/// over the box: the bound values, the multiplier assignment that makes the
/// LMI negative semidefinite and the independently recomputed residual.
struct BoundCertificate {
    double gamma_x = 0;
    double gamma = 0;
    MultiplierSet<double> multipliers;
    double lmi_residual = 0;
    ConicStats solver_stats;
    QcConfig qc_config;
    BoundWeights weights;
    double margin = 0;

    double objective() const
    {
        return weights.omega_x * gamma_x + weights.omega * gamma;
    }
};

struct AnalyzeOptions {
    ConicOptions conic;
    double margin = 1e-8;
    double lmi_tol = 1e-7;
    double cone_tol = 1e-9;
};

namespace detail {

inline void raise_solver_error(ConicStatus status)
{
    switch (status) {
        case ConicStatus::optimal:
            return;
        case ConicStatus::infeasible:
            throw SolverInfeasible(
                "no certificate exists for this QC configuration; enabling more "
                "quadratic constraints may help");
        case ConicStatus::unbounded:
            throw SolverNumericalFailure("conic solve reported an unbounded objective");
        case ConicStatus::iteration_limit:
            throw SolverNumericalFailure("conic solve hit the iteration limit");
        case ConicStatus::numerical_failure:
            throw SolverNumericalFailure("conic solve failed numerically");
    }
}

}  // namespace detail

/// Solves the analysis SDP for a given network/QP pair over the box and
/// returns the certified bound. Throws SolverInfeasible /
/// SolverNumericalFailure / CertificateCheckFailed.
inline BoundCertificate analyze(const ImplicitNetwork<double>& net,
                                const CondensedQp<double>& qp,
                                const InputBox<double>& box, const QcConfig& cfg,
                                const BoundWeights& weights = {},
                                const AnalyzeOptions& opts = {})
{
    LmiProblem problem =
        build_analysis_problem(net, qp, box, cfg, weights, opts.margin);

    LmiProblem scaled = problem;
    equilibrate(scaled);
    ConicSolution sol = conic_solve(scaled, opts.conic);
    detail::raise_solver_error(sol.status);

    const CertificateCheck check =
        check_certificate(problem, sol.assignment, opts.lmi_tol, opts.cone_tol);
    if (!check.valid)
        throw CertificateCheckFailed(
            "solver claimed success but the certificate failed verification: " +
            (check.violations.empty() ? std::string("?") : check.violations.front()));

    BoundCertificate cert;
    cert.multipliers.layout = problem.layout;
    cert.multipliers.values = sol.assignment;
    cert.gamma_x = cert.multipliers.value(Tag::gamma_x);
    cert.gamma = cert.multipliers.value(Tag::gamma);
    cert.lmi_residual = check.lmi_residual;
    cert.solver_stats = sol.stats;
    cert.qc_config = cfg;
    cert.weights = weights;
    cert.margin = opts.margin;
    return cert;
}

struct SynthesizeOptions {
    ConicOptions conic;
    double margin = 1e-8;
    double hessian_shift = 1e-6;
    double lmi_tol = 1e-7;
    double cone_tol = 1e-9;
};

/// QP synthesized to approximate a given network, with its certificate.
struct SynthesisResult {
    CondensedQp<double> qp;
    BoundCertificate certificate;
};

/// Solves the synthesis SDP: finds QP data (H, h, L, b) minimizing the
/// certified worst-case error against the network. Only the aggregates
/// L^T 1 and 1^T b enter the inequality, so the returned constraint rows are
/// identical copies realizing those aggregates; any other realization with
/// the same aggregates carries the same certificate.
inline SynthesisResult synthesize(const ImplicitNetwork<double>& net,
                                  const InputBox<double>& box, Index N, Index n_in,
                                  const QcConfig& cfg, const BoundWeights& weights = {},
                                  const SynthesizeOptions& opts = {})
{
    if (n_in < 1)
        throw DimensionMismatch("synthesize: need at least one constraint row");
    LmiProblem problem = build_synthesis_problem(net, box, N, cfg, weights,
                                                 opts.margin, opts.hessian_shift);

    LmiProblem scaled = problem;
    equilibrate(scaled);
    ConicSolution sol = conic_solve(scaled, opts.conic);
    detail::raise_solver_error(sol.status);

    const CertificateCheck check =
        check_certificate(problem, sol.assignment, opts.lmi_tol, opts.cone_tol);
    if (!check.valid)
        throw CertificateCheckFailed(
            "synthesis certificate failed verification: " +
            (check.violations.empty() ? std::string("?") : check.violations.front()));

    MultiplierSet<double> ms;
    ms.layout = problem.layout;
    ms.values = sol.assignment;

    const Index n_x = net.state_dim();
    Eigen::MatrixXd H = ms.psd_matrix(Tag::qp_hessian);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(H, Eigen::EigenvaluesOnly);
    if (hs.eigenvalues().minCoeff() < opts.hessian_shift - opts.cone_tol)
        throw NotPositiveDefinite("synthesize: returned H lost the required shift");

    Eigen::MatrixXd h(N, n_x);
    {
        auto seg = ms.segment(Tag::qp_linear);
        for (Index j = 0; j < N; ++j)
            for (Index d = 0; d < n_x; ++d) h(j, d) = seg[j * n_x + d];
    }
    const VectorX<double> row_sum = ms.segment(Tag::qp_row_sum);
    const double bound_sum = ms.value(Tag::qp_bound_sum);

    Eigen::MatrixXd L = Eigen::VectorXd::Ones(n_in) * row_sum.transpose() /
                        static_cast<double>(n_in);
    Eigen::VectorXd b = Eigen::VectorXd::Constant(
        n_in, std::max(0.0, bound_sum) / static_cast<double>(n_in));

    SynthesisResult out{CondensedQp<double>(H, h, L, b), BoundCertificate{}};
    out.certificate.multipliers = std::move(ms);
    out.certificate.gamma_x = out.certificate.multipliers.value(Tag::gamma_x);
    out.certificate.gamma = out.certificate.multipliers.value(Tag::gamma);
    out.certificate.lmi_residual = check.lmi_residual;
    out.certificate.solver_stats = sol.stats;
    out.certificate.qc_config = cfg;
    out.certificate.weights = weights;
    out.certificate.margin = opts.margin;
    return out;
}

}  // namespace polgap
