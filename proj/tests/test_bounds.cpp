#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "polgap/bounds.hpp"
#include "polgap/sample.hpp"
#include "polgap/train.hpp"

using namespace polgap;
using namespace polgap::testing;

namespace {

ActivationKind<double> identity_activation()
{
    auto act = ActivationKind<double>::custom("identity", [](double s) { return s; });
    act.sector_delta = 1.0;
    act.slope = {1.0, 1.0};
    act.complement_positive = true;
    act.complementarity = true;
    return act;
}

ImplicitNetwork<double> trained_paper_net(const CondensedQp<double>& qp, Index width,
                                          std::uint64_t seed, Index samples = 2000,
                                          int epochs = 120)
{
    TrainingConfig<double> cfg;
    cfg.sample_count = samples;
    cfg.epochs = epochs;
    cfg.learning_rate = 0.05;
    cfg.seed = seed;
    cfg.box_lower = VectorX<double>::Constant(2, -1.0);
    cfg.box_upper = VectorX<double>::Constant(2, 1.0);
    return train_imitator(qp, width, cfg);
}

InputBox<double> unit_box(Index n = 2)
{
    return InputBox<double>(VectorX<double>::Constant(n, -1.0),
                            VectorX<double>::Constant(n, 1.0));
}

}  // namespace

TEST_CASE("analyze: exact linear replica of the MPC first move certifies zero error")
{
    // N = 1, unconstrained: u_mpc = -(h / 2H) x, replicated by a one-neuron
    // identity-activation network
    auto sys = paper_system();
    LtiMpcSpec<double> spec(sys, 1, MatrixX<double>::Identity(2, 2),
                            MatrixX<double>::Identity(1, 1),
                            MatrixX<double>::Zero(0, 1), VectorX<double>(0));
    auto qp = condense(spec);

    ImplicitNetwork<double> net;
    net.W = MatrixX<double>::Zero(1, 1);
    net.W0 = -qp.h / (2.0 * qp.H(0, 0));
    net.beta = VectorX<double>::Zero(1);
    net.C_nn = RowVectorX<double>::Ones(1);
    net.D_nn = 0.0;
    net.activation = identity_activation();
    net.layer_dims = {1};
    net.validate();

    auto cfg = QcConfig::defaults_for(net.activation);
    auto cert = analyze(net, qp, unit_box(), cfg);
    CHECK(cert.gamma_x <= 1e-6);
    CHECK(cert.gamma <= 1e-6);
    CHECK(cert.lmi_residual <= 1e-7);
}

TEST_CASE("analyze: trained ReLU net on the benchmark MPC")
{
    auto qp = condense(paper_mpc_spec());
    auto net = trained_paper_net(qp, 5, 42);
    auto box = unit_box();
    auto cfg = QcConfig::defaults_for(net.activation);

    auto cert = analyze(net, qp, box, cfg);
    CHECK(cert.gamma <= 1e-6);
    CHECK(cert.lmi_residual <= 1e-7);

    const double lb = empirical_lower_bound(net, qp, box, SampleSpec::grid(51), cert.gamma);
    CHECK(cert.gamma_x >= lb - 1e-9);

    auto sound = soundness_check(net, qp, box, cert.gamma_x, cert.gamma,
                                 SampleSpec::random(2000, 7));
    CHECK(sound.violations == 0);
}

TEST_CASE("analyze: certificate stays sound on a shrunken box")
{
    auto qp = condense(paper_mpc_spec(6));
    auto net = trained_paper_net(qp, 4, 9, 800, 60);
    InputBox<double> tiny(VectorX<double>::Constant(2, -1e-3),
                          VectorX<double>::Constant(2, 1e-3));
    auto cfg = QcConfig::defaults_for(net.activation);
    auto cert = analyze(net, qp, tiny, cfg);

    auto sound = soundness_check(net, qp, tiny, cert.gamma_x, cert.gamma,
                                 SampleSpec::random(10000, 21));
    CHECK(sound.violations == 0);
}

TEST_CASE("analyze: monotone in QC richness and box size")
{
    auto qp = condense(paper_mpc_spec(6));
    auto net = trained_paper_net(qp, 4, 13, 800, 60);
    auto box = unit_box();

    QcConfig base;
    base.tags = {Tag::sector, Tag::positive, Tag::complement_positive};
    auto cert_base = analyze(net, qp, box, base);

    QcConfig rich = base;
    rich.tags.insert(Tag::complementarity);
    rich.tags.insert(Tag::slope);
    rich.cross_terms = true;
    auto cert_rich = analyze(net, qp, box, rich);
    CHECK(cert_rich.objective() <= cert_base.objective() + 1e-6);

    auto cert_small = analyze(net, qp, box.shrunk(0.5), base);
    CHECK(cert_small.objective() <= cert_base.objective() + 1e-6);
}

TEST_CASE("check_certificate: trivial assignments")
{
    LmiProblem p;
    p.dim = 2;
    p.layout.add_group(Tag::gamma, 1, Cone::nonneg);
    p.basis.assign(1, Eigen::MatrixXd());
    p.objective = Eigen::VectorXd::Zero(1);

    p.F0 = -Eigen::MatrixXd::Identity(2, 2);
    auto ok = check_certificate(p, Eigen::VectorXd::Zero(1));
    CHECK(ok.valid);
    CHECK(ok.lmi_residual == doctest::Approx(-1.0));

    p.F0 = Eigen::Vector2d(1.0, -1.0).asDiagonal();
    auto bad = check_certificate(p, Eigen::VectorXd::Zero(1));
    CHECK_FALSE(bad.valid);
    CHECK(bad.lmi_residual == doctest::Approx(1.0));
}

TEST_CASE("check_certificate: rejects tampered multipliers")
{
    auto qp = condense(paper_mpc_spec(6));
    auto net = trained_paper_net(qp, 4, 17, 800, 60);
    auto box = unit_box();
    auto cfg = QcConfig::defaults_for(net.activation);
    auto problem = build_analysis_problem(net, qp, box, cfg);
    auto cert = analyze(net, qp, box, cfg);

    CHECK(check_certificate(problem, cert.multipliers.values).valid);

    // cone violation of 1e-3 on a nonnegative multiplier
    auto tampered = cert.multipliers.values;
    tampered[problem.layout.at(Tag::sector).offset] = -1e-3;
    auto chk = check_certificate(problem, tampered);
    CHECK_FALSE(chk.valid);
    CHECK(chk.max_cone_violation >= 1e-3 - 1e-12);

    // large perturbation breaks the matrix inequality
    auto broken = cert.multipliers.values;
    broken[problem.layout.at(Tag::gamma_x).offset] = 0.0;
    broken[problem.layout.at(Tag::sector).offset + 1] += 50.0;
    auto chk2 = check_certificate(problem, broken);
    CHECK_FALSE(chk2.valid);
}

TEST_CASE("synthesize: zero network yields a vanishing certified error")
{
    ImplicitNetwork<double> net;
    net.W = MatrixX<double>::Zero(2, 2);
    net.W0 = MatrixX<double>::Zero(2, 2);
    net.beta = VectorX<double>::Zero(2);
    net.C_nn = RowVectorX<double>::Zero(2);
    net.D_nn = 0.0;
    net.activation = ActivationKind<double>::relu();
    net.layer_dims = {2};
    net.validate();

    auto cfg = QcConfig::defaults_for(net.activation);
    auto res = synthesize(net, unit_box(), 3, 6, cfg);
    CHECK(res.certificate.gamma_x <= 1e-6);
    CHECK(res.certificate.gamma <= 1e-6);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(res.qp.H, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= 1e-6 - 1e-9);
    if (res.qp.b.size() > 0) CHECK(res.qp.b.minCoeff() >= 0.0);

    // both policies are identically zero on the synthesized QP
    auto sol = solve_qp(res.qp, VectorX<double>(VectorX<double>::Constant(2, 0.4)));
    CHECK(std::abs(sol.u) <= 1e-6);
}

TEST_CASE("synthesize: certified bound is sound and re-analysis can only improve")
{
    auto qp = condense(paper_mpc_spec(6));
    auto net = trained_paper_net(qp, 4, 23, 800, 60);
    auto box = unit_box();
    auto cfg = QcConfig::defaults_for(net.activation);

    auto res = synthesize(net, box, 6, 12, cfg);
    auto sound = soundness_check(net, res.qp, box, res.certificate.gamma_x,
                                 res.certificate.gamma, SampleSpec::random(10000, 3));
    CHECK(sound.violations == 0);

    auto re = analyze(net, res.qp, box, cfg);
    CHECK(re.objective() <= res.certificate.objective() + 1e-6);
}
