#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "common.hpp"
#include "polgap/lmi.hpp"

using namespace polgap;
using namespace polgap::testing;

namespace {

MultiplierSet<double> random_multipliers(const MultiplierLayout& layout, Rng& rng)
{
    auto ms = MultiplierSet<double>::zero(layout);
    for (const auto& g : layout.groups()) {
        for (Index k = 0; k < g.count; ++k)
            ms.values[g.offset + k] = (g.cone == Cone::free_var)
                                          ? rng.uniform(-1.0, 1.0)
                                          : rng.uniform(0.0, 1.0);
    }
    return ms;
}

double quad_value(const MatrixX<double>& F, const VectorX<double>& v)
{
    return v.dot(F * v);
}

VectorX<double> mu_hat(const VectorX<double>& y, const VectorX<double>& z)
{
    VectorX<double> v(y.size() + z.size() + 1);
    v << y, z, 1.0;
    return v;
}

VectorX<double> zeta_of(const VectorX<double>& x, const VectorX<double>& z,
                        const VectorX<double>& zm)
{
    VectorX<double> v(x.size() + z.size() + zm.size() + 1);
    v << x, z, zm, 1.0;
    return v;
}

}  // namespace

TEST_CASE("activation_lambda_hat: matrix form equals the direct scalar sum")
{
    Rng rng(101);
    auto net = random_relu_network(rng, 3, 5);
    QcConfig cfg = QcConfig::defaults_for(net.activation);
    cfg.tags.insert(Tag::slope);
    cfg.slope_pairwise = true;
    cfg.cross_terms = true;

    auto qp = condense(paper_mpc_spec(4));  // only used for the layout
    auto layout = make_analysis_layout(net, qp, cfg);
    auto lam_hat = activation_lambda_hat(net, layout, cfg);

    for (int k = 0; k < 1000; ++k) {
        auto ms = random_multipliers(layout, rng);
        VectorX<double> y = rng.uniform_vector(5, -2.0, 2.0);
        VectorX<double> z = rng.uniform_vector(5, -2.0, 2.0);  // algebraic identity
        const double direct = activation_qc_scalar(net, cfg, ms, y, z);
        const double matrix = quad_value(lam_hat.assemble(ms), mu_hat(y, z));
        CHECK(std::abs(direct - matrix) <= 1e-10);
    }
}

TEST_CASE("activation_lambda_hat: tanh configuration")
{
    Rng rng(103);
    std::vector<std::pair<MatrixX<double>, VectorX<double>>> layers = {
        {rng.normal_matrix(4, 2), rng.uniform_vector(4, -1.0, 1.0)}};
    auto net = from_feedforward<double>(layers, {rng.normal_matrix(1, 4), 0.0},
                                        ActivationKind<double>::tanh());
    QcConfig cfg = QcConfig::defaults_for(net.activation);
    cfg.tags.insert(Tag::slope);
    auto qp = condense(paper_mpc_spec(3));
    auto layout = make_analysis_layout(net, qp, cfg);
    auto lam_hat = activation_lambda_hat(net, layout, cfg);

    for (int k = 0; k < 300; ++k) {
        auto ms = random_multipliers(layout, rng);
        VectorX<double> y = rng.uniform_vector(4, -3.0, 3.0);
        VectorX<double> z = net.activation.apply(y);
        const double direct = activation_qc_scalar(net, cfg, ms, y, z);
        const double matrix = quad_value(lam_hat.assemble(ms), mu_hat(y, z));
        CHECK(std::abs(direct - matrix) <= 1e-10);
        CHECK(direct >= -1e-8);  // premises hold on true evaluations
    }
}

TEST_CASE("activation QCs: ReLU saturates the sector and complementarity exactly")
{
    Rng rng(107);
    auto net = random_relu_network(rng, 2, 2);
    QcConfig cfg;
    cfg.tags = {Tag::sector};
    auto qp = condense(paper_mpc_spec(3));
    auto layout = make_analysis_layout(net, qp, cfg);
    auto lam_hat = activation_lambda_hat(net, layout, cfg);

    auto ms = MultiplierSet<double>::zero(layout);
    ms.segment(Tag::sector).setOnes();
    VectorX<double> y(2);
    y << -1.0, 2.0;
    VectorX<double> z = net.activation.apply(y);
    CHECK(quad_value(lam_hat.assemble(ms), mu_hat(y, z)) == doctest::Approx(0.0));

    QcConfig ccfg;
    ccfg.tags = {Tag::complementarity};
    auto clayout = make_analysis_layout(net, qp, ccfg);
    auto clam = activation_lambda_hat(net, clayout, ccfg);
    for (int k = 0; k < 200; ++k) {
        auto cms = random_multipliers(clayout, rng);
        VectorX<double> yr = rng.uniform_vector(2, -2.0, 2.0);
        VectorX<double> zr = net.activation.apply(yr);
        CHECK(std::abs(quad_value(clam.assemble(cms), mu_hat(yr, zr))) <= 1e-12);
    }
}

TEST_CASE("lambda_from_hat: congruence preserves the scalar identically")
{
    Rng rng(109);
    for (Index layers : {Index(1), Index(2)}) {
        auto net = random_relu_network(rng, 2, 4, layers);
        QcConfig cfg = QcConfig::defaults_for(net.activation);
        auto qp = condense(paper_mpc_spec(3));
        auto layout = make_analysis_layout(net, qp, cfg);
        auto lam_hat = activation_lambda_hat(net, layout, cfg);
        auto lam = lambda_from_hat(net, lam_hat);

        for (int k = 0; k < 500; ++k) {
            auto ms = random_multipliers(layout, rng);
            VectorX<double> x = rng.uniform_vector(2, -2.0, 2.0);
            auto ev = evaluate(net, x);
            VectorX<double> mu(2 + net.width() + 1);
            mu << x, ev.z, 1.0;
            const double via_mu = quad_value(lam.assemble(ms), mu);
            const double via_hat = quad_value(lam_hat.assemble(ms), mu_hat(ev.y, ev.z));
            CHECK(std::abs(via_mu - via_hat) <= 1e-10);
            CHECK(via_hat >= -1e-8);  // aggregated premise on real evaluations
        }
    }
}

TEST_CASE("lambda_from_hat: beta-only net pushes bias terms into the corner")
{
    Rng rng(113);
    const Index M = 3;
    ImplicitNetwork<double> net;
    net.W = MatrixX<double>::Zero(M, M);
    net.W0 = MatrixX<double>::Zero(M, 2);
    net.beta = rng.uniform_vector(M, -1.0, 1.0);
    net.C_nn = rng.normal_matrix(1, M);
    net.D_nn = 0.0;
    net.activation = ActivationKind<double>::relu();
    net.layer_dims = {M};
    net.validate();

    QcConfig cfg = QcConfig::defaults_for(net.activation);
    auto qp = condense(paper_mpc_spec(3));
    auto layout = make_analysis_layout(net, qp, cfg);
    auto lam_hat = activation_lambda_hat(net, layout, cfg);
    auto lam = lambda_from_hat(net, lam_hat);
    auto ms = random_multipliers(layout, rng);

    // with W = W0 = 0 the preactivation is constant beta
    const MatrixX<double> Lh = lam_hat.assemble(ms);
    const MatrixX<double> Lm = lam.assemble(ms);
    const double corner_expected =
        net.beta.dot(Lh.topLeftCorner(M, M) * net.beta) +
        2.0 * net.beta.dot(Lh.col(2 * M).head(M)) + Lh(2 * M, 2 * M);
    CHECK(Lm(2 + M, 2 + M) == doctest::Approx(corner_expected).epsilon(1e-12));
}

TEST_CASE("mpc_qc: matrix form equals s_QP + s_in and is nonnegative on real solves")
{
    Rng rng(127);
    auto net = random_relu_network(rng, 2, 4);
    auto qp = condense(paper_mpc_spec(6));
    for (bool extension : {false, true}) {
        QcConfig cfg = QcConfig::defaults_for(net.activation);
        cfg.s_in_extension = extension;
        auto layout = make_analysis_layout(net, qp, cfg);
        auto form = mpc_qc(qp, layout, cfg, &net);

        for (int k = 0; k < 300; ++k) {
            auto ms = random_multipliers(layout, rng);
            VectorX<double> x = rng.uniform_vector(2, -1.0, 1.0);
            auto nn = evaluate(net, x);
            auto sol = solve_qp(qp, x);
            const double direct =
                mpc_qc_scalar(qp, cfg, ms, x, nn.z, sol.z, &net);
            const double matrix =
                quad_value(form.assemble(ms), zeta_of(x, nn.z, sol.z));
            CHECK(std::abs(direct - matrix) <= 1e-10);
            CHECK(direct >= -1e-8);
        }
    }
}

TEST_CASE("mpc_qc: interior optimum makes s_QP strictly nonnegative")
{
    auto qp = condense(paper_mpc_spec(6));
    Rng rng(131);
    QcConfig cfg;
    cfg.tags = {Tag::sector};
    auto net = random_relu_network(rng, 2, 2);
    auto layout = make_analysis_layout(net, qp, cfg);
    auto ms = MultiplierSet<double>::zero(layout);
    ms.segment(Tag::tau_qp).setConstant(1.0);

    VectorX<double> x(2);
    x << 2e-3, -1e-3;  // small enough to stay unconstrained
    auto sol = solve_qp(qp, x);
    const double s_qp = mpc_qc_scalar(qp, cfg, ms, x, VectorX<double>(), sol.z);
    CHECK(s_qp >= 0.0);
    CHECK(s_qp == doctest::Approx(sol.z.dot(qp.H * sol.z)).epsilon(1e-9));
}

TEST_CASE("mpc_qc: active rows contribute zero slack")
{
    auto qp = condense(paper_mpc_spec(6));
    VectorX<double> x(2);
    x << 1.0, 0.8;
    auto sol = solve_qp(qp, x);
    VectorX<double> slack = qp.b - qp.L * sol.z;
    REQUIRE(slack.minCoeff() <= 1e-10);  // at least one active row
    for (Index i = 0; i < slack.size(); ++i)
        if (slack[i] <= 1e-10) CHECK(std::abs(slack[i]) <= 1e-10);
}

TEST_CASE("mpc_qc: extension requires a ReLU-like activation")
{
    Rng rng(137);
    std::vector<std::pair<MatrixX<double>, VectorX<double>>> layers = {
        {rng.normal_matrix(3, 2), rng.uniform_vector(3, -1.0, 1.0)}};
    auto tanh_net = from_feedforward<double>(layers, {rng.normal_matrix(1, 3), 0.0},
                                             ActivationKind<double>::tanh());
    auto qp = condense(paper_mpc_spec(3));
    QcConfig cfg = QcConfig::defaults_for(tanh_net.activation);
    cfg.s_in_extension = true;
    auto layout = make_analysis_layout(tanh_net, qp, QcConfig::defaults_for(tanh_net.activation));
    CHECK_THROWS_AS((void)mpc_qc(qp, layout, cfg, &tanh_net), UnsoundTag);
}

TEST_CASE("box_qc: corners annihilate, interior is nonnegative, outside is negative")
{
    Rng rng(139);
    VectorX<double> lo = rng.uniform_vector(3, -2.0, -0.5);
    VectorX<double> hi = rng.uniform_vector(3, 0.5, 2.0);
    InputBox<double> box(lo, hi);

    MultiplierLayout layout;
    layout.add_group(Tag::tau_x, 3, Cone::nonneg);
    auto form = box_qc(box, layout);

    auto ms = MultiplierSet<double>::zero(layout);
    ms.segment(Tag::tau_x).setOnes();
    VectorX<double> corner(4);
    corner << hi, 1.0;
    CHECK(std::abs(quad_value(form.assemble(ms), corner)) <= 1e-12);

    for (int k = 0; k < 1000; ++k) {
        auto msr = random_multipliers(layout, rng);
        VectorX<double> x(3);
        for (Index d = 0; d < 3; ++d) x[d] = rng.uniform(lo[d], hi[d]);
        VectorX<double> v(4);
        v << x, 1.0;
        const double matrix = quad_value(form.assemble(msr), v);
        CHECK(std::abs(matrix - box_qc_scalar(box, msr, x)) <= 1e-10);
        CHECK(matrix >= -1e-12);
    }

    // one coordinate pushed outside, detected by the matching multiplier
    for (Index d = 0; d < 3; ++d) {
        auto msd = MultiplierSet<double>::zero(layout);
        msd.values[layout.at(Tag::tau_x).offset + d] = 1.0;
        VectorX<double> x = 0.5 * (lo + hi);
        x[d] = hi[d] + 0.3;
        CHECK(box_qc_scalar(box, msd, x) < 0.0);
    }
}

TEST_CASE("box_qc: symmetric box closed form")
{
    const double a = 0.7;
    InputBox<double> box(VectorX<double>::Constant(2, -a), VectorX<double>::Constant(2, a));
    MultiplierLayout layout;
    layout.add_group(Tag::tau_x, 2, Cone::nonneg);
    auto ms = MultiplierSet<double>::zero(layout);
    ms.segment(Tag::tau_x).setOnes();

    Rng rng(149);
    for (int k = 0; k < 100; ++k) {
        VectorX<double> x = rng.uniform_vector(2, -a, a);
        const double expect = 2.0 * ((a * a - x[0] * x[0]) + (a * a - x[1] * x[1]));
        CHECK(box_qc_scalar(box, ms, x) == doctest::Approx(expect).epsilon(1e-12));
    }
    VectorX<double> outside = VectorX<double>::Constant(2, a + 1e-3);
    CHECK(box_qc_scalar(box, ms, outside) < 0.0);
}

TEST_CASE("assemble_omega: expansion matches the error scalar and eq-form at D = 0")
{
    Rng rng(151);
    auto net = random_relu_network(rng, 2, 4);
    auto qp = condense(paper_mpc_spec(5));
    QcConfig cfg = QcConfig::defaults_for(net.activation);
    auto layout = make_analysis_layout(net, qp, cfg);
    auto omega = assemble_omega(net, qp.horizon(), layout);

    for (int k = 0; k < 1000; ++k) {
        auto ms = random_multipliers(layout, rng);
        VectorX<double> x = rng.uniform_vector(2, -1.0, 1.0);
        auto nn = evaluate(net, x);
        auto sol = solve_qp(qp, x);
        const double gx = ms.value(Tag::gamma_x);
        const double g = ms.value(Tag::gamma);
        const double expect = (nn.u - sol.u) * (nn.u - sol.u) - gx * x.squaredNorm() - g;
        const double matrix =
            quad_value(omega.assemble(ms), zeta_of(x, nn.z, sol.z));
        CHECK(std::abs(matrix - expect) <= 1e-10);
    }

    // at D_nn = 0 the constant block is exactly the published matrix
    auto net0 = net;
    net0.D_nn = 0.0;
    auto omega0 = assemble_omega(net0, qp.horizon(), layout);
    const Index M = net.width(), N = qp.horizon();
    MatrixX<double> expect = MatrixX<double>::Zero(omega0.dim, omega0.dim);
    RowVectorX<double> c_mpc = RowVectorX<double>::Zero(N);
    c_mpc(0) = 1.0;
    expect.block(2, 2, M, M) = net.C_nn.transpose() * net.C_nn;
    expect.block(2, 2 + M, M, N) = -net.C_nn.transpose() * c_mpc;
    expect.block(2 + M, 2, N, M) = expect.block(2, 2 + M, M, N).transpose();
    expect.block(2 + M, 2 + M, N, N) = c_mpc.transpose() * c_mpc;
    CHECK((omega0.constant - expect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("QuadForm: bases are exactly symmetric and affine in the multipliers")
{
    Rng rng(157);
    auto net = random_relu_network(rng, 2, 4, 2);
    auto qp = condense(paper_mpc_spec(5));
    QcConfig cfg = QcConfig::defaults_for(net.activation);
    cfg.slope_pairwise = false;
    cfg.cross_terms = true;
    cfg.s_in_extension = true;
    auto layout = make_analysis_layout(net, qp, cfg);

    std::vector<QuadForm<double>> forms;
    forms.push_back(lambda_from_hat(net, activation_lambda_hat(net, layout, cfg)));
    forms.push_back(mpc_qc(qp, layout, cfg, &net));
    InputBox<double> box(VectorX<double>::Constant(2, -1.0),
                         VectorX<double>::Constant(2, 1.0));
    forms.push_back(box_qc(box, layout));
    forms.push_back(assemble_omega(net, qp.horizon(), layout));

    for (const auto& f : forms) {
        for (const auto& [id, B] : f.terms)
            CHECK((B - B.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((f.constant - f.constant.transpose()).cwiseAbs().maxCoeff() == 0.0);

        auto ms = random_multipliers(layout, rng);
        const MatrixX<double> F1 = f.assemble(ms);
        MultiplierSet<double> ms2 = ms;
        ms2.values *= 2.0;
        const MatrixX<double> F2 = f.assemble(ms2);
        CHECK(((F2 - f.constant) - 2.0 * (F1 - f.constant)).cwiseAbs().maxCoeff() <=
              1e-12);
    }
}

TEST_CASE("validate_qc_tags: unsound tags are rejected")
{
    auto tanh_act = ActivationKind<double>::tanh();
    QcConfig cfg;
    cfg.tags = {Tag::positive};
    CHECK_THROWS_AS(validate_qc_tags(tanh_act, cfg), UnsoundTag);

    QcConfig cross;
    cross.tags = {Tag::sector};
    cross.cross_terms = true;
    CHECK_THROWS_AS(validate_qc_tags(tanh_act, cross), UnsoundTag);

    auto relu = ActivationKind<double>::relu();
    QcConfig bounded;
    bounded.tags = {Tag::bounded};
    CHECK_THROWS_AS(validate_qc_tags(relu, bounded), UnsoundTag);
}
