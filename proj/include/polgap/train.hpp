#pragma once

#include "polgap/network.hpp"
#include "polgap/qp.hpp"
#include "polgap/rng.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace polgap {

/// Deterministic mini-batch SGD setup for the one-hidden-layer imitator.
template <typename Scalar>
struct TrainingConfig {
    Index sample_count = 10000;
    int epochs = 300;
    Scalar learning_rate = Scalar(0.5);
    std::uint64_t seed = 1;
    VectorX<Scalar> box_lower;  // sampling box
    VectorX<Scalar> box_upper;
    Index batch_size = 32;

    void validate() const
    {
        if (sample_count <= 0 || epochs <= 0 || learning_rate <= Scalar(0) ||
            batch_size <= 0)
            throw InvariantViolation("TrainingConfig: counts and rates must be positive");
        if (box_lower.size() != box_upper.size() || box_lower.size() == 0)
            throw DimensionMismatch("TrainingConfig: sampling box dimensions mismatch");
        if ((box_upper - box_lower).minCoeff() < Scalar(0))
            throw InvariantViolation("TrainingConfig: sampling box is empty");
    }
};

/// Fits a one-hidden-layer ReLU network to the MPC law by sampling states in
/// the box, labelling them with solve_qp and running mini-batch SGD on the
/// squared error. After the fit the output offset is set to -C_nn z_nn(0) so
/// the network maps the origin to zero exactly.
template <typename Scalar>
ImplicitNetwork<Scalar> train_imitator(const CondensedQp<Scalar>& qp, Index width,
                                       const TrainingConfig<Scalar>& cfg)
{
    cfg.validate();
    if (width <= 0) throw InvariantViolation("train_imitator: width must be positive");
    const Index n_x = qp.state_dim();
    if (cfg.box_lower.size() != n_x)
        throw DimensionMismatch("train_imitator: sampling box does not match the QP state");

    Rng rng(cfg.seed);

    // labelled data
    MatrixX<Scalar> xs(n_x, cfg.sample_count);
    VectorX<Scalar> us(cfg.sample_count);
    for (Index i = 0; i < cfg.sample_count; ++i) {
        for (Index d = 0; d < n_x; ++d)
            xs(d, i) = static_cast<Scalar>(rng.uniform(cfg.box_lower[d], cfg.box_upper[d]));
        us[i] = solve_qp(qp, VectorX<Scalar>(xs.col(i))).u;
    }

    // Targets are standardized to unit RMS during the fit so the step size is
    // insensitive to the input-bound magnitude; weights are scaled back after.
    Scalar rms = std::sqrt(us.squaredNorm() / Scalar(cfg.sample_count));
    if (!(rms > Scalar(0))) rms = Scalar(1);
    us /= rms;

    // Glorot-uniform init, zero biases
    const Scalar a1 = std::sqrt(Scalar(6) / Scalar(n_x + width));
    const Scalar a2 = std::sqrt(Scalar(6) / Scalar(width + 1));
    MatrixX<Scalar> W1 = rng.uniform_matrix<Scalar>(width, n_x, -a1, a1);
    VectorX<Scalar> b1 = VectorX<Scalar>::Zero(width);
    RowVectorX<Scalar> Wo = rng.uniform_matrix<Scalar>(1, width, -a2, a2);
    Scalar d_out = Scalar(0);

    std::vector<Index> order(static_cast<std::size_t>(cfg.sample_count));
    std::iota(order.begin(), order.end(), Index(0));

    // momentum buffers
    const Scalar mom = Scalar(0.9);
    MatrixX<Scalar> vW1 = MatrixX<Scalar>::Zero(width, n_x);
    VectorX<Scalar> vb1 = VectorX<Scalar>::Zero(width);
    RowVectorX<Scalar> vWo = RowVectorX<Scalar>::Zero(width);
    Scalar vd = Scalar(0);

    const int warmup = std::max(1, cfg.epochs / 20);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        Scalar lr = cfg.learning_rate /
                    (Scalar(1) + Scalar(4) * Scalar(epoch) / Scalar(cfg.epochs));
        if (epoch < warmup) lr *= Scalar(epoch + 1) / Scalar(warmup);
        for (Index start = 0; start < cfg.sample_count; start += cfg.batch_size) {
            const Index nb = std::min(cfg.batch_size, cfg.sample_count - start);
            MatrixX<Scalar> gW1 = MatrixX<Scalar>::Zero(width, n_x);
            VectorX<Scalar> gb1 = VectorX<Scalar>::Zero(width);
            RowVectorX<Scalar> gWo = RowVectorX<Scalar>::Zero(width);
            Scalar gd = Scalar(0);
            for (Index k = 0; k < nb; ++k) {
                const Index i = order[static_cast<std::size_t>(start + k)];
                const VectorX<Scalar> x = xs.col(i);
                const VectorX<Scalar> y = W1 * x + b1;
                const VectorX<Scalar> z = y.cwiseMax(Scalar(0));
                const Scalar pred = Wo.dot(z) + d_out;
                const Scalar err = Scalar(2) * (pred - us[i]) / Scalar(nb);
                gWo += err * z.transpose();
                gd += err;
                VectorX<Scalar> dz = err * Wo.transpose();
                for (Index j = 0; j < width; ++j)
                    if (y[j] <= Scalar(0)) dz[j] = Scalar(0);
                gW1 += dz * x.transpose();
                gb1 += dz;
            }
            vW1 = mom * vW1 - lr * gW1;
            vb1 = mom * vb1 - lr * gb1;
            vWo = mom * vWo - lr * gWo;
            vd = mom * vd - lr * gd;
            W1 += vW1;
            b1 += vb1;
            Wo += vWo;
            d_out += vd;
        }
    }

    if (!W1.allFinite() || !Wo.allFinite() || !b1.allFinite() || !std::isfinite(d_out))
        throw NonConvergence("train_imitator: weights diverged (reduce the learning rate)");

    Wo *= rms;
    d_out *= rms;
    ImplicitNetwork<Scalar> net = from_feedforward<Scalar>(
        {{W1, b1}}, {Wo, d_out}, ActivationKind<Scalar>::relu());

    // pin the origin: u(0) = C_nn z(0) + D_nn = 0 exactly
    const VectorX<Scalar> z0 = evaluate(net, VectorX<Scalar>::Zero(n_x)).z;
    net.D_nn = -net.C_nn.dot(z0);
    return net;
}

}  // namespace polgap
