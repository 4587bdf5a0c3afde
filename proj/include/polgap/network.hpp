#pragma once

#include "polgap/activation.hpp"
#include "polgap/fwd.hpp"

#include <numeric>
#include <utility>
#include <vector>

namespace polgap {

/// Neural network in implicit (equilibrium) form:
///   z = phi(W z + W0 x + beta),  u = C_nn z + D_nn.
/// A feed-forward network corresponds to a strictly block lower-triangular W,
/// in which case the fixed point is computed exactly by one block sweep.
/// General W requires the contraction condition ||W||_inf < 1.
template <typename Scalar>
struct ImplicitNetwork {
    MatrixX<Scalar> W;        // M x M
    MatrixX<Scalar> W0;       // M x n_x
    VectorX<Scalar> beta;     // M
    RowVectorX<Scalar> C_nn;  // 1 x M
    Scalar D_nn = Scalar(0);
    ActivationKind<Scalar> activation;
    std::vector<Index> layer_dims;  // per-layer widths, summing to M
    bool feedforward = true;

    Index width() const { return W.rows(); }
    Index state_dim() const { return W0.cols(); }
    Index layer_count() const { return static_cast<Index>(layer_dims.size()); }

    void validate() const
    {
        const Index M = W.rows();
        if (W.cols() != M) throw DimensionMismatch("ImplicitNetwork: W must be square");
        if (W0.rows() != M) throw DimensionMismatch("ImplicitNetwork: W0 must have M rows");
        if (beta.size() != M) throw DimensionMismatch("ImplicitNetwork: beta must have length M");
        if (C_nn.cols() != M) throw DimensionMismatch("ImplicitNetwork: C_nn must have M columns");
        if (layer_dims.empty())
            throw InvariantViolation("ImplicitNetwork: layer_dims must be nonempty");
        Index total = 0;
        for (Index d : layer_dims) {
            if (d <= 0) throw InvariantViolation("ImplicitNetwork: layer_dims must be positive");
            total += d;
        }
        if (total != M)
            throw InvariantViolation("ImplicitNetwork: layer_dims must sum to the width of W");
        activation.validate();

        if (feedforward) {
            // strictly block lower-triangular W: layer j only reads layer j-1 and
            // below, and C_nn reads the last layer only
            Index row0 = 0;
            for (std::size_t j = 0; j < layer_dims.size(); ++j) {
                const Index rows = layer_dims[j];
                const Index allowed = row0;  // columns strictly before this layer
                if (W.block(row0, allowed, rows, W.cols() - allowed)
                        .cwiseAbs()
                        .maxCoeff() != Scalar(0))
                    throw InvariantViolation(
                        "ImplicitNetwork: W must be strictly block lower-triangular "
                        "for a feedforward network");
                row0 += rows;
            }
            const Index last = layer_dims.back();
            if (width() > last &&
                C_nn.head(width() - last).cwiseAbs().maxCoeff() != Scalar(0))
                throw InvariantViolation(
                    "ImplicitNetwork: C_nn must be supported on the last layer");
        } else {
            if (W.cwiseAbs().rowwise().sum().maxCoeff() >= Scalar(1))
                throw InvariantViolation(
                    "ImplicitNetwork: well-posedness requires ||W||_inf < 1 for "
                    "non-feedforward networks");
        }
    }
};

template <typename Scalar>
struct NetworkEval {
    VectorX<Scalar> z;  // fixed point
    VectorX<Scalar> y;  // preactivation W z + W0 x + beta
    Scalar u;           // C_nn z + D_nn
    int iterations = 0;
    Scalar residual = Scalar(0);  // ||z - phi(y)||_inf
};

/// Builds the implicit form of a feed-forward network: layer j's weight goes
/// into block (j, j-1) of W, the first layer's weight into W0, biases into
/// beta and the output weight into the last block of C_nn.
template <typename Scalar>
ImplicitNetwork<Scalar> from_feedforward(
    const std::vector<std::pair<MatrixX<Scalar>, VectorX<Scalar>>>& layers,
    const std::pair<RowVectorX<Scalar>, Scalar>& output,
    const ActivationKind<Scalar>& activation)
{
    if (layers.empty()) throw DimensionMismatch("from_feedforward: no layers");
    const Index n_x = layers.front().first.cols();

    std::vector<Index> dims;
    Index M = 0;
    Index prev = n_x;
    for (const auto& [Wj, bj] : layers) {
        if (Wj.cols() != prev)
            throw DimensionMismatch("from_feedforward: layer dimensions do not chain");
        if (bj.size() != Wj.rows())
            throw DimensionMismatch("from_feedforward: bias length mismatch");
        dims.push_back(Wj.rows());
        M += Wj.rows();
        prev = Wj.rows();
    }
    if (output.first.cols() != dims.back())
        throw DimensionMismatch("from_feedforward: output weight must match last layer");

    ImplicitNetwork<Scalar> net;
    net.W = MatrixX<Scalar>::Zero(M, M);
    net.W0 = MatrixX<Scalar>::Zero(M, n_x);
    net.beta = VectorX<Scalar>(M);
    net.C_nn = RowVectorX<Scalar>::Zero(M);
    net.D_nn = output.second;
    net.activation = activation;
    net.layer_dims = dims;
    net.feedforward = true;

    Index row0 = 0;
    Index prev_row0 = 0;
    for (std::size_t j = 0; j < layers.size(); ++j) {
        const auto& [Wj, bj] = layers[j];
        if (j == 0)
            net.W0.topRows(Wj.rows()) = Wj;
        else
            net.W.block(row0, prev_row0, Wj.rows(), Wj.cols()) = Wj;
        net.beta.segment(row0, bj.size()) = bj;
        prev_row0 = row0;
        row0 += Wj.rows();
    }
    net.C_nn.tail(dims.back()) = output.first;
    net.validate();
    return net;
}

/// Fixed-point evaluation. Exact block sweep in the feed-forward case; Picard
/// iteration under ||W||_inf < 1 otherwise.
template <typename Scalar, typename Derived>
NetworkEval<Scalar> evaluate(const ImplicitNetwork<Scalar>& net,
                             const Eigen::MatrixBase<Derived>& x_expr,
                             Scalar tol = Scalar(1e-12), int max_iterations = 10000)
{
    const VectorX<Scalar> x = x_expr;
    if (x.size() != net.state_dim())
        throw DimensionMismatch("evaluate: bad state dimension");

    NetworkEval<Scalar> out;
    const Index M = net.width();
    VectorX<Scalar> z = VectorX<Scalar>::Zero(M);

    if (net.feedforward) {
        Index row0 = 0;
        for (Index d : net.layer_dims) {
            VectorX<Scalar> yj = net.W0.middleRows(row0, d) * x +
                                 net.beta.segment(row0, d);
            if (row0 > 0) yj += net.W.block(row0, 0, d, row0) * z.head(row0);
            z.segment(row0, d) = net.activation.apply(yj);
            row0 += d;
        }
        out.iterations = 1;
    } else {
        VectorX<Scalar> z_next(M);
        int it = 0;
        for (; it < max_iterations; ++it) {
            z_next = net.activation.apply(net.W * z + net.W0 * x + net.beta);
            const Scalar diff = (z_next - z).template lpNorm<Eigen::Infinity>();
            z = z_next;
            if (diff <= tol) break;
        }
        out.iterations = it + 1;
        if (it == max_iterations)
            throw NonConvergence("evaluate: fixed-point iteration did not converge");
    }

    out.y = net.W * z + net.W0 * x + net.beta;
    out.z = z;
    out.residual = (z - net.activation.apply(out.y)).template lpNorm<Eigen::Infinity>();
    if (!net.feedforward && out.residual > Scalar(1e-10))
        throw NonConvergence("evaluate: fixed-point residual above tolerance");
    out.u = net.C_nn.dot(z) + net.D_nn;
    return out;
}

}  // namespace polgap
