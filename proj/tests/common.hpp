#pragma once

#include "polgap/lti.hpp"
#include "polgap/network.hpp"
#include "polgap/rng.hpp"

#include <utility>
#include <vector>

namespace polgap::testing {

// Double integrator-like benchmark system used throughout the suite:
// x[k+1] = [4/3 -2/3; 1 0] x + [0; 1] u, horizon 10, per-step input bound 0.1.
inline LtiSystem<double> paper_system()
{
    Eigen::Matrix2d A;
    A << 4.0 / 3.0, -2.0 / 3.0, 1.0, 0.0;
    Eigen::Vector2d B(0.0, 1.0);
    return LtiSystem<double>(MatrixX<double>(A), MatrixX<double>(B));
}

inline LtiMpcSpec<double> paper_mpc_spec(Index N = 10, double input_bound = 0.1)
{
    auto sys = paper_system();
    const Index nx = 2;
    Eigen::Matrix2d Qt, Pt;
    Qt << 1.0, -2.0 / 3.0, -2.0 / 3.0, 3.0 / 2.0;
    Pt << 7.1667, -4.2222, -4.2222, 4.6852;

    MatrixX<double> Q = MatrixX<double>::Zero(N * nx, N * nx);
    for (Index k = 0; k < N; ++k)
        Q.block(k * nx, k * nx, nx, nx) = (k + 1 == N) ? Pt : Qt;
    MatrixX<double> R = MatrixX<double>::Identity(N, N);

    MatrixX<double> L(2 * N, N);
    L << MatrixX<double>::Identity(N, N), -MatrixX<double>::Identity(N, N);
    VectorX<double> b = VectorX<double>::Constant(2 * N, input_bound);

    return LtiMpcSpec<double>(sys, N, Q, R, L, b);
}

// Random spec with a PSD stacked cost and nonnegative bounds; input scaled so
// powers of A stay moderate.
inline LtiMpcSpec<double> random_mpc_spec(Rng& rng, Index nx, Index N, Index n_in)
{
    MatrixX<double> A = rng.uniform_matrix(nx, nx, -1.0, 1.0);
    A *= 0.9 / std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
    MatrixX<double> B = rng.uniform_matrix(nx, 1, -1.0, 1.0);
    LtiSystem<double> sys(A, B);

    MatrixX<double> G = rng.uniform_matrix(N * nx, N * nx, -1.0, 1.0);
    MatrixX<double> Q = symmetrized(G * G.transpose());
    MatrixX<double> Gr = rng.uniform_matrix(N, N, -1.0, 1.0);
    MatrixX<double> R = symmetrized(Gr * Gr.transpose()) +
                        MatrixX<double>::Identity(N, N);

    MatrixX<double> L = rng.uniform_matrix(n_in, N, -1.0, 1.0);
    VectorX<double> b = rng.uniform_vector(n_in, 0.0, 1.0);
    return LtiMpcSpec<double>(sys, N, Q, R, L, b);
}

// Small random feed-forward ReLU net; weights scaled down so evaluations stay
// in a moderate range.
inline ImplicitNetwork<double> random_relu_network(Rng& rng, Index nx, Index width,
                                                   Index layers = 1, double scale = 0.7)
{
    std::vector<std::pair<MatrixX<double>, VectorX<double>>> ls;
    Index prev = nx;
    for (Index j = 0; j < layers; ++j) {
        ls.push_back({scale * rng.normal_matrix(width, prev) / std::sqrt(double(prev)),
                      scale * rng.uniform_vector(width, -0.5, 0.5)});
        prev = width;
    }
    RowVectorX<double> Wo = scale * rng.normal_matrix(1, width) / std::sqrt(double(width));
    const double d = rng.uniform(-0.3, 0.3);
    return from_feedforward<double>(ls, {Wo, d}, ActivationKind<double>::relu());
}

}  // namespace polgap::testing
