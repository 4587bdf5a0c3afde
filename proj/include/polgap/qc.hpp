#pragma once

#include "polgap/network.hpp"
#include "polgap/qp.hpp"
#include "polgap/quad_form.hpp"

#include <set>
#include <utility>
#include <vector>

namespace polgap {

/// Hyper-rectangle of admissible states.
template <typename Scalar>
struct InputBox {
    VectorX<Scalar> lower;
    VectorX<Scalar> upper;

    InputBox(VectorX<Scalar> lo, VectorX<Scalar> hi)
        : lower(std::move(lo)), upper(std::move(hi))
    {
        if (lower.size() != upper.size())
            throw DimensionMismatch("InputBox: bound dimensions differ");
        if (lower.size() == 0) throw DimensionMismatch("InputBox: empty box");
        if ((upper - lower).minCoeff() < Scalar(0))
            throw InvariantViolation("InputBox: lower bound exceeds upper bound");
    }

    Index dim() const { return lower.size(); }

    bool contains(const VectorX<Scalar>& x, Scalar tol = Scalar(0)) const
    {
        return (x - lower).minCoeff() >= -tol && (upper - x).minCoeff() >= -tol;
    }

    /// Concentric shrink: same midpoint, half-widths scaled by factor <= 1.
    InputBox shrunk(Scalar factor) const
    {
        VectorX<Scalar> mid = Scalar(0.5) * (lower + upper);
        VectorX<Scalar> half = Scalar(0.5) * factor * (upper - lower);
        return InputBox(mid - half, mid + half);
    }
};

/// Selection of quadratic constraints used by a run. The activation tags must
/// be sound for the network's activation; pairwise slope, cross terms and the
/// constraint-vector extension are optional refinements that are off by
/// default.
struct QcConfig {
    std::set<Tag> tags;
    bool slope_pairwise = false;
    bool cross_terms = false;
    bool s_in_extension = false;

    template <typename Scalar>
    static QcConfig defaults_for(const ActivationKind<Scalar>& act)
    {
        QcConfig cfg;
        switch (act.kind) {
            case ActivationKind<Scalar>::Kind::relu:
                cfg.tags = {Tag::sector, Tag::positive, Tag::complement_positive,
                            Tag::complementarity};
                break;
            case ActivationKind<Scalar>::Kind::tanh_fn:
                cfg.tags = {Tag::sector, Tag::bounded};
                break;
            case ActivationKind<Scalar>::Kind::custom:
                if (act.sector_delta) cfg.tags.insert(Tag::sector);
                if (act.slope) cfg.tags.insert(Tag::slope);
                if (act.bound) cfg.tags.insert(Tag::bounded);
                if (act.positive) cfg.tags.insert(Tag::positive);
                if (act.complement_positive) cfg.tags.insert(Tag::complement_positive);
                if (act.complementarity) cfg.tags.insert(Tag::complementarity);
                break;
        }
        return cfg;
    }
};

template <typename Scalar>
void validate_qc_tags(const ActivationKind<Scalar>& act, const QcConfig& cfg)
{
    auto fail = [&](Tag t) {
        throw UnsoundTag(std::string("activation '") + act.name +
                         "' does not support QC tag '" + tag_name(t) + "'");
    };
    for (Tag t : cfg.tags) {
        switch (t) {
            case Tag::sector:
                if (!act.sector_delta) fail(t);
                break;
            case Tag::slope:
                if (!act.slope) fail(t);
                break;
            case Tag::bounded:
                if (!act.bound) fail(t);
                break;
            case Tag::positive:
                if (!act.positive) fail(t);
                break;
            case Tag::complement_positive:
                if (!act.complement_positive) fail(t);
                break;
            case Tag::complementarity:
                if (!act.complementarity) fail(t);
                break;
            default:
                throw InvariantViolation(
                    std::string("QcConfig.tags may only contain activation tags, got ") +
                    tag_name(t));
        }
    }
    if (cfg.slope_pairwise && !act.slope) fail(Tag::slope_pair);
    if (cfg.cross_terms && !(act.positive && act.complement_positive))
        fail(Tag::cross);
}

// packed pair indices
inline Index unordered_pair_count(Index m) { return m * (m - 1) / 2; }
inline Index ordered_pair_count(Index m) { return m * (m - 1); }

inline Index unordered_pair_index(Index i, Index j, Index m)
{
    // i < j
    return i * m - i * (i + 1) / 2 + (j - i - 1);
}

inline Index ordered_pair_index(Index i, Index j, Index m)
{
    // i != j
    return i * (m - 1) + (j > i ? j - 1 : j);
}

/// Variable space of the analysis SDP (Theorem 1): multipliers for every
/// enabled QC plus the bound variables gamma_x, gamma.
template <typename Scalar>
MultiplierLayout make_analysis_layout(const ImplicitNetwork<Scalar>& net,
                                      const CondensedQp<Scalar>& qp,
                                      const QcConfig& cfg)
{
    validate_qc_tags(net.activation, cfg);
    const Index M = net.width();
    const Index n_in = qp.constraint_count();
    const Index n_x = net.state_dim();

    MultiplierLayout l;
    for (Tag t : {Tag::sector, Tag::slope, Tag::bounded, Tag::positive,
                  Tag::complement_positive})
        if (cfg.tags.count(t)) l.add_group(t, M, Cone::nonneg);
    if (cfg.tags.count(Tag::complementarity))
        l.add_group(Tag::complementarity, M, Cone::free_var);
    if (cfg.slope_pairwise && M > 1)
        l.add_group(Tag::slope_pair, unordered_pair_count(M), Cone::nonneg);
    if (cfg.cross_terms && M > 1) {
        l.add_group(Tag::cross, ordered_pair_count(M), Cone::nonneg);
        l.add_group(Tag::otimes, unordered_pair_count(M), Cone::nonneg);
    }
    l.add_group(Tag::tau_qp, 1, Cone::nonneg);
    if (n_in > 0) l.add_group(Tag::tau_in, n_in, Cone::nonneg);
    if (cfg.s_in_extension && n_in > 0) {
        l.add_group(Tag::tau_in_plus, n_in * M, Cone::nonneg);
        l.add_group(Tag::tau_in_cplus, n_in * M, Cone::nonneg);
    }
    l.add_group(Tag::tau_x, n_x, Cone::nonneg);
    l.add_group(Tag::gamma_x, 1, Cone::nonneg);
    l.add_group(Tag::gamma, 1, Cone::nonneg);
    return l;
}

/// Variable space of the synthesis SDP (Theorem 2): the QP itself becomes the
/// decision variable; tau_qp and tau_in are fixed to one and drop out.
template <typename Scalar>
MultiplierLayout make_synthesis_layout(const ImplicitNetwork<Scalar>& net, Index N,
                                       const QcConfig& cfg, double hessian_shift)
{
    validate_qc_tags(net.activation, cfg);
    if (cfg.s_in_extension)
        throw InvariantViolation(
            "synthesis fixes the constraint multipliers; s_in_extension does not apply");
    const Index M = net.width();
    const Index n_x = net.state_dim();

    MultiplierLayout l;
    for (Tag t : {Tag::sector, Tag::slope, Tag::bounded, Tag::positive,
                  Tag::complement_positive})
        if (cfg.tags.count(t)) l.add_group(t, M, Cone::nonneg);
    if (cfg.tags.count(Tag::complementarity))
        l.add_group(Tag::complementarity, M, Cone::free_var);
    if (cfg.slope_pairwise && M > 1)
        l.add_group(Tag::slope_pair, unordered_pair_count(M), Cone::nonneg);
    if (cfg.cross_terms && M > 1) {
        l.add_group(Tag::cross, ordered_pair_count(M), Cone::nonneg);
        l.add_group(Tag::otimes, unordered_pair_count(M), Cone::nonneg);
    }
    l.add_group(Tag::qp_hessian, N * (N + 1) / 2, Cone::psd, N, hessian_shift);
    l.add_group(Tag::qp_linear, N * n_x, Cone::free_var);
    l.add_group(Tag::qp_row_sum, N, Cone::free_var);
    l.add_group(Tag::qp_bound_sum, 1, Cone::nonneg);
    l.add_group(Tag::tau_x, n_x, Cone::nonneg);
    l.add_group(Tag::gamma_x, 1, Cone::nonneg);
    l.add_group(Tag::gamma, 1, Cone::nonneg);
    return l;
}

namespace detail {

// adds v at (i,j) and (j,i); exact symmetry by construction
template <typename Scalar>
void sym_add(MatrixX<Scalar>& m, Index i, Index j, Scalar v)
{
    m(i, j) += v;
    if (i != j) m(j, i) += v;
}

}  // namespace detail

/// Aggregated activation quadratic constraint over mu_hat = [y; z; 1] where
/// y is the preactivation and z = phi(y). Every enabled property contributes
/// an affine-in-multiplier block so that mu_hat' * lambda_hat * mu_hat equals
/// the sum of the individual QC scalars.
template <typename Scalar>
QuadForm<Scalar> activation_lambda_hat(const ImplicitNetwork<Scalar>& net,
                                       const MultiplierLayout& layout,
                                       const QcConfig& cfg)
{
    validate_qc_tags(net.activation, cfg);
    const Index M = net.width();
    const Index d = 2 * M + 1;
    const Index zc = M;       // z offset
    const Index cc = 2 * M;   // constant coordinate
    const auto& act = net.activation;

    QuadForm<Scalar> qf(d);
    auto basis = [&](Index id) -> MatrixX<Scalar>& {
        qf.terms.push_back({id, MatrixX<Scalar>::Zero(d, d)});
        return qf.terms.back().second;
    };

    if (cfg.tags.count(Tag::sector)) {
        const Scalar delta = *act.sector_delta;
        const Index off = layout.at(Tag::sector).offset;
        for (Index i = 0; i < M; ++i) {
            auto& B = basis(off + i);  // (delta*y_i - z_i) z_i
            detail::sym_add(B, i, zc + i, delta / Scalar(2));
            B(zc + i, zc + i) -= Scalar(1);
        }
    }
    if (cfg.tags.count(Tag::slope)) {
        // slope QC anchored at the origin (phi(0) = 0):
        // (hi*y_i - z_i) t (z_i - lo*y_i)
        const auto [lo, hi] = *act.slope;
        const Index off = layout.at(Tag::slope).offset;
        for (Index i = 0; i < M; ++i) {
            auto& B = basis(off + i);
            B(i, i) -= hi * lo;
            detail::sym_add(B, i, zc + i, (hi + lo) / Scalar(2));
            B(zc + i, zc + i) -= Scalar(1);
        }
    }
    if (cfg.slope_pairwise && M > 1) {
        // pairwise slope across neurons sharing the activation:
        // (hi*(y_i-y_j) - (z_i-z_j)) t ((z_i-z_j) - lo*(y_i-y_j))
        const auto [lo, hi] = *act.slope;
        const Index off = layout.at(Tag::slope_pair).offset;
        for (Index i = 0; i < M; ++i)
            for (Index j = i + 1; j < M; ++j) {
                auto& B = basis(off + unordered_pair_index(i, j, M));
                const Scalar cyy = -hi * lo;
                B(i, i) += cyy;
                B(j, j) += cyy;
                detail::sym_add(B, i, j, -cyy);
                const Scalar cyz = (hi + lo) / Scalar(2);
                detail::sym_add(B, i, zc + i, cyz);
                detail::sym_add(B, j, zc + j, cyz);
                detail::sym_add(B, i, zc + j, -cyz);
                detail::sym_add(B, j, zc + i, -cyz);
                B(zc + i, zc + i) -= Scalar(1);
                B(zc + j, zc + j) -= Scalar(1);
                detail::sym_add(B, zc + i, zc + j, Scalar(1));
            }
    }
    if (cfg.tags.count(Tag::bounded)) {
        const auto [lo, hi] = *act.bound;
        const Index off = layout.at(Tag::bounded).offset;
        for (Index i = 0; i < M; ++i) {
            auto& B = basis(off + i);  // (hi - z_i) t (z_i - lo)
            B(zc + i, zc + i) -= Scalar(1);
            detail::sym_add(B, zc + i, cc, (hi + lo) / Scalar(2));
            B(cc, cc) -= hi * lo;
        }
    }
    if (cfg.tags.count(Tag::positive)) {
        const Index off = layout.at(Tag::positive).offset;
        for (Index i = 0; i < M; ++i) {
            auto& B = basis(off + i);  // t z_i
            detail::sym_add(B, zc + i, cc, Scalar(0.5));
        }
    }
    if (cfg.tags.count(Tag::complement_positive)) {
        const Index off = layout.at(Tag::complement_positive).offset;
        for (Index i = 0; i < M; ++i) {
            auto& B = basis(off + i);  // t (z_i - y_i)
            detail::sym_add(B, zc + i, cc, Scalar(0.5));
            detail::sym_add(B, i, cc, Scalar(-0.5));
        }
    }
    if (cfg.tags.count(Tag::complementarity)) {
        const Index off = layout.at(Tag::complementarity).offset;
        for (Index i = 0; i < M; ++i) {
            auto& B = basis(off + i);  // t (y_i - z_i) z_i, an equality so t is free
            detail::sym_add(B, i, zc + i, Scalar(0.5));
            B(zc + i, zc + i) -= Scalar(1);
        }
    }
    if (cfg.cross_terms && M > 1) {
        const Index off_x = layout.at(Tag::cross).offset;
        const Index off_o = layout.at(Tag::otimes).offset;
        for (Index i = 0; i < M; ++i)
            for (Index j = 0; j < M; ++j) {
                if (i == j) continue;
                auto& B = basis(off_x + ordered_pair_index(i, j, M));
                // t z_i (z_j - y_j)
                detail::sym_add(B, zc + i, zc + j, Scalar(0.5));
                detail::sym_add(B, zc + i, j, Scalar(-0.5));
            }
        for (Index i = 0; i < M; ++i)
            for (Index j = i + 1; j < M; ++j) {
                auto& B = basis(off_o + unordered_pair_index(i, j, M));
                detail::sym_add(B, zc + i, zc + j, Scalar(0.5));  // t z_i z_j
            }
    }
    return qf;
}

/// Congruence onto mu = [x; z; 1]: with y = W z + W0 x + beta the map
/// E mu = mu_hat gives lambda = E^T lambda_hat E, preserving the scalar
/// identically.
template <typename Scalar>
QuadForm<Scalar> lambda_from_hat(const ImplicitNetwork<Scalar>& net,
                                 const QuadForm<Scalar>& lam_hat)
{
    const Index M = net.width();
    const Index n_x = net.state_dim();
    if (lam_hat.dim != 2 * M + 1)
        throw DimensionMismatch("lambda_from_hat: lambda_hat has the wrong dimension");

    MatrixX<Scalar> E = MatrixX<Scalar>::Zero(2 * M + 1, n_x + M + 1);
    E.block(0, 0, M, n_x) = net.W0;
    E.block(0, n_x, M, M) = net.W;
    E.block(0, n_x + M, M, 1) = net.beta;
    E.block(M, n_x, M, M) = MatrixX<Scalar>::Identity(M, M);
    E(2 * M, n_x + M) = Scalar(1);

    QuadForm<Scalar> out(n_x + M + 1);
    out.constant = symmetrized(E.transpose() * lam_hat.constant * E);
    out.terms.reserve(lam_hat.terms.size());
    for (const auto& [id, basis] : lam_hat.terms)
        out.terms.push_back({id, symmetrized(E.transpose() * basis * E)});
    return out;
}

namespace detail {

template <typename Scalar>
struct ZetaDims {
    Index n_x, M, N;
    Index x(Index i) const { return i; }
    Index z(Index i) const { return n_x + i; }
    Index zm(Index i) const { return n_x + M + i; }
    Index c() const { return n_x + M + N; }
    Index dim() const { return n_x + M + N + 1; }
};

}  // namespace detail

/// MPC quadratic constraint over zeta = [x; z_nn; z_mpc; 1]. The base form
/// weights QP optimality with tau_qp and the constraint slack with tau_in.
/// The optional extension enriches the slack weight vector q with terms in
/// z_nn and x that are valid when the activation and its complement are
/// positive.
template <typename Scalar>
QuadForm<Scalar> mpc_qc(const CondensedQp<Scalar>& qp, const MultiplierLayout& layout,
                        const QcConfig& cfg, const ImplicitNetwork<Scalar>* net = nullptr)
{
    const Index n_in = qp.constraint_count();
    Index M = 0;
    if (net) M = net->width();
    if (cfg.s_in_extension) {
        if (!net)
            throw UnsoundTag("mpc_qc: the s_in extension requires the network");
        if (!(net->activation.positive && net->activation.complement_positive))
            throw UnsoundTag(
                "mpc_qc: the s_in extension requires a positive activation with a "
                "positive complement");
        if (net->state_dim() != qp.state_dim())
            throw DimensionMismatch("mpc_qc: network and QP state dimensions differ");
    }

    detail::ZetaDims<Scalar> zd{qp.state_dim(), M, qp.horizon()};
    QuadForm<Scalar> qf(zd.dim());

    // s_QP = -tau_qp (z_mpc^T H z_mpc + z_mpc^T h x)
    {
        const Index id = layout.at(Tag::tau_qp).offset;
        MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
        for (Index j = 0; j < zd.N; ++j) {
            for (Index k = 0; k < zd.N; ++k) B(zd.zm(j), zd.zm(k)) -= qp.H(j, k);
            for (Index dxi = 0; dxi < zd.n_x; ++dxi)
                detail::sym_add(B, zd.x(dxi), zd.zm(j), -qp.h(j, dxi) / Scalar(2));
        }
        qf.terms.push_back({id, std::move(B)});
    }

    if (n_in > 0) {
        // base slack weights q = tau_in: s_in = 2 tau_in^T (b - L z_mpc)
        const Index off = layout.at(Tag::tau_in).offset;
        for (Index i = 0; i < n_in; ++i) {
            MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
            for (Index j = 0; j < zd.N; ++j)
                detail::sym_add(B, zd.zm(j), zd.c(), -qp.L(i, j));
            B(zd.c(), zd.c()) += Scalar(2) * qp.b(i);
            qf.terms.push_back({off + i, std::move(B)});
        }
    }

    if (cfg.s_in_extension && n_in > 0) {
        // q_i += tau_plus(i,k) z_k: adds 2 z_k (b_i - L_i z_mpc)
        const Index off_p = layout.at(Tag::tau_in_plus).offset;
        for (Index i = 0; i < n_in; ++i)
            for (Index k = 0; k < M; ++k) {
                MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
                detail::sym_add(B, zd.z(k), zd.c(), qp.b(i));
                for (Index j = 0; j < zd.N; ++j)
                    detail::sym_add(B, zd.z(k), zd.zm(j), -qp.L(i, j));
                qf.terms.push_back({off_p + i * M + k, std::move(B)});
            }
        // q_i += tau_cplus(i,k) [(I-W) z - W0 x - beta]_k, the k-th complement
        // z_k - y_k, which is nonnegative for the admitted activations
        const Index off_c = layout.at(Tag::tau_in_cplus).offset;
        for (Index i = 0; i < n_in; ++i)
            for (Index k = 0; k < M; ++k) {
                MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
                auto add_affine = [&](Index row, Scalar coeff) {
                    // contribution 2 * coeff * row_var * (b_i - L_i z_mpc)
                    detail::sym_add(B, row, zd.c(), coeff * qp.b(i));
                    for (Index j = 0; j < zd.N; ++j)
                        detail::sym_add(B, row, zd.zm(j), -coeff * qp.L(i, j));
                };
                for (Index l = 0; l < M; ++l) {
                    const Scalar p = (l == k ? Scalar(1) : Scalar(0)) - net->W(k, l);
                    if (p != Scalar(0)) add_affine(zd.z(l), p);
                }
                for (Index dxi = 0; dxi < zd.n_x; ++dxi) {
                    const Scalar p = -net->W0(k, dxi);
                    if (p != Scalar(0)) add_affine(zd.x(dxi), p);
                }
                // constant part -beta_k of the complement
                const Scalar c0 = -net->beta(k);
                B(zd.c(), zd.c()) += Scalar(2) * c0 * qp.b(i);
                for (Index j = 0; j < zd.N; ++j)
                    detail::sym_add(B, zd.zm(j), zd.c(), -c0 * qp.L(i, j));
                qf.terms.push_back({off_c + i * M + k, std::move(B)});
            }
    }
    return qf;
}

/// Synthesis counterpart of the MPC constraint: tau_qp = 1, tau_in = ones and
/// (H, h, L^T 1, 1^T b) become decision variables.
template <typename Scalar>
QuadForm<Scalar> mpc_qc_synthesis(Index N, Index n_x, Index M,
                                  const MultiplierLayout& layout)
{
    detail::ZetaDims<Scalar> zd{n_x, M, N};
    QuadForm<Scalar> qf(zd.dim());

    {
        const auto& g = layout.at(Tag::qp_hessian);
        Index k = g.offset;
        for (Index j = 0; j < N; ++j)
            for (Index i = 0; i <= j; ++i) {
                MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
                detail::sym_add(B, zd.zm(i), zd.zm(j), Scalar(-1));
                qf.terms.push_back({k++, std::move(B)});
            }
    }
    {
        const Index off = layout.at(Tag::qp_linear).offset;  // h(j, d), row-major
        for (Index j = 0; j < N; ++j)
            for (Index d = 0; d < n_x; ++d) {
                MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
                detail::sym_add(B, zd.x(d), zd.zm(j), Scalar(-0.5));
                qf.terms.push_back({off + j * n_x + d, std::move(B)});
            }
    }
    {
        const Index off = layout.at(Tag::qp_row_sum).offset;  // (L^T 1)_j
        for (Index j = 0; j < N; ++j) {
            MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
            detail::sym_add(B, zd.zm(j), zd.c(), Scalar(-1));
            qf.terms.push_back({off + j, std::move(B)});
        }
    }
    {
        const Index id = layout.at(Tag::qp_bound_sum).offset;  // 1^T b
        MatrixX<Scalar> B = MatrixX<Scalar>::Zero(zd.dim(), zd.dim());
        B(zd.c(), zd.c()) = Scalar(2);
        qf.terms.push_back({id, std::move(B)});
    }
    return qf;
}

/// Input-box quadratic constraint over [x; 1]:
/// s_X = sum_d 2 tau_d (upper_d - x_d)(x_d - lower_d) >= 0 on the box.
template <typename Scalar>
QuadForm<Scalar> box_qc(const InputBox<Scalar>& box, const MultiplierLayout& layout)
{
    const Index n_x = box.dim();
    QuadForm<Scalar> qf(n_x + 1);
    const Index off = layout.at(Tag::tau_x).offset;
    for (Index d = 0; d < n_x; ++d) {
        MatrixX<Scalar> B = MatrixX<Scalar>::Zero(n_x + 1, n_x + 1);
        B(d, d) = Scalar(-2);
        detail::sym_add(B, d, n_x, box.upper(d) + box.lower(d));
        B(n_x, n_x) = Scalar(-2) * box.upper(d) * box.lower(d);
        qf.terms.push_back({off + d, std::move(B)});
    }
    return qf;
}

// ---------------------------------------------------------------------------
// Direct scalar evaluators. These recompute every enabled QC scalar from its
// defining formula; tests pin the matrix forms above against them.
// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar activation_qc_scalar(const ImplicitNetwork<Scalar>& net, const QcConfig& cfg,
                            const MultiplierSet<Scalar>& ms, const VectorX<Scalar>& y,
                            const VectorX<Scalar>& z)
{
    const Index M = net.width();
    const auto& act = net.activation;
    Scalar s = Scalar(0);

    if (cfg.tags.count(Tag::sector)) {
        const Scalar delta = *act.sector_delta;
        auto t = ms.segment(Tag::sector);
        for (Index i = 0; i < M; ++i) s += (delta * y[i] - z[i]) * t[i] * z[i];
    }
    if (cfg.tags.count(Tag::slope)) {
        const auto [lo, hi] = *act.slope;
        auto t = ms.segment(Tag::slope);
        for (Index i = 0; i < M; ++i)
            s += (hi * y[i] - z[i]) * t[i] * (z[i] - lo * y[i]);
    }
    if (cfg.slope_pairwise && M > 1) {
        const auto [lo, hi] = *act.slope;
        auto t = ms.segment(Tag::slope_pair);
        for (Index i = 0; i < M; ++i)
            for (Index j = i + 1; j < M; ++j) {
                const Scalar a = y[i] - y[j];
                const Scalar c = z[i] - z[j];
                s += (hi * a - c) * t[unordered_pair_index(i, j, M)] * (c - lo * a);
            }
    }
    if (cfg.tags.count(Tag::bounded)) {
        const auto [lo, hi] = *act.bound;
        auto t = ms.segment(Tag::bounded);
        for (Index i = 0; i < M; ++i) s += (hi - z[i]) * t[i] * (z[i] - lo);
    }
    if (cfg.tags.count(Tag::positive)) {
        auto t = ms.segment(Tag::positive);
        for (Index i = 0; i < M; ++i) s += t[i] * z[i];
    }
    if (cfg.tags.count(Tag::complement_positive)) {
        auto t = ms.segment(Tag::complement_positive);
        for (Index i = 0; i < M; ++i) s += t[i] * (z[i] - y[i]);
    }
    if (cfg.tags.count(Tag::complementarity)) {
        auto t = ms.segment(Tag::complementarity);
        for (Index i = 0; i < M; ++i) s += (y[i] - z[i]) * t[i] * z[i];
    }
    if (cfg.cross_terms && M > 1) {
        auto tx = ms.segment(Tag::cross);
        auto to = ms.segment(Tag::otimes);
        for (Index i = 0; i < M; ++i)
            for (Index j = 0; j < M; ++j) {
                if (i == j) continue;
                s += z[i] * tx[ordered_pair_index(i, j, M)] * (z[j] - y[j]);
            }
        for (Index i = 0; i < M; ++i)
            for (Index j = i + 1; j < M; ++j)
                s += z[i] * to[unordered_pair_index(i, j, M)] * z[j];
    }
    return s;
}

/// s_QP + s_in evaluated directly from the definitions.
template <typename Scalar>
Scalar mpc_qc_scalar(const CondensedQp<Scalar>& qp, const QcConfig& cfg,
                     const MultiplierSet<Scalar>& ms, const VectorX<Scalar>& x,
                     const VectorX<Scalar>& z_nn, const VectorX<Scalar>& z_mpc,
                     const ImplicitNetwork<Scalar>* net = nullptr)
{
    Scalar s = -ms.value(Tag::tau_qp) *
               (z_mpc.dot(qp.H * z_mpc) + z_mpc.dot(qp.h * x));
    if (qp.constraint_count() > 0) {
        VectorX<Scalar> q = ms.segment(Tag::tau_in);
        if (cfg.s_in_extension) {
            if (!net)
                throw UnsoundTag("mpc_qc_scalar: the s_in extension requires the network");
            const Index M = net->width();
            const Index n_in = qp.constraint_count();
            Eigen::Map<const MatrixX<Scalar>> Tp(
                ms.segment(Tag::tau_in_plus).data(), M, n_in);
            Eigen::Map<const MatrixX<Scalar>> Tc(
                ms.segment(Tag::tau_in_cplus).data(), M, n_in);
            const VectorX<Scalar> complement =
                z_nn - (net->W * z_nn + net->W0 * x + net->beta);
            q += Tp.transpose() * z_nn + Tc.transpose() * complement;
        }
        const VectorX<Scalar> slack = qp.b - qp.L * z_mpc;
        s += Scalar(2) * q.dot(slack);
    }
    return s;
}

template <typename Scalar>
Scalar box_qc_scalar(const InputBox<Scalar>& box, const MultiplierSet<Scalar>& ms,
                     const VectorX<Scalar>& x)
{
    auto t = ms.segment(Tag::tau_x);
    Scalar s = Scalar(0);
    for (Index d = 0; d < box.dim(); ++d)
        s += Scalar(2) * t[d] * (box.upper(d) - x[d]) * (x[d] - box.lower(d));
    return s;
}

}  // namespace polgap
