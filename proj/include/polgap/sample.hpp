#pragma once

#include "polgap/bounds.hpp"
#include "polgap/network.hpp"
#include "polgap/qp.hpp"
#include "polgap/rng.hpp"

#include <vector>

namespace polgap {

/// Either a deterministic grid (points_per_axis >= 2) or seeded uniform
/// sampling of the box.
struct SampleSpec {
    Index points_per_axis = 0;  // grid when >= 2
    Index count = 0;            // random sample size otherwise
    std::uint64_t seed = 0;

    static SampleSpec grid(Index per_axis)
    {
        SampleSpec s;
        s.points_per_axis = per_axis;
        return s;
    }
    static SampleSpec random(Index count, std::uint64_t seed)
    {
        SampleSpec s;
        s.count = count;
        s.seed = seed;
        return s;
    }
};

inline std::vector<VectorX<double>> sample_box(const InputBox<double>& box,
                                               const SampleSpec& spec)
{
    std::vector<VectorX<double>> pts;
    const Index n = box.dim();
    if (spec.points_per_axis >= 2) {
        const Index g = spec.points_per_axis;
        double total = 1;
        for (Index d = 0; d < n; ++d) total *= static_cast<double>(g);
        if (total > 2e6)
            throw InvariantViolation("sample_box: grid too large; use random sampling");
        std::vector<Index> idx(static_cast<std::size_t>(n), 0);
        pts.reserve(static_cast<std::size_t>(total));
        while (true) {
            VectorX<double> x(n);
            for (Index d = 0; d < n; ++d)
                x[d] = box.lower[d] + (box.upper[d] - box.lower[d]) *
                                          static_cast<double>(idx[d]) /
                                          static_cast<double>(g - 1);
            pts.push_back(std::move(x));
            Index d = 0;
            while (d < n && ++idx[static_cast<std::size_t>(d)] == g) {
                idx[static_cast<std::size_t>(d)] = 0;
                ++d;
            }
            if (d == n) break;
        }
    } else {
        if (spec.count <= 0) throw EmptySampleSet("sample_box: empty sample spec");
        Rng rng(spec.seed);
        pts.reserve(static_cast<std::size_t>(spec.count));
        for (Index k = 0; k < spec.count; ++k) {
            VectorX<double> x(n);
            for (Index d = 0; d < n; ++d) x[d] = rng.uniform(box.lower[d], box.upper[d]);
            pts.push_back(std::move(x));
        }
    }
    return pts;
}

/// max over samples of (||u_nn - u_mpc||^2 - gamma) / ||x||^2, skipping
/// near-zero states. Any sound certificate must have gamma_x at or above this.
inline double empirical_lower_bound(const ImplicitNetwork<double>& net,
                                    const CondensedQp<double>& qp,
                                    const InputBox<double>& box,
                                    const SampleSpec& spec, double gamma = 0.0)
{
    const auto pts = sample_box(box, spec);
    bool any = false;
    double best = 0.0;
    for (const auto& x : pts) {
        const double nx2 = x.squaredNorm();
        if (nx2 < 1e-18) continue;  // ||x|| < 1e-9
        const double du = evaluate(net, x).u - solve_qp(qp, x).u;
        const double v = (du * du - gamma) / nx2;
        if (!any || v > best) {
            best = v;
            any = true;
        }
    }
    if (!any) throw EmptySampleSet("empirical_lower_bound: no usable samples");
    return best;
}

struct SoundnessReport {
    Index violations = 0;       // samples with error^2 > gamma_x ||x||^2 + gamma + slack
    double worst_violation = 0; // most positive error^2 - bound
    double max_error = 0;       // largest sampled |u_nn - u_mpc|
};

/// Samples the box and compares the squared policy gap against the certified
/// bound. A valid certificate must produce zero violations.
inline SoundnessReport soundness_check(const ImplicitNetwork<double>& net,
                                       const CondensedQp<double>& qp,
                                       const InputBox<double>& box, double gamma_x,
                                       double gamma, const SampleSpec& spec,
                                       double slack = 1e-6)
{
    SoundnessReport rep;
    for (const auto& x : sample_box(box, spec)) {
        const double du = evaluate(net, x).u - solve_qp(qp, x).u;
        const double excess = du * du - (gamma_x * x.squaredNorm() + gamma);
        rep.max_error = std::max(rep.max_error, std::abs(du));
        rep.worst_violation = std::max(rep.worst_violation, excess);
        if (excess > slack) ++rep.violations;
    }
    return rep;
}

}  // namespace polgap
