#pragma once

#include "polgap/fwd.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace polgap {

/// Scalar activation plus the pointwise function properties it is asserted to
/// satisfy. ReLU and tanh carry their known property sets; custom activations
/// carry user-asserted flags that are trusted as given.
template <typename Scalar>
struct ActivationKind {
    enum class Kind { relu, tanh_fn, custom };

    Kind kind = Kind::relu;
    std::string name = "relu";
    std::function<Scalar(Scalar)> fn;

    std::optional<Scalar> sector_delta;                   // phi(s)/s in [0, delta]
    std::optional<std::pair<Scalar, Scalar>> slope;       // phi' in [lo, hi]
    std::optional<std::pair<Scalar, Scalar>> bound;       // phi(s) in [lo, hi]
    bool positive = false;                                // phi(s) >= 0
    bool complement_positive = false;                     // phi(s) - s >= 0
    bool complementarity = false;                         // (phi(s) - s) phi(s) = 0

    static ActivationKind relu()
    {
        ActivationKind a;
        a.kind = Kind::relu;
        a.name = "relu";
        a.fn = [](Scalar s) { return s > Scalar(0) ? s : Scalar(0); };
        a.sector_delta = Scalar(1);
        a.slope = {Scalar(0), Scalar(1)};
        a.positive = true;
        a.complement_positive = true;
        a.complementarity = true;
        return a;
    }

    static ActivationKind tanh()
    {
        ActivationKind a;
        a.kind = Kind::tanh_fn;
        a.name = "tanh";
        a.fn = [](Scalar s) { using std::tanh; return tanh(s); };
        a.sector_delta = Scalar(1);
        a.slope = {Scalar(0), Scalar(1)};
        a.bound = {Scalar(-1), Scalar(1)};
        return a;
    }

    static ActivationKind custom(std::string label, std::function<Scalar(Scalar)> f)
    {
        ActivationKind a;
        a.kind = Kind::custom;
        a.name = std::move(label);
        a.fn = std::move(f);
        return a;
    }

    // Known tags must carry exactly their sound property set; custom tags are
    // user-asserted and only sanity-checked for parameter ranges.
    void validate() const
    {
        if (kind == Kind::relu) {
            if (!sector_delta || *sector_delta != Scalar(1) || !slope ||
                slope->first != Scalar(0) || slope->second != Scalar(1) || !positive ||
                !complement_positive || !complementarity || bound)
                throw InvariantViolation("ActivationKind: inconsistent flags for relu");
        } else if (kind == Kind::tanh_fn) {
            if (!sector_delta || *sector_delta != Scalar(1) || !slope ||
                slope->first != Scalar(0) || slope->second != Scalar(1) || !bound ||
                bound->first != Scalar(-1) || bound->second != Scalar(1) || positive ||
                complement_positive || complementarity)
                throw InvariantViolation("ActivationKind: inconsistent flags for tanh");
        } else {
            if (sector_delta && *sector_delta <= Scalar(0))
                throw InvariantViolation("ActivationKind: sector delta must be positive");
            if (slope && slope->first > slope->second)
                throw InvariantViolation("ActivationKind: slope interval is empty");
            if (bound && bound->first > bound->second)
                throw InvariantViolation("ActivationKind: bound interval is empty");
        }
        if (!fn) throw InvariantViolation("ActivationKind: missing scalar function");
    }

    VectorX<Scalar> apply(const VectorX<Scalar>& y) const
    {
        VectorX<Scalar> z(y.size());
        for (Index i = 0; i < y.size(); ++i) z[i] = fn(y[i]);
        return z;
    }
};

}  // namespace polgap
