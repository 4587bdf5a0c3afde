#pragma once

#include "polgap/fwd.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace polgap {

// Deterministic random source. mt19937_64 is fully specified by the standard;
// the float conversions are done by hand because the std distributions are
// implementation-defined and would break byte-for-byte reproducibility of
// trained weights and sweep outputs across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform()
    {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Box-Muller with a cached spare
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n)
    {
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    template <typename Scalar = double>
    VectorX<Scalar> uniform_vector(Index n, double lo, double hi)
    {
        VectorX<Scalar> out(n);
        for (Index i = 0; i < n; ++i) out[i] = static_cast<Scalar>(uniform(lo, hi));
        return out;
    }

    template <typename Scalar = double>
    MatrixX<Scalar> uniform_matrix(Index rows, Index cols, double lo, double hi)
    {
        MatrixX<Scalar> out(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(uniform(lo, hi));
        return out;
    }

    template <typename Scalar = double>
    MatrixX<Scalar> normal_matrix(Index rows, Index cols)
    {
        MatrixX<Scalar> out(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(normal());
        return out;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace polgap
