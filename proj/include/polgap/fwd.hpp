#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace polgap {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Error taxonomy shared by the whole library. The CLI maps these onto its
// exit codes (1 = invalid input, 2 = solver failure, 3 = certificate check).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct UnsoundTag : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct QpSolverFailure : Error { using Error::Error; };
struct SolverInfeasible : Error { using Error::Error; };
struct SolverNumericalFailure : Error { using Error::Error; };
struct CertificateCheckFailed : Error { using Error::Error; };
struct EmptySampleSet : Error { using Error::Error; };

// Exact symmetrization: entry (i,j) and (j,i) are computed by the same
// commutative sum, so the result satisfies ||F - F^T|| == 0 identically.
template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& m)
{
    using S = typename Derived::Scalar;
    MatrixX<S> a = m;
    MatrixX<S> out(a.rows(), a.cols());
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            out(i, j) = S(0.5) * (a(i, j) + a(j, i));
    return out;
}

}  // namespace polgap
