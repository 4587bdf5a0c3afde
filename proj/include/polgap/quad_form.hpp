#pragma once

#include "polgap/fwd.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace polgap {

/// Variable-group tags for the multiplier space of the bound SDPs. The first
/// block are quadratic constraints on the activation; tau_* weight the MPC and
/// input-box constraints; gamma_* are the bound itself; qp_* are the synthesis
/// decision variables.
enum class Tag {
    sector,
    slope,
    slope_pair,
    bounded,
    positive,
    complement_positive,
    complementarity,
    cross,
    otimes,
    tau_qp,
    tau_in,
    tau_in_plus,
    tau_in_cplus,
    tau_x,
    gamma_x,
    gamma,
    qp_hessian,
    qp_linear,
    qp_row_sum,
    qp_bound_sum,
};

inline const char* tag_name(Tag t)
{
    switch (t) {
        case Tag::sector: return "sector";
        case Tag::slope: return "slope";
        case Tag::slope_pair: return "slope_pair";
        case Tag::bounded: return "bounded";
        case Tag::positive: return "positive";
        case Tag::complement_positive: return "complement_positive";
        case Tag::complementarity: return "complementarity";
        case Tag::cross: return "cross";
        case Tag::otimes: return "otimes";
        case Tag::tau_qp: return "tau_qp";
        case Tag::tau_in: return "tau_in";
        case Tag::tau_in_plus: return "tau_in_plus";
        case Tag::tau_in_cplus: return "tau_in_cplus";
        case Tag::tau_x: return "tau_x";
        case Tag::gamma_x: return "gamma_x";
        case Tag::gamma: return "gamma";
        case Tag::qp_hessian: return "qp_hessian";
        case Tag::qp_linear: return "qp_linear";
        case Tag::qp_row_sum: return "qp_row_sum";
        case Tag::qp_bound_sum: return "qp_bound_sum";
    }
    return "?";
}

inline Tag tag_from_name(const std::string& s)
{
    for (int v = 0; v <= static_cast<int>(Tag::qp_bound_sum); ++v) {
        const Tag t = static_cast<Tag>(v);
        if (s == tag_name(t)) return t;
    }
    throw ParseError("unknown multiplier tag: " + s);
}

enum class Cone { nonneg, free_var, psd };

struct VarGroup {
    Tag tag;
    Index offset = 0;
    Index count = 0;
    Cone cone = Cone::nonneg;
    Index psd_dim = 0;      // for Cone::psd, count == psd_dim (psd_dim + 1) / 2
    double psd_shift = 0;   // matrix must satisfy mat >= psd_shift * I
};

/// Ordered variable groups. Every scalar coordinate belongs to exactly one
/// group; offsets are assigned in insertion order.
class MultiplierLayout {
public:
    Index add_group(Tag tag, Index count, Cone cone, Index psd_dim = 0,
                    double psd_shift = 0)
    {
        if (count <= 0) throw InvariantViolation("MultiplierLayout: empty group");
        if (index_.count(tag))
            throw InvariantViolation(std::string("MultiplierLayout: duplicate group ") +
                                     tag_name(tag));
        VarGroup g{tag, size_, count, cone, psd_dim, psd_shift};
        index_[tag] = groups_.size();
        groups_.push_back(g);
        size_ += count;
        return g.offset;
    }

    bool has(Tag tag) const { return index_.count(tag) > 0; }

    const VarGroup& at(Tag tag) const
    {
        auto it = index_.find(tag);
        if (it == index_.end())
            throw InvariantViolation(std::string("MultiplierLayout: no group ") +
                                     tag_name(tag));
        return groups_[it->second];
    }

    Index size() const { return size_; }
    const std::vector<VarGroup>& groups() const { return groups_; }

private:
    std::vector<VarGroup> groups_;
    std::map<Tag, std::size_t> index_;
    Index size_ = 0;
};

/// Multiplier values over a layout. Cone membership is exactly the per-group
/// condition: nonneg groups elementwise >= 0, psd groups >= shift * I, free
/// groups unconstrained.
template <typename Scalar>
struct MultiplierSet {
    MultiplierLayout layout;
    VectorX<Scalar> values;

    static MultiplierSet zero(MultiplierLayout l)
    {
        MultiplierSet ms;
        ms.values = VectorX<Scalar>::Zero(l.size());
        ms.layout = std::move(l);
        return ms;
    }

    Eigen::Ref<const VectorX<Scalar>> segment(Tag tag) const
    {
        const auto& g = layout.at(tag);
        return values.segment(g.offset, g.count);
    }

    Eigen::Ref<VectorX<Scalar>> segment(Tag tag)
    {
        const auto& g = layout.at(tag);
        return values.segment(g.offset, g.count);
    }

    Scalar value(Tag tag) const
    {
        const auto& g = layout.at(tag);
        if (g.count != 1)
            throw InvariantViolation("MultiplierSet: group is not scalar");
        return values[g.offset];
    }

    /// Reconstructs the symmetric matrix of a psd group from its packed
    /// upper-triangular coordinates (column-major: (i,j), i <= j).
    MatrixX<Scalar> psd_matrix(Tag tag) const
    {
        const auto& g = layout.at(tag);
        MatrixX<Scalar> m(g.psd_dim, g.psd_dim);
        Index k = g.offset;
        for (Index j = 0; j < g.psd_dim; ++j)
            for (Index i = 0; i <= j; ++i) {
                m(i, j) = values[k];
                m(j, i) = values[k];
                ++k;
            }
        return m;
    }
};

/// Quadratic form over a stacked vector, affine in the multiplier
/// coordinates: F(theta) = constant + sum_k theta[id_k] * basis_k. All stored
/// matrices are exactly symmetric.
template <typename Scalar>
struct QuadForm {
    Index dim = 0;
    MatrixX<Scalar> constant;
    std::vector<std::pair<Index, MatrixX<Scalar>>> terms;

    explicit QuadForm(Index d = 0)
        : dim(d), constant(MatrixX<Scalar>::Zero(d, d))
    {
    }

    MatrixX<Scalar> assemble(const VectorX<Scalar>& theta) const
    {
        MatrixX<Scalar> out = constant;
        for (const auto& [id, basis] : terms) out += theta[id] * basis;
        return out;
    }

    MatrixX<Scalar> assemble(const MultiplierSet<Scalar>& ms) const
    {
        return assemble(ms.values);
    }

    /// Embeds this form into a larger stacked vector; row_map[i] gives the new
    /// index of old coordinate i.
    QuadForm padded(Index new_dim, const std::vector<Index>& row_map) const
    {
        if (static_cast<Index>(row_map.size()) != dim)
            throw DimensionMismatch("QuadForm::padded: row_map size mismatch");
        QuadForm out(new_dim);
        auto embed = [&](const MatrixX<Scalar>& m) {
            MatrixX<Scalar> e = MatrixX<Scalar>::Zero(new_dim, new_dim);
            for (Index j = 0; j < dim; ++j)
                for (Index i = 0; i < dim; ++i) e(row_map[i], row_map[j]) = m(i, j);
            return e;
        };
        out.constant = embed(constant);
        out.terms.reserve(terms.size());
        for (const auto& [id, basis] : terms) out.terms.push_back({id, embed(basis)});
        return out;
    }

    QuadForm& operator+=(const QuadForm& other)
    {
        if (other.dim != dim) throw DimensionMismatch("QuadForm: dimension mismatch");
        constant += other.constant;
        terms.insert(terms.end(), other.terms.begin(), other.terms.end());
        return *this;
    }
};

}  // namespace polgap
