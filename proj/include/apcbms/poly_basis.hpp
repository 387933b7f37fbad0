#pragma once

#include <string>
#include <vector>

#include "apcbms/param_space.hpp"
#include "apcbms/types.hpp"

namespace apcbms {

/// Orthonormal univariate polynomial family for one prior, built from raw
/// moments. Internally the polynomials live in the standardized variable
/// u = (x - shift) / scale (support mapped into [-1, 1]) which keeps the
/// Hankel moment systems well conditioned even for priors like
/// uniform[1e-10, 1e-7].
class UnivariateFamily {
public:
    // Builds members of degree 0..max_degree, orthonormal w.r.t. the prior,
    // leading coefficients positive. `parameter_name` only decorates error
    // messages.
    static UnivariateFamily build(const Prior1D& prior, int max_degree,
                                  const std::string& parameter_name = {});

    int max_degree() const { return static_cast<int>(ortho_std_.size()) - 1; }
    double shift() const { return shift_; }
    double scale() const { return scale_; }

    // psi_k evaluated at a point of the original variable.
    double evaluate(int degree, double x) const;

    // Monomial coefficients of psi_k, ascending order, standardized variable.
    const std::vector<double>& coefficients_standardized(int degree) const;

    // Monomial coefficients of psi_k in the original variable (composed
    // through the affine map). Mind the scaling: for narrow supports these
    // grow like scale^-k.
    std::vector<double> coefficients(int degree) const;

    // Norm of the monic degree-k member before normalization.
    double normalization(int degree) const;

    // All k real roots of the degree-k member, ascending. Uses the
    // companion matrix of the monic polynomial plus one Newton polish.
    std::vector<double> roots(int degree) const;

private:
    UnivariateFamily() = default;

    double shift_ = 0.0;
    double scale_ = 1.0;
    std::string name_;
    std::vector<std::vector<double>> monic_std_;  // per degree, ascending, leading 1
    std::vector<std::vector<double>> ortho_std_;  // per degree, ascending, orthonormal
    std::vector<double> norms_;                   // per degree
};

/// Multi-index set {alpha : sum(alpha) <= d} in graded lexicographic order
/// (zero index first) tensorized over per-parameter families.
class MultivariateBasis {
public:
    MultivariateBasis(const ParameterSpace& space, int degree);

    int dimension() const { return static_cast<int>(families_.size()); }
    int degree() const { return degree_; }
    // D = (N_p + d)! / (N_p! d!) - 1; the basis exposes D + 1 terms.
    int term_count() const { return static_cast<int>(indices_.size()); }
    const std::vector<std::vector<int>>& multi_indices() const { return indices_; }
    const UnivariateFamily& family(int dim) const {
        return families_.at(static_cast<std::size_t>(dim));
    }

    // Psi_alpha(point) for one term.
    double evaluate_term(int term, const Vector& point) const;

    // P x (D+1) design matrix: row p holds all basis terms at points.row(p).
    Matrix design_matrix(const Matrix& points) const;

private:
    int degree_;
    std::vector<UnivariateFamily> families_;
    std::vector<std::vector<int>> indices_;
};

enum class CollocationTag { Initial, BapcUpdate };

/// Ordered set of collocation points with provenance. Rejects points that
/// duplicate an existing one within a per-coordinate relative tolerance.
class CollocationSet {
public:
    static constexpr double kDuplicateRelTol = 1e-12;

    void add(const Vector& point, CollocationTag tag);
    bool contains_close(const Vector& point, double rel_tol) const;

    int size() const { return static_cast<int>(points_.size()); }
    const Vector& point(int i) const { return points_.at(static_cast<std::size_t>(i)); }
    CollocationTag tag(int i) const { return tags_.at(static_cast<std::size_t>(i)); }

    // size x N_p matrix of the points in insertion order.
    Matrix as_matrix() const;

private:
    std::vector<Vector> points_;
    std::vector<CollocationTag> tags_;
};

// True when every coordinate pair agrees within the relative tolerance.
bool points_close(const Vector& a, const Vector& b, double rel_tol);

/// Chooses the initial collocation points: the tensor grid of the
/// degree-(d+1) univariate roots, ranked by descending joint prior density,
/// then ascending distance to the prior mean in standardized coordinates,
/// then lexicographic order. Deterministic.
CollocationSet initial_collocation(const MultivariateBasis& basis, const ParameterSpace& space,
                                   int count);

}  // namespace apcbms
