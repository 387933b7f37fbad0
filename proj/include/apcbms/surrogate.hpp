#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "apcbms/observations.hpp"
#include "apcbms/poly_basis.hpp"
#include "apcbms/types.hpp"

namespace apcbms {

/// Polynomial chaos surrogate: expansion coefficients per output coordinate
/// against a shared basis, plus the collocation set and the cached original
/// model outputs it was fitted to. Immutable after construction.
class Surrogate {
public:
    Surrogate(std::shared_ptr<const MultivariateBasis> basis, CollocationSet colloc,
              Matrix coefficients, Matrix cached_outputs);

    const MultivariateBasis& basis() const { return *basis_; }
    std::shared_ptr<const MultivariateBasis> basis_ptr() const { return basis_; }
    const CollocationSet& collocation() const { return colloc_; }
    // N_out x (D+1)
    const Matrix& coefficients() const { return coeffs_; }
    // N_out x P original-model outputs at the collocation points
    const Matrix& cached_outputs() const { return cached_outputs_; }
    int output_count() const { return static_cast<int>(coeffs_.rows()); }

    // n x N_out predictions at arbitrary parameter points (extrapolation
    // outside the collocation range is allowed).
    Matrix evaluate(const Matrix& points) const;
    // n x |coords| predictions restricted to a coordinate subset.
    Matrix evaluate_subset(const Matrix& points, const std::vector<int>& coords) const;

private:
    std::shared_ptr<const MultivariateBasis> basis_;
    CollocationSet colloc_;
    Matrix coeffs_;
    Matrix cached_outputs_;
};

/// Solves for the expansion coefficients: square collocation system when
/// P = D+1, least squares through a QR decomposition when P > D+1. The
/// design matrix is shared by all output coordinates.
Surrogate solve_coefficients(std::shared_ptr<const MultivariateBasis> basis,
                             const CollocationSet& colloc, const Matrix& model_outputs);

struct LoocvReport {
    Vector mse;                     // per output coordinate, mean over folds
    double mean_mse = 0.0;          // average over coordinates
    Vector relative;                // sqrt(mse) / |mean model output|
    std::vector<bool> relative_is_absolute;  // true where the mean output was 0
    double mean_relative = 0.0;

    double mean_relative_over(const std::vector<int>& coords) const;
    double mean_mse_over(const std::vector<int>& coords) const;
};

/// Leave-one-out cross validation by explicit refits; requires P >= D+2 so
/// every fold stays solvable.
LoocvReport loocv_error(const MultivariateBasis& basis, const CollocationSet& colloc,
                        const Matrix& model_outputs);

// Serialization. The basis is rebuilt from the parameter space, so loading
// requires the same space the surrogate was built with.
nlohmann::json surrogate_to_json(const Surrogate& surrogate, const ParameterSpace& space,
                                 const OutputGrid& grid);
Surrogate surrogate_from_json(const nlohmann::json& doc, const ParameterSpace& space);

// Debug dump of the per-parameter families and the multi-index order.
nlohmann::json basis_to_json(const MultivariateBasis& basis, const ParameterSpace& space);

}  // namespace apcbms
