#include "apcbms/surrogate.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace apcbms {

namespace {

// Threshold for rank decisions relative to the largest pivot. Collocation
// grids produce well-separated pivots; anything below this indicates
// (near-)duplicate points.
constexpr double kRankThreshold = 1e-10;

std::string list_near_duplicates(const CollocationSet& colloc) {
    std::ostringstream os;
    bool found = false;
    for (int i = 0; i < colloc.size(); ++i) {
        for (int j = i + 1; j < colloc.size(); ++j) {
            if (points_close(colloc.point(i), colloc.point(j), 1e-8)) {
                if (found) os << "; ";
                found = true;
                os << "points " << i << " and " << j << " at (";
                for (int c = 0; c < colloc.point(i).size(); ++c) {
                    if (c) os << ", ";
                    os << colloc.point(i)(c);
                }
                os << ")";
            }
        }
    }
    if (!found) return "no near-duplicate pair found; the grid may be otherwise degenerate";
    return os.str();
}

}  // namespace

Surrogate::Surrogate(std::shared_ptr<const MultivariateBasis> basis, CollocationSet colloc,
                     Matrix coefficients, Matrix cached_outputs)
    : basis_(std::move(basis)),
      colloc_(std::move(colloc)),
      coeffs_(std::move(coefficients)),
      cached_outputs_(std::move(cached_outputs)) {
    if (!basis_) throw InvalidArgument("surrogate needs a basis");
    if (coeffs_.cols() != basis_->term_count()) {
        throw InvalidArgument("coefficient matrix has " + std::to_string(coeffs_.cols()) +
                              " columns, basis has " + std::to_string(basis_->term_count()) +
                              " terms");
    }
    if (cached_outputs_.rows() != coeffs_.rows() || cached_outputs_.cols() != colloc_.size()) {
        throw InvalidArgument("cached outputs must be N_out x P");
    }
    if (!coeffs_.allFinite()) throw NumericalError("surrogate coefficients contain NaN/Inf");
}

Matrix Surrogate::evaluate(const Matrix& points) const {
    return basis_->design_matrix(points) * coeffs_.transpose();
}

Matrix Surrogate::evaluate_subset(const Matrix& points, const std::vector<int>& coords) const {
    Matrix sub(static_cast<int>(coords.size()), coeffs_.cols());
    for (std::size_t i = 0; i < coords.size(); ++i) {
        sub.row(static_cast<int>(i)) = coeffs_.row(coords[i]);
    }
    return basis_->design_matrix(points) * sub.transpose();
}

Surrogate solve_coefficients(std::shared_ptr<const MultivariateBasis> basis,
                             const CollocationSet& colloc, const Matrix& model_outputs) {
    if (!basis) throw InvalidArgument("solve_coefficients: null basis");
    const int terms = basis->term_count();
    const int p = colloc.size();
    if (p < terms) {
        throw InvalidArgument("need at least D+1 = " + std::to_string(terms) +
                              " collocation points, got " + std::to_string(p));
    }
    if (model_outputs.cols() != p) {
        throw InvalidArgument("model outputs must have one column per collocation point");
    }

    const Matrix design = basis->design_matrix(colloc.as_matrix());
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < terms) {
        throw NumericalError("collocation design matrix is rank deficient (" +
                             std::to_string(qr.rank()) + " < " + std::to_string(terms) +
                             "); near-duplicate collocation points: " + list_near_duplicates(colloc));
    }
    // one shared decomposition, one solve per output coordinate
    const Matrix coeffs_t = qr.solve(model_outputs.transpose());  // (D+1) x N_out
    return Surrogate(std::move(basis), colloc, coeffs_t.transpose(), model_outputs);
}

LoocvReport loocv_error(const MultivariateBasis& basis, const CollocationSet& colloc,
                        const Matrix& model_outputs) {
    const int terms = basis.term_count();
    const int p = colloc.size();
    const int n_out = static_cast<int>(model_outputs.rows());
    if (p < terms + 1) {
        throw InvalidArgument("LOOCV needs P >= D+2 = " + std::to_string(terms + 1) +
                              " collocation points, got " + std::to_string(p));
    }
    if (model_outputs.cols() != p) {
        throw InvalidArgument("model outputs must have one column per collocation point");
    }

    const Matrix design = basis.design_matrix(colloc.as_matrix());
    Vector sq_err = Vector::Zero(n_out);
    Matrix fold_design(p - 1, terms);
    Matrix fold_outputs(p - 1, n_out);
    for (int omit = 0; omit < p; ++omit) {
        int row = 0;
        for (int i = 0; i < p; ++i) {
            if (i == omit) continue;
            fold_design.row(row) = design.row(i);
            fold_outputs.row(row) = model_outputs.col(i).transpose();
            ++row;
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(fold_design);
        qr.setThreshold(kRankThreshold);
        if (qr.rank() < terms) {
            throw NumericalError("LOOCV fold omitting point " + std::to_string(omit) +
                                 " leaves a rank-deficient system");
        }
        const Matrix fold_coeffs = qr.solve(fold_outputs);  // (D+1) x N_out
        const Vector prediction = (design.row(omit) * fold_coeffs).transpose();
        const Vector residual = model_outputs.col(omit) - prediction;
        sq_err += residual.cwiseProduct(residual);
    }

    LoocvReport report;
    report.mse = sq_err / static_cast<double>(p);
    report.mean_mse = report.mse.mean();
    report.relative = Vector::Zero(n_out);
    report.relative_is_absolute.assign(static_cast<std::size_t>(n_out), false);
    double rel_sum = 0.0;
    for (int i = 0; i < n_out; ++i) {
        const double mean_output = model_outputs.row(i).mean();
        const double root = std::sqrt(report.mse(i));
        if (mean_output == 0.0) {
            report.relative(i) = root;
            report.relative_is_absolute[static_cast<std::size_t>(i)] = true;
        } else {
            report.relative(i) = root / std::abs(mean_output);
        }
        rel_sum += report.relative(i);
    }
    report.mean_relative = rel_sum / static_cast<double>(n_out);
    return report;
}

double LoocvReport::mean_relative_over(const std::vector<int>& coords) const {
    if (coords.empty()) return 0.0;
    double acc = 0.0;
    for (int i : coords) acc += relative(i);
    return acc / static_cast<double>(coords.size());
}

double LoocvReport::mean_mse_over(const std::vector<int>& coords) const {
    if (coords.empty()) return 0.0;
    double acc = 0.0;
    for (int i : coords) acc += mse(i);
    return acc / static_cast<double>(coords.size());
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& doc) {
    const int rows = static_cast<int>(doc.size());
    if (rows == 0) return Matrix(0, 0);
    const int cols = static_cast<int>(doc.at(0).size());
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = doc.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

}  // namespace

nlohmann::json surrogate_to_json(const Surrogate& surrogate, const ParameterSpace& space,
                                 const OutputGrid& grid) {
    nlohmann::json doc;
    doc["degree"] = surrogate.basis().degree();
    doc["parameters"] = space.names();
    doc["multi_indices"] = surrogate.basis().multi_indices();
    doc["coefficients"] = matrix_to_json(surrogate.coefficients());
    doc["collocation_points"] = matrix_to_json(surrogate.collocation().as_matrix());
    nlohmann::json tags = nlohmann::json::array();
    for (int i = 0; i < surrogate.collocation().size(); ++i) {
        tags.push_back(surrogate.collocation().tag(i) == CollocationTag::Initial ? "initial"
                                                                                 : "bapc-update");
    }
    doc["collocation_tags"] = std::move(tags);
    doc["cached_outputs"] = matrix_to_json(surrogate.cached_outputs());
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& c : grid.coords()) {
        coords.push_back({{"space", c.space_label}, {"time", c.time_label}, {"quantity", c.quantity}});
    }
    doc["output_grid"] = std::move(coords);
    return doc;
}

Surrogate surrogate_from_json(const nlohmann::json& doc, const ParameterSpace& space) {
    const auto names = doc.at("parameters").get<std::vector<std::string>>();
    if (names != space.names()) {
        throw InvalidArgument("surrogate was built for parameters that do not match the space");
    }
    auto basis = std::make_shared<MultivariateBasis>(space, doc.at("degree").get<int>());
    const auto indices = doc.at("multi_indices").get<std::vector<std::vector<int>>>();
    if (indices != basis->multi_indices()) {
        throw InvalidArgument("surrogate multi-index order does not match the rebuilt basis");
    }
    const Matrix points = matrix_from_json(doc.at("collocation_points"));
    const auto tags = doc.at("collocation_tags").get<std::vector<std::string>>();
    CollocationSet colloc;
    for (int i = 0; i < points.rows(); ++i) {
        colloc.add(points.row(i).transpose(), tags.at(static_cast<std::size_t>(i)) == "initial"
                                                  ? CollocationTag::Initial
                                                  : CollocationTag::BapcUpdate);
    }
    return Surrogate(std::move(basis), std::move(colloc), matrix_from_json(doc.at("coefficients")),
                     matrix_from_json(doc.at("cached_outputs")));
}

nlohmann::json basis_to_json(const MultivariateBasis& basis, const ParameterSpace& space) {
    nlohmann::json doc;
    doc["degree"] = basis.degree();
    doc["term_count"] = basis.term_count();
    doc["multi_indices"] = basis.multi_indices();
    nlohmann::json families = nlohmann::json::array();
    for (int dim = 0; dim < basis.dimension(); ++dim) {
        const auto& fam = basis.family(dim);
        nlohmann::json f;
        f["parameter"] = space.names()[static_cast<std::size_t>(dim)];
        f["shift"] = fam.shift();
        f["scale"] = fam.scale();
        nlohmann::json coeffs = nlohmann::json::array();
        for (int deg = 0; deg <= fam.max_degree(); ++deg) {
            coeffs.push_back(fam.coefficients_standardized(deg));
        }
        f["coefficients_standardized"] = std::move(coeffs);
        families.push_back(std::move(f));
    }
    doc["families"] = std::move(families);
    return doc;
}

}  // namespace apcbms
