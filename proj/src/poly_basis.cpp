#include "apcbms/poly_basis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace apcbms {

namespace {

double horner(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

double horner_derivative(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (int k = static_cast<int>(coeffs.size()) - 1; k >= 1; --k) {
        acc = acc * x + static_cast<double>(k) * coeffs[static_cast<std::size_t>(k)];
    }
    return acc;
}

std::string describe_coefficients(const std::vector<double>& coeffs) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i) os << ", ";
        os << coeffs[i];
    }
    os << "]";
    return os.str();
}

}  // namespace

UnivariateFamily UnivariateFamily::build(const Prior1D& prior, int max_degree,
                                         const std::string& parameter_name) {
    if (max_degree < 0) throw InvalidArgument("max_degree must be >= 0");
    const std::string who = parameter_name.empty() ? "<unnamed>" : parameter_name;

    // standardized moments up to order 2 * max_degree
    std::vector<double> mu(static_cast<std::size_t>(2 * max_degree) + 1);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        mu[k] = prior.standardized_moment(static_cast<int>(k));
    }

    UnivariateFamily fam;
    fam.shift_ = prior.std_shift();
    fam.scale_ = prior.std_scale();
    fam.name_ = who;

    for (int deg = 0; deg <= max_degree; ++deg) {
        std::vector<double> monic(static_cast<std::size_t>(deg) + 1, 0.0);
        monic.back() = 1.0;
        if (deg > 0) {
            // Orthogonality of the monic candidate to 1, u, ..., u^{deg-1}
            // gives the Hankel system H a = -m with H(i,j) = mu_{i+j}.
            Matrix hankel(deg, deg);
            Vector rhs(deg);
            for (int i = 0; i < deg; ++i) {
                for (int j = 0; j < deg; ++j) hankel(i, j) = mu[static_cast<std::size_t>(i + j)];
                rhs(i) = -mu[static_cast<std::size_t>(i + deg)];
            }
            Eigen::FullPivLU<Matrix> lu(hankel);
            if (!lu.isInvertible()) {
                throw NumericalError("moment (Hankel) system is numerically singular for parameter '" +
                                     who + "' at degree " + std::to_string(deg));
            }
            const Vector a = lu.solve(rhs);
            for (int i = 0; i < deg; ++i) monic[static_cast<std::size_t>(i)] = a(i);
        }

        // norm^2 = sum_{i,j} a_i a_j mu_{i+j}
        double norm2 = 0.0;
        for (std::size_t i = 0; i < monic.size(); ++i) {
            for (std::size_t j = 0; j < monic.size(); ++j) {
                norm2 += monic[i] * monic[j] * mu[i + j];
            }
        }
        if (!(norm2 > 1e-14) || !std::isfinite(norm2)) {
            throw NumericalError("moment (Hankel) system is numerically singular for parameter '" +
                                 who + "' at degree " + std::to_string(deg) +
                                 " (vanishing norm, the prior may have too few distinct values)");
        }
        const double norm = std::sqrt(norm2);
        std::vector<double> ortho(monic.size());
        for (std::size_t i = 0; i < monic.size(); ++i) ortho[i] = monic[i] / norm;

        fam.monic_std_.push_back(std::move(monic));
        fam.ortho_std_.push_back(std::move(ortho));
        fam.norms_.push_back(norm);
    }
    return fam;
}

double UnivariateFamily::evaluate(int degree, double x) const {
    return horner(coefficients_standardized(degree), (x - shift_) / scale_);
}

const std::vector<double>& UnivariateFamily::coefficients_standardized(int degree) const {
    if (degree < 0 || degree > max_degree()) {
        throw InvalidArgument("degree " + std::to_string(degree) + " outside family range");
    }
    return ortho_std_[static_cast<std::size_t>(degree)];
}

std::vector<double> UnivariateFamily::coefficients(int degree) const {
    const auto& std_coeffs = coefficients_standardized(degree);
    // compose with u = (x - shift) / scale via binomial expansion of each power
    std::vector<double> out(std_coeffs.size(), 0.0);
    for (std::size_t j = 0; j < std_coeffs.size(); ++j) {
        const double cj = std_coeffs[j] / std::pow(scale_, static_cast<double>(j));
        // (x - shift)^j
        double binom = 1.0;
        for (std::size_t m = 0; m <= j; ++m) {
            // C(j, m) * (-shift)^{j-m} x^m
            out[m] += cj * binom * std::pow(-shift_, static_cast<double>(j - m));
            binom = binom * static_cast<double>(j - m) / static_cast<double>(m + 1);
        }
    }
    return out;
}

double UnivariateFamily::normalization(int degree) const {
    if (degree < 0 || degree > max_degree()) {
        throw InvalidArgument("degree " + std::to_string(degree) + " outside family range");
    }
    return norms_[static_cast<std::size_t>(degree)];
}

std::vector<double> UnivariateFamily::roots(int degree) const {
    if (degree < 1 || degree > max_degree()) {
        throw InvalidArgument("roots: degree " + std::to_string(degree) + " outside [1, " +
                              std::to_string(max_degree()) + "]");
    }
    const auto& monic = monic_std_[static_cast<std::size_t>(degree)];
    const auto& ortho = ortho_std_[static_cast<std::size_t>(degree)];

    std::vector<double> roots_std;
    if (degree == 1) {
        roots_std.push_back(-monic[0]);
    } else {
        Matrix companion = Matrix::Zero(degree, degree);
        for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
        for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -monic[static_cast<std::size_t>(i)];
        Eigen::EigenSolver<Matrix> solver(companion);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("root finding did not converge for polynomial with coefficients " +
                                 describe_coefficients(monic));
        }
        for (int i = 0; i < degree; ++i) {
            const auto ev = solver.eigenvalues()(i);
            if (std::abs(ev.imag()) > 1e-8 * (1.0 + std::abs(ev.real()))) {
                throw NumericalError("root finding produced a complex root for polynomial with coefficients " +
                                     describe_coefficients(monic));
            }
            roots_std.push_back(ev.real());
        }
    }

    double coeff_scale = 0.0;
    for (double c : ortho) coeff_scale = std::max(coeff_scale, std::abs(c));
    for (double& r : roots_std) {
        // single Newton polish on the monic form
        const double dp = horner_derivative(monic, r);
        if (dp != 0.0) r -= horner(monic, r) / dp;
        const double residual = std::abs(horner(ortho, r));
        if (!(residual < 1e-10 * coeff_scale)) {
            throw NumericalError("root residual " + std::to_string(residual) +
                                 " too large for polynomial with coefficients " +
                                 describe_coefficients(ortho));
        }
    }
    std::sort(roots_std.begin(), roots_std.end());

    std::vector<double> out;
    out.reserve(roots_std.size());
    for (double r : roots_std) out.push_back(shift_ + scale_ * r);
    return out;
}

namespace {

// all tuples of length `dims` with component sum exactly `remaining`,
// lexicographically ascending
void enumerate_indices(int dims, int remaining, std::vector<int>& current,
                       std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == dims - 1) {
        current.push_back(remaining);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        current.push_back(v);
        enumerate_indices(dims, remaining - v, current, out);
        current.pop_back();
    }
}

}  // namespace

MultivariateBasis::MultivariateBasis(const ParameterSpace& space, int degree) : degree_(degree) {
    if (degree < 1) throw InvalidArgument("expansion degree must be >= 1");
    for (int i = 0; i < space.dimension(); ++i) {
        families_.push_back(UnivariateFamily::build(space.prior(i), degree + 1, space.names()[static_cast<std::size_t>(i)]));
    }
    // graded lexicographic order: total degree first, zero index leading
    for (int total = 0; total <= degree; ++total) {
        std::vector<int> current;
        enumerate_indices(space.dimension(), total, current, indices_);
    }
}

double MultivariateBasis::evaluate_term(int term, const Vector& point) const {
    const auto& alpha = indices_.at(static_cast<std::size_t>(term));
    double acc = 1.0;
    for (int dim = 0; dim < dimension(); ++dim) {
        acc *= families_[static_cast<std::size_t>(dim)].evaluate(alpha[static_cast<std::size_t>(dim)], point(dim));
    }
    return acc;
}

Matrix MultivariateBasis::design_matrix(const Matrix& points) const {
    if (points.cols() != dimension()) {
        throw InvalidArgument("design_matrix: points have " + std::to_string(points.cols()) +
                              " columns, expected " + std::to_string(dimension()));
    }
    const int n = static_cast<int>(points.rows());
    // per-dimension table of psi_deg(x) for deg 0..degree
    Matrix design(n, term_count());
    std::vector<Matrix> tables;
    tables.reserve(static_cast<std::size_t>(dimension()));
    for (int dim = 0; dim < dimension(); ++dim) {
        Matrix t(n, degree_ + 1);
        for (int r = 0; r < n; ++r) {
            for (int deg = 0; deg <= degree_; ++deg) {
                t(r, deg) = families_[static_cast<std::size_t>(dim)].evaluate(deg, points(r, dim));
            }
        }
        tables.push_back(std::move(t));
    }
    for (int term = 0; term < term_count(); ++term) {
        const auto& alpha = indices_[static_cast<std::size_t>(term)];
        for (int r = 0; r < n; ++r) {
            double acc = 1.0;
            for (int dim = 0; dim < dimension(); ++dim) {
                acc *= tables[static_cast<std::size_t>(dim)](r, alpha[static_cast<std::size_t>(dim)]);
            }
            design(r, term) = acc;
        }
    }
    return design;
}

bool points_close(const Vector& a, const Vector& b, double rel_tol) {
    if (a.size() != b.size()) return false;
    for (int i = 0; i < a.size(); ++i) {
        const double tol = rel_tol * std::max(std::abs(a(i)), std::abs(b(i)));
        if (std::abs(a(i) - b(i)) > tol) return false;
    }
    return true;
}

void CollocationSet::add(const Vector& point, CollocationTag tag) {
    if (contains_close(point, kDuplicateRelTol)) {
        throw InvalidArgument("collocation point duplicates an existing one within relative tolerance");
    }
    points_.push_back(point);
    tags_.push_back(tag);
}

bool CollocationSet::contains_close(const Vector& point, double rel_tol) const {
    for (const auto& p : points_) {
        if (points_close(p, point, rel_tol)) return true;
    }
    return false;
}

Matrix CollocationSet::as_matrix() const {
    if (points_.empty()) return Matrix(0, 0);
    Matrix m(size(), points_.front().size());
    for (int i = 0; i < size(); ++i) m.row(i) = points_[static_cast<std::size_t>(i)].transpose();
    return m;
}

CollocationSet initial_collocation(const MultivariateBasis& basis, const ParameterSpace& space,
                                   int count) {
    const int dims = basis.dimension();
    const int root_degree = basis.degree() + 1;
    std::vector<std::vector<double>> axis_roots;
    axis_roots.reserve(static_cast<std::size_t>(dims));
    std::size_t candidate_count = 1;
    for (int dim = 0; dim < dims; ++dim) {
        axis_roots.push_back(basis.family(dim).roots(root_degree));
        candidate_count *= axis_roots.back().size();
    }
    if (count < basis.term_count()) {
        throw InvalidArgument("initial collocation needs at least D+1 = " +
                              std::to_string(basis.term_count()) + " points, got " +
                              std::to_string(count));
    }
    if (static_cast<std::size_t>(count) > candidate_count) {
        throw InvalidArgument("requested " + std::to_string(count) + " collocation points but only " +
                              std::to_string(candidate_count) + " tensor-grid candidates exist");
    }

    struct Candidate {
        Vector point;
        double density;
        double dist2;  // in standardized coordinates
    };
    std::vector<Candidate> candidates;
    candidates.reserve(candidate_count);

    const Vector mean = space.mean();
    std::vector<std::size_t> cursor(static_cast<std::size_t>(dims), 0);
    while (true) {
        Vector p(dims);
        double dist2 = 0.0;
        for (int dim = 0; dim < dims; ++dim) {
            const double x = axis_roots[static_cast<std::size_t>(dim)][cursor[static_cast<std::size_t>(dim)]];
            p(dim) = x;
            const auto& fam = basis.family(dim);
            const double du = (x - mean(dim)) / fam.scale();
            dist2 += du * du;
        }
        candidates.push_back({p, space.density(p), dist2});
        // advance the odometer
        int dim = dims - 1;
        while (dim >= 0) {
            if (++cursor[static_cast<std::size_t>(dim)] < axis_roots[static_cast<std::size_t>(dim)].size()) break;
            cursor[static_cast<std::size_t>(dim)] = 0;
            --dim;
        }
        if (dim < 0) break;
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.density != b.density) return a.density > b.density;
        if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
        for (int i = 0; i < a.point.size(); ++i) {
            if (a.point(i) != b.point(i)) return a.point(i) < b.point(i);
        }
        return false;
    });

    CollocationSet out;
    for (int i = 0; i < count; ++i) {
        out.add(candidates[static_cast<std::size_t>(i)].point, CollocationTag::Initial);
    }
    return out;
}

}  // namespace apcbms
