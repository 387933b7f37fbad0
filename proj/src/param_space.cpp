#include "apcbms/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "apcbms/rng.hpp"

namespace apcbms {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

}  // namespace

Prior1D Prior1D::uniform(double lower, double upper, std::string unit) {
    if (!(lower < upper)) {
        throw InvalidArgument("uniform prior requires lower < upper, got [" +
                              std::to_string(lower) + ", " + std::to_string(upper) + "]");
    }
    Prior1D p;
    p.kind_ = PriorKind::Uniform;
    p.lower_ = lower;
    p.upper_ = upper;
    p.unit_ = std::move(unit);
    return p;
}

Prior1D Prior1D::from_samples(std::vector<double> samples, std::string unit) {
    if (samples.size() < 4) {
        throw InvalidArgument("sample-set prior needs at least 4 samples, got " +
                              std::to_string(samples.size()));
    }
    for (double v : samples) {
        if (!std::isfinite(v)) throw InvalidArgument("sample-set prior contains a non-finite value");
    }
    Prior1D p;
    p.kind_ = PriorKind::SampleSet;
    p.samples_ = std::move(samples);
    p.unit_ = std::move(unit);
    const auto [lo, hi] = std::minmax_element(p.samples_.begin(), p.samples_.end());
    p.lower_ = *lo;
    p.upper_ = *hi;
    if (!(p.lower_ < p.upper_)) {
        throw InvalidArgument("sample-set prior is degenerate: all samples equal " +
                              std::to_string(p.lower_));
    }

    const double n = static_cast<double>(p.samples_.size());
    double mean = 0.0;
    for (double v : p.samples_) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : p.samples_) var += (v - mean) * (v - mean);
    var /= (n - 1.0);
    // Silverman's rule; bandwidth floored at a small fraction of the range
    // so degenerate clusters still yield a usable density.
    p.kde_bandwidth_ = std::max(1.06 * std::sqrt(var) * std::pow(n, -0.2),
                                1e-3 * (p.upper_ - p.lower_));
    double mass = 0.0;
    for (double v : p.samples_) {
        mass += std_normal_cdf((p.upper_ - v) / p.kde_bandwidth_) -
                std_normal_cdf((p.lower_ - v) / p.kde_bandwidth_);
    }
    p.kde_norm_ = mass / n;
    return p;
}

int Prior1D::max_moment_order() const {
    if (kind_ == PriorKind::Uniform) return std::numeric_limits<int>::max();
    return static_cast<int>(samples_.size()) - 2;
}

double Prior1D::raw_moment(int order) const {
    if (order < 0) throw InvalidArgument("moment order must be >= 0");
    if (order == 0) return 1.0;
    if (kind_ == PriorKind::Uniform) {
        // (b^{k+1} - a^{k+1}) / ((k+1)(b-a))
        const double k1 = static_cast<double>(order + 1);
        return (std::pow(upper_, order + 1) - std::pow(lower_, order + 1)) /
               (k1 * (upper_ - lower_));
    }
    if (order > max_moment_order()) {
        throw InvalidArgument("moment of order " + std::to_string(order) +
                              " is not estimable from " + std::to_string(samples_.size()) +
                              " samples (need at least order + 2)");
    }
    double acc = 0.0;
    for (double v : samples_) acc += std::pow(v, order);
    return acc / static_cast<double>(samples_.size());
}

double Prior1D::standardized_moment(int order) const {
    if (order < 0) throw InvalidArgument("moment order must be >= 0");
    if (order == 0) return 1.0;
    if (kind_ == PriorKind::Uniform) {
        // u ~ uniform[-1, 1]: odd moments vanish, even are 1/(k+1)
        if (order % 2 == 1) return 0.0;
        return 1.0 / static_cast<double>(order + 1);
    }
    if (order > max_moment_order()) {
        throw InvalidArgument("moment of order " + std::to_string(order) +
                              " is not estimable from " + std::to_string(samples_.size()) +
                              " samples (need at least order + 2)");
    }
    const double shift = std_shift();
    const double scale = std_scale();
    double acc = 0.0;
    for (double v : samples_) acc += std::pow((v - shift) / scale, order);
    return acc / static_cast<double>(samples_.size());
}

double Prior1D::density(double x) const {
    if (x < lower_ || x > upper_) return 0.0;
    if (kind_ == PriorKind::Uniform) return 1.0 / (upper_ - lower_);
    const double h = kde_bandwidth_;
    const double inv_norm = 0.39894228040143267794 / h;  // 1/(sqrt(2 pi) h)
    double acc = 0.0;
    for (double v : samples_) {
        const double z = (x - v) / h;
        acc += std::exp(-0.5 * z * z);
    }
    return acc * inv_norm / (static_cast<double>(samples_.size()) * kde_norm_);
}

double Prior1D::sample(Rng& rng) const {
    if (kind_ == PriorKind::Uniform) return rng.uniform(lower_, upper_);
    // bootstrap draw; keeps the empirical moments the surrogate basis uses
    return samples_[rng.index(samples_.size())];
}

ParameterSpace::ParameterSpace(std::vector<std::string> names, std::vector<Prior1D> priors)
    : names_(std::move(names)), priors_(std::move(priors)) {
    if (priors_.empty()) throw InvalidArgument("parameter space needs at least one parameter");
    if (names_.size() != priors_.size()) {
        throw InvalidArgument("parameter space: " + std::to_string(names_.size()) +
                              " names for " + std::to_string(priors_.size()) + " priors");
    }
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw InvalidArgument("parameter names must be non-empty");
        if (!seen.insert(n).second) throw InvalidArgument("duplicate parameter name: " + n);
    }
}

int ParameterSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return static_cast<int>(i);
    }
    return -1;
}

Matrix ParameterSpace::sample(int n, std::uint64_t seed) const {
    if (n < 1) throw InvalidArgument("sample count must be >= 1");
    Rng rng(seed);
    Matrix out(n, dimension());
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < dimension(); ++c) {
            out(r, c) = priors_[static_cast<std::size_t>(c)].sample(rng);
        }
    }
    return out;
}

double ParameterSpace::density(const Vector& point) const {
    if (point.size() != dimension()) {
        throw InvalidArgument("density: point has length " + std::to_string(point.size()) +
                              ", expected " + std::to_string(dimension()));
    }
    double d = 1.0;
    for (int i = 0; i < dimension(); ++i) {
        d *= priors_[static_cast<std::size_t>(i)].density(point(i));
        if (d == 0.0) return 0.0;
    }
    return d;
}

double ParameterSpace::log_density(const Vector& point) const {
    const double d = density(point);
    return d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
}

Vector ParameterSpace::mean() const {
    Vector m(dimension());
    for (int i = 0; i < dimension(); ++i) m(i) = priors_[static_cast<std::size_t>(i)].mean();
    return m;
}

}  // namespace apcbms
