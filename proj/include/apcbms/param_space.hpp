#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apcbms/types.hpp"

namespace apcbms {

enum class PriorKind { Uniform, SampleSet };

/// One-dimensional marginal prior. Either a uniform distribution on
/// [lower, upper] or a data-driven prior backed by a user-supplied sample
/// set. All moment-based machinery downstream only ever talks to this
/// class through raw_moment(), sampling and density evaluation.
class Prior1D {
public:
    static Prior1D uniform(double lower, double upper, std::string unit = {});
    static Prior1D from_samples(std::vector<double> samples, std::string unit = {});

    PriorKind kind() const { return kind_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    const std::string& unit() const { return unit_; }
    const std::vector<double>& samples() const { return samples_; }

    // Raw moment E[x^k] of the original (untransformed) variable.
    // Uniform priors use the closed form, sample sets the empirical mean.
    // For sample sets the order is capped so that at least two more samples
    // than the order are available.
    double raw_moment(int order) const;

    // Highest raw-moment order this prior can provide.
    int max_moment_order() const;

    double mean() const { return raw_moment(1); }

    // Marginal density; 0 outside [lower, upper]. Sample sets use a
    // boundary-renormalized Gaussian KDE with Silverman bandwidth so the
    // density integrates to 1 over the support.
    double density(double x) const;

    double sample(class Rng& rng) const;

    // Affine standardization x -> (x - shift) / scale mapping the support
    // into [-1, 1]; basis construction happens in this variable to keep
    // the Hankel systems well conditioned.
    double std_shift() const { return 0.5 * (lower_ + upper_); }
    double std_scale() const { return 0.5 * (upper_ - lower_); }

    // Raw moment of the standardized variable u = (x - shift) / scale.
    double standardized_moment(int order) const;

private:
    Prior1D() = default;

    PriorKind kind_ = PriorKind::Uniform;
    double lower_ = 0.0;
    double upper_ = 1.0;
    std::string unit_;
    std::vector<double> samples_;      // sorted not required; kept as given
    double kde_bandwidth_ = 0.0;       // Silverman bandwidth (sample sets)
    double kde_norm_ = 1.0;            // mass of the KDE inside the support
};

/// Joint prior over independent parameters. Provides sampling, density
/// evaluation and the per-parameter moments used by basis construction.
class ParameterSpace {
public:
    ParameterSpace(std::vector<std::string> names, std::vector<Prior1D> priors);

    int dimension() const { return static_cast<int>(priors_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const Prior1D& prior(int i) const { return priors_.at(static_cast<std::size_t>(i)); }
    int index_of(const std::string& name) const;  // -1 when absent

    // n x N_p matrix of i.i.d. prior draws; deterministic for a fixed seed.
    Matrix sample(int n, std::uint64_t seed) const;

    // Product of marginal densities; 0 outside the joint support.
    double density(const Vector& point) const;
    double log_density(const Vector& point) const;

    Vector mean() const;

private:
    std::vector<std::string> names_;
    std::vector<Prior1D> priors_;
};

}  // namespace apcbms
