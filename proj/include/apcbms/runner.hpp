#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "apcbms/observations.hpp"
#include "apcbms/param_space.hpp"
#include "apcbms/types.hpp"

namespace apcbms {

enum class ModelKind { ExternalCommand, BuiltinToy };

/// Description of one competing model. External commands receive a
/// parameter file (name=value lines, consumed parameters only) and must
/// write one output value per line in output-grid order.
struct ModelSpec {
    std::string id;
    ModelKind kind = ModelKind::BuiltinToy;
    // Parameters the model consumes, a subset of the space (e.g. the
    // initial-biofilm analogue uses only rho_f and k_ub).
    std::vector<std::string> parameters;
    std::string builtin;            // registry name for builtin models
    std::string command;            // template; {params} / {output} placeholders
    std::string workdir;            // optional cwd for the command
    double timeout_seconds = 0.0;   // 0 = no timeout
};

struct EvaluationRecord {
    std::string model_id;
    Vector parameters;      // full-space parameter vector
    Vector outputs;         // length N_out when ok
    double wall_seconds = 0.0;
    bool from_cache = false;
    bool ok = false;
    std::string error;
};

// Builtin models map named parameter values to one output per grid
// coordinate. Throwing is reported as a per-point failure.
using BuiltinModel =
    std::function<Vector(const std::map<std::string, double>& params, const OutputGrid& grid)>;

/// Uniform front end to the competing models: dispatches batches with a
/// worker pool, isolates per-point failures, and caches every successful
/// evaluation in an append-only JSON-lines file per model.
class ModelRunner {
public:
    // cache_dir empty disables on-disk persistence (in-memory cache only).
    ModelRunner(ParameterSpace space, OutputGrid grid, std::string cache_dir);

    const ParameterSpace& space() const { return space_; }
    const OutputGrid& grid() const { return grid_; }

    void register_builtin(const std::string& name, BuiltinModel fn);
    bool has_builtin(const std::string& name) const;

    // Validates that the consumed parameter names exist in the space and
    // the builtin name (when applicable) is registered.
    void validate_spec(const ModelSpec& spec) const;

    std::vector<EvaluationRecord> evaluate_batch(const ModelSpec& spec, const Matrix& points,
                                                 int parallelism);

    // Single-point convenience; throws IoError when the evaluation failed.
    Vector evaluate_point(const ModelSpec& spec, const Vector& point, int parallelism = 1);

    // Cache statistics for tests and the manifest.
    std::size_t fresh_executions() const { return fresh_executions_; }

private:
    struct CacheEntry {
        Vector outputs;
    };

    std::string cache_key(const ModelSpec& spec, const Vector& point) const;
    std::string cache_file(const std::string& model_id) const;
    void load_cache(const std::string& model_id);
    void store_cache(const ModelSpec& spec, const std::string& key, const Vector& outputs);
    Vector run_once(const ModelSpec& spec, const Vector& point) const;
    Vector run_external(const ModelSpec& spec, const Vector& point) const;

    ParameterSpace space_;
    OutputGrid grid_;
    std::string cache_dir_;
    std::map<std::string, BuiltinModel> builtins_;
    std::map<std::string, std::map<std::string, CacheEntry>> cache_;  // model id -> key -> entry
    std::map<std::string, bool> cache_loaded_;
    mutable std::mutex mutex_;
    std::size_t fresh_executions_ = 0;
    mutable std::uint64_t scratch_counter_ = 0;
};

// Parses one observation file for one quantity. Lines are
// `space_label time_label value [sigma]`, '#' starts a comment. Without an
// explicit sigma the 20% measurement-error rule applies; a zero measurement
// then raises an error demanding an explicit sigma.
ObservationSet read_observations(const std::string& path, const std::string& quantity);

// Concatenates per-quantity observation sets into the full analysis grid.
ObservationSet merge_observations(const std::vector<ObservationSet>& sets);

// Registers the builtin toy set (toy-fc, toy-ib, toy-sc) on a runner.
void register_toy_models(ModelRunner& runner);

}  // namespace apcbms
