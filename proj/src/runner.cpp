#include "apcbms/runner.hpp"

#include <sys/types.h>
#include <sys/wait.h>
#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "apcbms/toy_models.hpp"

namespace apcbms {

namespace {

namespace fs = std::filesystem;

// shortest round-trippable decimal representation; used for cache keys so
// equal doubles always produce equal keys
std::string format_shortest(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& token, double& out) {
    const char* begin = token.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    return std::isfinite(out) || out == HUGE_VAL || out == -HUGE_VAL ? std::isfinite(out) : false;
}

struct RunResult {
    int exit_code = -1;
    bool timed_out = false;
};

RunResult run_command(const std::string& command, const std::string& workdir,
                      double timeout_seconds) {
    const pid_t pid = fork();
    if (pid < 0) throw IoError("fork failed");
    if (pid == 0) {
        if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(127);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    RunResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_seconds > 0 ? timeout_seconds : 1e9);
    int status = 0;
    while (true) {
        const pid_t r = waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0) throw IoError("waitpid failed");
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            result.timed_out = true;
            return result;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else {
        result.exit_code = -1;
    }
    return result;
}

}  // namespace

ModelRunner::ModelRunner(ParameterSpace space, OutputGrid grid, std::string cache_dir)
    : space_(std::move(space)), grid_(std::move(grid)), cache_dir_(std::move(cache_dir)) {
    if (!cache_dir_.empty()) fs::create_directories(cache_dir_);
    register_toy_models(*this);
}

void ModelRunner::register_builtin(const std::string& name, BuiltinModel fn) {
    builtins_[name] = std::move(fn);
}

bool ModelRunner::has_builtin(const std::string& name) const { return builtins_.count(name) > 0; }

void ModelRunner::validate_spec(const ModelSpec& spec) const {
    if (spec.id.empty()) throw InvalidArgument("model id must be non-empty");
    if (spec.parameters.empty()) {
        throw InvalidArgument("model '" + spec.id + "' consumes no parameters");
    }
    for (const auto& name : spec.parameters) {
        if (space_.index_of(name) < 0) {
            throw InvalidArgument("model '" + spec.id + "' references unknown parameter '" + name +
                                  "'");
        }
    }
    if (spec.kind == ModelKind::BuiltinToy) {
        if (!has_builtin(spec.builtin)) {
            throw InvalidArgument("model '" + spec.id + "' references unknown builtin '" +
                                  spec.builtin + "'");
        }
    } else {
        if (spec.command.empty()) {
            throw InvalidArgument("external model '" + spec.id + "' has an empty command");
        }
        if (spec.timeout_seconds < 0) {
            throw InvalidArgument("model '" + spec.id + "' has a negative timeout");
        }
    }
}

std::string ModelRunner::cache_key(const ModelSpec& spec, const Vector& point) const {
    std::ostringstream os;
    bool first = true;
    for (const auto& name : spec.parameters) {
        const int idx = space_.index_of(name);
        if (!first) os << ";";
        first = false;
        os << name << "=" << format_shortest(point(idx));
    }
    return os.str();
}

std::string ModelRunner::cache_file(const std::string& model_id) const {
    return (fs::path(cache_dir_) / (model_id + ".jsonl")).string();
}

void ModelRunner::load_cache(const std::string& model_id) {
    if (cache_loaded_[model_id]) return;
    cache_loaded_[model_id] = true;
    if (cache_dir_.empty()) return;
    std::ifstream in(cache_file(model_id));
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) continue;  // torn tail write; ignore
        const auto values = doc.at("outputs").get<std::vector<double>>();
        Vector v(static_cast<int>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<int>(i)) = values[i];
        cache_[model_id][doc.at("key").get<std::string>()] = CacheEntry{std::move(v)};
    }
}

void ModelRunner::store_cache(const ModelSpec& spec, const std::string& key, const Vector& outputs) {
    cache_[spec.id][key] = CacheEntry{outputs};
    if (cache_dir_.empty()) return;
    nlohmann::json doc;
    doc["key"] = key;
    std::vector<double> values(outputs.data(), outputs.data() + outputs.size());
    doc["outputs"] = values;
    std::ofstream out(cache_file(spec.id), std::ios::app);
    out << doc.dump() << "\n";
}

Vector ModelRunner::run_once(const ModelSpec& spec, const Vector& point) const {
    if (spec.kind == ModelKind::BuiltinToy) {
        auto it = builtins_.find(spec.builtin);
        if (it == builtins_.end()) throw IoError("unknown builtin '" + spec.builtin + "'");
        std::map<std::string, double> params;
        for (const auto& name : spec.parameters) params[name] = point(space_.index_of(name));
        Vector out = it->second(params, grid_);
        if (out.size() != grid_.size()) {
            throw IoError("builtin '" + spec.builtin + "' produced " + std::to_string(out.size()) +
                          " values, expected " + std::to_string(grid_.size()));
        }
        if (!out.allFinite()) throw IoError("builtin '" + spec.builtin + "' produced non-finite values");
        return out;
    }
    return run_external(spec, point);
}

Vector ModelRunner::run_external(const ModelSpec& spec, const Vector& point) const {
    std::uint64_t serial = 0;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        serial = scratch_counter_++;
    }
    const fs::path scratch = fs::temp_directory_path();
    const std::string stem = "apcbms-" + std::to_string(::getpid()) + "-" + std::to_string(serial);
    const fs::path param_file = scratch / (stem + "-params.txt");
    const fs::path output_file = scratch / (stem + "-output.txt");

    {
        std::ofstream pf(param_file);
        if (!pf) throw IoError("cannot write parameter file " + param_file.string());
        for (const auto& name : spec.parameters) {
            pf << name << "=" << format_shortest(point(space_.index_of(name))) << "\n";
        }
    }

    std::string command = spec.command;
    const auto substitute = [&command](const std::string& placeholder, const std::string& value) {
        bool replaced = false;
        std::size_t pos = 0;
        while ((pos = command.find(placeholder, pos)) != std::string::npos) {
            command.replace(pos, placeholder.size(), value);
            pos += value.size();
            replaced = true;
        }
        return replaced;
    };
    const bool has_params = substitute("{params}", param_file.string());
    const bool has_output = substitute("{output}", output_file.string());
    if (!has_params || !has_output) {
        command += " " + param_file.string() + " " + output_file.string();
    }

    struct Cleanup {
        const fs::path& a;
        const fs::path& b;
        ~Cleanup() {
            std::error_code ec;
            fs::remove(a, ec);
            fs::remove(b, ec);
        }
    } cleanup{param_file, output_file};

    const RunResult run = run_command(command, spec.workdir, spec.timeout_seconds);
    if (run.timed_out) {
        throw IoError("command timed out after " + format_shortest(spec.timeout_seconds) + " s");
    }
    if (run.exit_code != 0) {
        throw IoError("command exited with status " + std::to_string(run.exit_code));
    }

    std::ifstream in(output_file);
    if (!in) throw IoError("command wrote no output file");
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        double v = 0.0;
        if (!parse_double(line, v)) {
            throw IoError("unparsable output value at line " + std::to_string(line_no) + ": '" +
                          line + "'");
        }
        values.push_back(v);
    }
    if (static_cast<int>(values.size()) != grid_.size()) {
        throw IoError("command wrote " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(grid_.size()));
    }
    Vector out(grid_.size());
    for (int i = 0; i < grid_.size(); ++i) out(i) = values[static_cast<std::size_t>(i)];
    return out;
}

std::vector<EvaluationRecord> ModelRunner::evaluate_batch(const ModelSpec& spec,
                                                          const Matrix& points, int parallelism) {
    validate_spec(spec);
    if (parallelism < 1) throw InvalidArgument("parallelism must be >= 1");
    if (points.cols() != space_.dimension()) {
        throw InvalidArgument("points must have one column per parameter");
    }

    const int n = static_cast<int>(points.rows());
    std::vector<EvaluationRecord> records(static_cast<std::size_t>(n));
    // key -> indices sharing that evaluation; preserves one execution per
    // distinct canonical parameter vector
    std::map<std::string, std::vector<int>> pending;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        load_cache(spec.id);
        for (int i = 0; i < n; ++i) {
            auto& rec = records[static_cast<std::size_t>(i)];
            rec.model_id = spec.id;
            rec.parameters = points.row(i).transpose();
            const std::string key = cache_key(spec, rec.parameters);
            const auto& model_cache = cache_[spec.id];
            auto hit = model_cache.find(key);
            if (hit != model_cache.end()) {
                rec.outputs = hit->second.outputs;
                rec.ok = true;
                rec.from_cache = true;
            } else {
                pending[key].push_back(i);
            }
        }
    }

    std::vector<const std::pair<const std::string, std::vector<int>>*> jobs;
    jobs.reserve(pending.size());
    for (const auto& kv : pending) jobs.push_back(&kv);

    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(jobs.size())));
    auto work = [&]() {
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) break;
            const auto& [key, indices] = *jobs[j];
            const Vector point = records[static_cast<std::size_t>(indices.front())].parameters;
            const auto start = std::chrono::steady_clock::now();
            Vector outputs;
            std::string error;
            bool ok = true;
            try {
                outputs = run_once(spec, point);
            } catch (const std::exception& e) {
                ok = false;
                error = e.what();
            }
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (ok) {
                std::lock_guard<std::mutex> lock(mutex_);
                store_cache(spec, key, outputs);
                ++fresh_executions_;
            }
            for (int idx : indices) {
                auto& rec = records[static_cast<std::size_t>(idx)];
                rec.wall_seconds = wall;
                rec.ok = ok;
                rec.from_cache = false;
                if (ok) {
                    rec.outputs = outputs;
                } else {
                    rec.error = error;
                }
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return records;
}

Vector ModelRunner::evaluate_point(const ModelSpec& spec, const Vector& point, int parallelism) {
    Matrix m(1, point.size());
    m.row(0) = point.transpose();
    auto records = evaluate_batch(spec, m, parallelism);
    if (!records.front().ok) {
        throw IoError("model '" + spec.id + "' failed: " + records.front().error);
    }
    return records.front().outputs;
}

ObservationSet read_observations(const std::string& path, const std::string& quantity) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open observation file " + path);
    std::vector<OutputCoord> coords;
    std::vector<double> values;
    std::vector<double> sigmas;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.size() != 3 && tokens.size() != 4) {
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": expected 'space time value [sigma]', got " +
                          std::to_string(tokens.size()) + " fields");
        }
        double value = 0.0;
        if (!parse_double(tokens[2], value)) {
            throw IoError(path + ":" + std::to_string(line_no) + ": non-numeric measurement '" +
                          tokens[2] + "'");
        }
        double sigma = 0.0;
        if (tokens.size() == 4) {
            if (!parse_double(tokens[3], sigma) || sigma <= 0.0) {
                throw IoError(path + ":" + std::to_string(line_no) + ": invalid sigma '" +
                              tokens[3] + "'");
            }
        } else {
            if (value == 0.0) {
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": zero measurement needs an explicit sigma (the default 20% rule "
                              "would give zero error)");
            }
            sigma = 0.20 * std::abs(value);
        }
        coords.push_back({tokens[0], tokens[1], quantity});
        values.push_back(value);
        sigmas.push_back(sigma);
    }
    if (coords.empty()) throw IoError(path + ": no measurements found");

    ObservationSet set;
    set.grid = OutputGrid(std::move(coords));
    set.values = Eigen::Map<Vector>(values.data(), static_cast<int>(values.size()));
    set.sigma = Eigen::Map<Vector>(sigmas.data(), static_cast<int>(sigmas.size()));
    return set;
}

ObservationSet merge_observations(const std::vector<ObservationSet>& sets) {
    std::vector<OutputCoord> coords;
    std::vector<double> values;
    std::vector<double> sigmas;
    for (const auto& s : sets) {
        for (int i = 0; i < s.size(); ++i) {
            coords.push_back(s.grid.coord(i));
            values.push_back(s.values(i));
            sigmas.push_back(s.sigma(i));
        }
    }
    ObservationSet merged;
    merged.grid = OutputGrid(std::move(coords));
    merged.values = Eigen::Map<Vector>(values.data(), static_cast<int>(values.size()));
    merged.sigma = Eigen::Map<Vector>(sigmas.data(), static_cast<int>(sigmas.size()));
    return merged;
}

void register_toy_models(ModelRunner& runner) {
    runner.register_builtin("toy-fc", toys::toy_fc);
    runner.register_builtin("toy-ib", toys::toy_ib);
    runner.register_builtin("toy-sc", toys::toy_sc);
}

}  // namespace apcbms
