#pragma once

#include <cstdint>
#include <string>

#include "rsl/constraints.hpp"
#include "rsl/symlib.hpp"

namespace rsl {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// One run's worth of knobs, grouped the way the config file sections are.
struct RunConfig {
    LibraryConfig library;
    ConstraintConfig constraints;

    // [policy]
    int hidden_width = 64;
    double init_range = 0.08;

    // [trainer]
    int n_size = 1300;
    int n_epoch = 32;
    int n_group = 2;
    int augment_factor = 13;
    double p1 = 0.025;
    double p2 = 0.04;
    double learning_rate = 5e-4;
    double entropy_coeff = 0.005;
    std::uint64_t seed = 0;
    std::string optimizer = "adam";  // or "sgd"
    double grad_clip = 5.0;
    double stop_r2 = 0.0;  // 0 disables early stop
    int restarts = 8;
    double restart_range = 10.0;
    int max_fit_iterations = 200;
    double fit_grad_tol = 1e-8;
    std::string target_transform = "log_life";  // or "raw"

    // [units]
    std::string units = "percent";  // or "fraction"

    void validate() const;  // throws ConfigError
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

// Canonical text with every field present; hashing this pins a run.
std::string render_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace rsl
