#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rsl/symlib.hpp"

namespace rsl {

struct FitConfig {
    int restarts = 8;            // all-ones start plus restarts-1 uniform draws
    double restart_range = 10.0; // draws from U(-range, range)
    int max_iterations = 200;    // per optimizer stage
    double grad_tol = 1e-8;
    std::uint64_t seed = 0;      // combined with the structure hash per restart
    bool log_life = true;        // model output is ln(N_f); predictions exp()
    std::vector<double> extra_start;  // optional additional start point
};

struct FitResult {
    std::vector<double> constants;
    double rmse = std::numeric_limits<double>::infinity();  // cycles
    double r2 = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int n_restarts_used = 0;
};

// Predictions in cycle space for fixed constants (exp of the model output
// under the log-life transform). Non-finite entries stay NaN.
std::vector<double> predict_cycles(const Expression& expr, const Library& lib,
                                   std::span<const double> features, std::size_t n_samples,
                                   std::size_t n_features, bool log_life);

// Fits the constant placeholders of `structure` by minimizing RMSE between
// observed and predicted N_f. Staged least squares per restart: a log-life
// warmup conditions the problem, then the cycle-space polish; a direct
// cycle-space run from the raw start is kept as an alternative path and the
// best final point wins. Restart start points are the spec protocol
// (all-ones, then uniform draws seeded by the structure and cfg.seed).
// Throws std::invalid_argument on empty data. All restarts non-finite =>
// rmse stays +inf (the caller treats the candidate as reward -inf).
FitResult fit_constants(const Expression& structure, const Library& lib,
                        std::span<const double> features, std::size_t n_samples,
                        std::size_t n_features, std::span<const double> target_cycles,
                        const FitConfig& cfg);

double rmse_cycles(std::span<const double> observed, std::span<const double> predicted);
double r2_cycles(std::span<const double> observed, std::span<const double> predicted);

}  // namespace rsl
