#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rsl/config.hpp"
#include "rsl/constfit.hpp"
#include "rsl/dataio.hpp"
#include "rsl/policy.hpp"

namespace rsl {

struct Candidate {
    Expression expression;  // constants filled after fitting
    double rmse = std::numeric_limits<double>::infinity();
    double r2 = -std::numeric_limits<double>::infinity();
    double reward = -std::numeric_limits<double>::infinity();  // -rmse, or -inf when non-finite
    double log_prob = 0.0;
};

class HallOfFame {
public:
    explicit HallOfFame(std::size_t capacity = 20) : capacity_(capacity) {}
    void add(const Candidate& c, const Library& lib);
    const std::vector<Candidate>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    const Candidate& best() const { return entries_.front(); }

private:
    std::size_t capacity_;
    std::vector<Candidate> entries_;          // reward descending
    std::vector<std::string> rendered_keys_;  // parallel to entries_
};

struct EpochStats {
    int epoch = 0;
    std::size_t batch_size = 0;
    std::size_t n_elite = 0;
    double best_rmse = 0;
    double mean_elite_rmse = 0;
    double best_r2 = 0;
    std::string best_expression;
};

struct SearchResult {
    HallOfFame hall_of_fame;
    std::vector<EpochStats> stats;
};

std::size_t elite_count(std::size_t batch_size, double p);

// Sorted elite indices for a batch: reward descending, ties broken by token
// count then serialized text then slot index. Non-finite rewards never make
// the cut even if that leaves fewer than the nominal count.
std::vector<std::size_t> select_elites(const std::vector<Candidate>& batch, const Library& lib,
                                       std::size_t count);

class Trainer {
public:
    Trainer(const RunConfig& cfg, std::vector<DimensionlessSample> data, int threads = 1);

    // Samples and fits one batch; returns candidates in slot order.
    std::vector<Candidate> sample_batch(int epoch_index, std::size_t batch_size);

    // Risk-seeking update on the elite tail: mean over elites of
    // (R_i - R_min) * grad log pi(seq_i) plus the entropy bonus, clipped to
    // the configured global norm, then one optimizer step.
    void policy_update(const std::vector<Candidate>& batch,
                       const std::vector<std::size_t>& elites);

    struct EpochOutcome {
        std::vector<std::size_t> elites;
        EpochStats stats;
    };
    EpochOutcome run_epoch(int epoch_index);

    SearchResult run_search(const std::function<void(const EpochStats&)>& on_epoch = {});

    const PolicyParams& params() const { return params_; }
    PolicyParams& mutable_params() { return params_; }
    const FirstTokenDist& first_dist() const { return first_; }
    const Library& library() const { return lib_; }
    const HallOfFame& hall_of_fame() const { return hof_; }
    FitConfig fit_config() const;

private:
    RunConfig cfg_;
    Library lib_;
    std::vector<DimensionlessSample> data_;
    std::vector<double> features_, targets_;
    int threads_;
    PolicyParams params_;
    FirstTokenDist first_;
    HallOfFame hof_;
    // adam state
    std::vector<double> adam_m_, adam_v_;
    long adam_t_ = 0;
    std::vector<Candidate> last_batch_;
};

// The generalization workflow: keep the structure, refit its constants on a
// different condition's data. Validates the structure against the budget
// caps (decode, function and constant budgets).
FitResult refit_structure(const Expression& structure, const Library& lib,
                          std::span<const DimensionlessSample> data, const RunConfig& cfg);

std::string stats_csv(std::span<const EpochStats> stats);

}  // namespace rsl
