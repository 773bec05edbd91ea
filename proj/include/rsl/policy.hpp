#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsl/constraints.hpp"
#include "rsl/rng.hpp"
#include "rsl/symlib.hpp"

namespace rsl {

// Single gated recurrent cell (GRU) of width H plus an output projection to
// library logits. Stored flat; layout documented next to the accessors.
struct PolicyParams {
    int hidden = 64;
    int input_dim = 0;   // |library| + 1 + 3 + 1
    int n_tokens = 0;

    // gate order: z, r, n stacked along rows
    std::vector<double> w_in;    // 3H x D
    std::vector<double> w_rec;   // 3H x H
    std::vector<double> b_gate;  // 3H
    std::vector<double> w_out;   // L x H
    std::vector<double> b_out;   // L

    static PolicyParams init(const Library& lib, int hidden, std::uint64_t seed,
                             double init_range = 0.08);

    std::size_t parameter_count() const;
    // flattened view in a fixed order (w_in, w_rec, b_gate, w_out, b_out)
    double& flat(std::size_t i);
    double flat(std::size_t i) const;

    void save(const std::string& path) const;
    static PolicyParams load(const std::string& path, const Library& lib);
};

// Gradient accumulator with the same flat layout as PolicyParams.
struct PolicyGrad {
    std::vector<double> g;
    explicit PolicyGrad(const PolicyParams& p) : g(p.parameter_count(), 0.0) {}
    void scale(double s) {
        for (double& v : g) v *= s;
    }
    double global_norm() const;
};

// RNN memory between steps.
struct StepState {
    std::vector<double> hidden;  // H, zeros at the start of a sequence
    int prev_token = -1;
};

// Elite-derived categorical distribution over first tokens.
struct FirstTokenDist {
    std::vector<double> p;
    static FirstTokenDist uniform(const Library& lib, const ConstraintConfig& cfg);
};

// Empirical first-token frequency over elite sequences with additive
// smoothing alpha = 0.5 across the legal first tokens; uniform when empty.
FirstTokenDist update_first_token_dist(const std::vector<std::vector<int>>& elite_sequences,
                                       const Library& lib, const ConstraintConfig& cfg,
                                       double alpha = 0.5);

// Step input encoding: one-hot prev token, then [ (l-fc)/l,
// one-hot(min(top-of-stack,3)), (N_const-cc)/N_const ].
std::vector<double> encode_step_input(int prev_token, const GenContext& ctx,
                                      const ConstraintConfig& cfg, const Library& lib);

// Deterministic forward pass; logits are finite for finite inputs.
void policy_step(const PolicyParams& params, const std::vector<double>& x,
                 const std::vector<double>& h_in, std::vector<double>& h_out,
                 std::vector<double>& logits);

// log softmax(logits + mask) probabilities; masked entries are exactly zero.
std::vector<double> masked_softmax(const std::vector<double>& logits,
                                   const std::vector<double>& mask);

struct SampledSequence {
    std::vector<int> sequence;
    double log_prob = 0.0;
    std::vector<double> per_step_logprob;
};

struct ResampleExhausted : std::runtime_error {
    ResampleExhausted() : std::runtime_error("sampling failed post-hoc validation 100 times") {}
};

// First token from first_dist restricted by the prior mask; each later token
// from softmax(logits + mask). Finished sequences are validated with
// check_sequence and resampled on the (by construction unreachable) failure.
SampledSequence sample_sequence(const PolicyParams& params, const Library& lib,
                                const ConstraintConfig& cfg, const FirstTokenDist& first_dist,
                                Rng& rng);

// Exact gradient of sum_t log pi(a_t | s_t) over the parameterized steps
// (everything after the first token). Backpropagates through every recurrent
// step. Returns the log-prob of the parameterized part.
double sequence_logprob_and_grad(const PolicyParams& params, const std::vector<int>& sequence,
                                 const Library& lib, const ConstraintConfig& cfg,
                                 PolicyGrad& grad, double advantage = 1.0,
                                 double entropy_coeff = 0.0);

// Forward-only log-prob of the full sequence under (params, first_dist).
double sequence_logprob(const PolicyParams& params, const std::vector<int>& sequence,
                        const Library& lib, const ConstraintConfig& cfg,
                        const FirstTokenDist& first_dist);

}  // namespace rsl
