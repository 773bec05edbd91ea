#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rsl/symlib.hpp"

namespace rsl {

struct ConstraintConfig {
    int l = 10;        // function-node budget
    int n_const = 5;   // max constant placeholders
    int max_tokens = 41;  // hard sequence cap, default 4*l+1
    bool inss_enabled = true;
    bool cosm_enabled = true;
    bool felc_enabled = true;

    void validate() const;
};

// Per-open-function bookkeeping for the generation context. `remaining` is the
// arity-array entry; `all_const_leaf_children` stays true while every filled
// child of this frame was a bare constant leaf.
struct GenFrame {
    int remaining = 0;
    bool is_unary = false;
    bool all_const_leaf_children = true;
};

// Deterministic function of the prefix emitted so far; recomputable from
// scratch, which check_sequence uses as the oracle.
class GenContext {
public:
    GenContext() = default;

    void push_token(const Token& tok);
    static GenContext replay(std::span<const int> sequence, const Library& lib);

    bool complete() const { return tokens_emitted_ > 0 && frames_.empty(); }
    bool started() const { return tokens_emitted_ > 0; }
    int tokens_emitted() const { return tokens_emitted_; }
    int function_count() const { return function_count_; }
    int constant_count() const { return constant_count_; }
    int unary_depth() const { return unary_depth_; }
    const std::vector<GenFrame>& frames() const { return frames_; }

    int pending_total() const {
        int s = 0;
        for (const GenFrame& f : frames_) s += f.remaining;
        return s;
    }
    // minimum tokens still needed to close the tree; every non-root open frame
    // fills one slot of its parent on completion, so the naive pending sum
    // overcounts by frames-1
    int min_tokens_to_close() const {
        if (frames_.empty()) return 0;
        return pending_total() - static_cast<int>(frames_.size()) + 1;
    }
    bool stack_all_ones() const {
        if (frames_.empty()) return false;
        for (const GenFrame& f : frames_)
            if (f.remaining != 1) return false;
        return true;
    }
    int stack_top() const { return frames_.empty() ? 0 : frames_.back().remaining; }

    std::vector<int> arity_stack() const {
        std::vector<int> s;
        s.reserve(frames_.size());
        for (const GenFrame& f : frames_) s.push_back(f.remaining);
        return s;
    }

private:
    std::vector<GenFrame> frames_;
    int tokens_emitted_ = 0;
    int function_count_ = 0;
    int constant_count_ = 0;
    int unary_depth_ = 0;
};

constexpr double kMasked = -std::numeric_limits<double>::infinity();

// Additive mask over the library: 0 allowed, -inf forbidden. Never all-masked
// for a reachable context; an all-masked result throws (construction bug).
std::vector<double> prior_mask(const GenContext& ctx, const ConstraintConfig& cfg,
                               const Library& lib);

struct Unsatisfiable : std::logic_error {
    Unsatisfiable() : std::logic_error("prior_mask produced an all-forbidden mask") {}
};

enum class Violation {
    Incomplete,
    TrailingTokens,
    FunctionBudget,
    Felc,
    ConstantCap,
    Cosm,
    Inss,
    Closure,
};

std::string violation_name(Violation v);

// Post-hoc oracle: replays the context token by token and reports every
// constraint the mask would have blocked.
std::vector<Violation> check_sequence(std::span<const int> sequence, const ConstraintConfig& cfg,
                                      const Library& lib);

}  // namespace rsl
