#include "rsl/constraints.hpp"

#include <limits>

namespace rsl {

void ConstraintConfig::validate() const {
    if (l < 1) throw std::invalid_argument("constraints: l must be >= 1");
    if (n_const < 0) throw std::invalid_argument("constraints: n_const must be >= 0");
    if (max_tokens < 2 * l + 1)
        throw std::invalid_argument("constraints: max_tokens must be >= 2*l+1");
}

void GenContext::push_token(const Token& tok) {
    if (complete()) throw AppendAfterComplete();
    ++tokens_emitted_;
    if (tok.arity > 0) {
        ++function_count_;
        if (tok.kind == TokenKind::UnaryOp) ++unary_depth_;
        frames_.push_back({tok.arity, tok.kind == TokenKind::UnaryOp, true});
        return;
    }
    if (tok.kind == TokenKind::ConstantPlaceholder) ++constant_count_;
    if (frames_.empty()) return;  // single-token expression
    GenFrame& top = frames_.back();
    --top.remaining;
    if (tok.kind != TokenKind::ConstantPlaceholder) top.all_const_leaf_children = false;
    while (!frames_.empty() && frames_.back().remaining == 0) {
        bool was_unary = frames_.back().is_unary;
        frames_.pop_back();
        if (was_unary) --unary_depth_;
        if (!frames_.empty()) {
            GenFrame& parent = frames_.back();
            --parent.remaining;
            parent.all_const_leaf_children = false;  // child was a subtree, not a C leaf
        }
    }
}

GenContext GenContext::replay(std::span<const int> sequence, const Library& lib) {
    GenContext ctx;
    for (int id : sequence) ctx.push_token(lib.token(id));
    return ctx;
}

std::vector<double> prior_mask(const GenContext& ctx, const ConstraintConfig& cfg,
                               const Library& lib) {
    std::vector<double> mask(static_cast<std::size_t>(lib.size()), 0.0);

    const bool budget_full = ctx.function_count() >= cfg.l;
    const bool felc = cfg.felc_enabled && ctx.stack_all_ones() && ctx.function_count() < cfg.l;
    const bool cosm_risk = cfg.cosm_enabled && !ctx.frames().empty() &&
                           ctx.frames().back().remaining == 1 &&
                           ctx.frames().back().all_const_leaf_children;
    const int min_close = ctx.min_tokens_to_close();
    const int emitted = ctx.tokens_emitted();

    bool any_allowed = false;
    for (const Token& tok : lib.tokens()) {
        double& m = mask[static_cast<std::size_t>(tok.id)];
        if (tok.arity > 0) {
            if (budget_full) m = kMasked;
            if (cfg.inss_enabled && tok.kind == TokenKind::UnaryOp && ctx.unary_depth() > 0)
                m = kMasked;
            // closure: placing this function must still leave room to finish;
            // a unary keeps min-close, a binary grows it by one
            int after = ctx.started() ? min_close + tok.arity - 1 : tok.arity;
            if (emitted + 1 + after > cfg.max_tokens) m = kMasked;
        } else {
            if (felc) m = kMasked;
            if (tok.kind == TokenKind::ConstantPlaceholder) {
                if (ctx.constant_count() >= cfg.n_const) m = kMasked;
                if (cosm_risk) m = kMasked;
            }
            if (emitted + 1 + (min_close > 0 ? min_close - 1 : 0) > cfg.max_tokens) m = kMasked;
        }
        any_allowed |= m == 0.0;
    }
    if (!any_allowed) throw Unsatisfiable();
    return mask;
}

std::string violation_name(Violation v) {
    switch (v) {
        case Violation::Incomplete: return "incomplete";
        case Violation::TrailingTokens: return "trailing_tokens";
        case Violation::FunctionBudget: return "function_budget";
        case Violation::Felc: return "felc";
        case Violation::ConstantCap: return "constant_cap";
        case Violation::Cosm: return "cosm";
        case Violation::Inss: return "inss";
        case Violation::Closure: return "closure";
    }
    return "?";
}

std::vector<Violation> check_sequence(std::span<const int> sequence, const ConstraintConfig& cfg,
                                      const Library& lib) {
    std::vector<Violation> out;
    Tree tree = decode(sequence, lib);
    if (tree.status == DecodeStatus::IncompleteExpression) out.push_back(Violation::Incomplete);
    if (tree.status == DecodeStatus::TrailingTokens) out.push_back(Violation::TrailingTokens);
    if (tree.status == DecodeStatus::UnknownToken) {
        out.push_back(Violation::TrailingTokens);
        return out;
    }

    GenContext ctx;
    for (int id : sequence) {
        if (ctx.complete()) break;  // trailing tokens already reported
        const Token& tok = lib.token(id);
        const bool is_fn = tok.arity > 0;
        if (is_fn && ctx.function_count() >= cfg.l) out.push_back(Violation::FunctionBudget);
        if (!is_fn && cfg.felc_enabled && ctx.stack_all_ones() && ctx.function_count() < cfg.l)
            out.push_back(Violation::Felc);
        if (cfg.inss_enabled && tok.kind == TokenKind::UnaryOp && ctx.unary_depth() > 0)
            out.push_back(Violation::Inss);
        if (tok.kind == TokenKind::ConstantPlaceholder) {
            if (ctx.constant_count() >= cfg.n_const) out.push_back(Violation::ConstantCap);
            if (cfg.cosm_enabled && !ctx.frames().empty() && ctx.frames().back().remaining == 1 &&
                ctx.frames().back().all_const_leaf_children)
                out.push_back(Violation::Cosm);
        }
        const int mc = ctx.min_tokens_to_close();
        const int after = is_fn ? (ctx.started() ? mc + tok.arity - 1 : tok.arity)
                                : (mc > 0 ? mc - 1 : 0);
        if (ctx.tokens_emitted() + 1 + after > cfg.max_tokens)
            out.push_back(Violation::Closure);
        ctx.push_token(tok);
    }
    return out;
}

}  // namespace rsl
