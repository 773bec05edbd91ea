#include "rsl/symlib.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <utility>

namespace rsl {

void Library::add(TokenKind kind, const std::string& symbol) {
    Token t;
    t.id = static_cast<int>(tokens_.size());
    t.kind = kind;
    t.symbol = symbol;
    t.arity = kind == TokenKind::BinaryOp ? 2 : kind == TokenKind::UnaryOp ? 1 : 0;
    if (kind == TokenKind::Variable) {
        var_index_.push_back(variable_count_++);
    } else {
        var_index_.push_back(-1);
    }
    if (kind == TokenKind::ConstantPlaceholder) constant_id_ = t.id;
    for (const Token& prev : tokens_)
        if (prev.symbol == symbol) throw std::invalid_argument("duplicate token symbol: " + symbol);
    tokens_.push_back(std::move(t));
}

void Library::validate() const {
    bool any_binary = false, any_var = false;
    for (const Token& t : tokens_) {
        any_binary |= t.kind == TokenKind::BinaryOp;
        any_var |= t.kind == TokenKind::Variable;
    }
    if (!any_binary || !any_var)
        throw std::invalid_argument("library needs at least one binary op and one variable");
}

Library Library::standard(const LibraryConfig& cfg) {
    Library lib;
    if (cfg.op_add) lib.add(TokenKind::BinaryOp, "add");
    if (cfg.op_sub) lib.add(TokenKind::BinaryOp, "sub");
    if (cfg.op_mul) lib.add(TokenKind::BinaryOp, "mul");
    if (cfg.op_div) lib.add(TokenKind::BinaryOp, "div");
    if (cfg.op_ln) lib.add(TokenKind::UnaryOp, "ln");
    if (cfg.op_exp) lib.add(TokenKind::UnaryOp, "exp");
    if (cfg.op_sqrt) lib.add(TokenKind::UnaryOp, "sqrt");
    if (cfg.op_square) lib.add(TokenKind::UnaryOp, "square");
    lib.add(TokenKind::Variable, "eps_a");
    lib.add(TokenKind::Variable, "gamma_a");
    lib.add(TokenKind::Variable, "sigma_over_E");
    lib.add(TokenKind::Variable, "tau_over_G");
    lib.add(TokenKind::ConstantPlaceholder, "C");
    lib.validate();
    return lib;
}

int Library::find(const std::string& symbol) const {
    for (const Token& t : tokens_)
        if (t.symbol == symbol) return t.id;
    return -1;
}

void arity_update(ArityState& state, const Token& tok) {
    if (state.complete()) throw AppendAfterComplete();
    ++state.tokens_emitted;
    if (tok.arity > 0) {
        state.stack.push_back(tok.arity);
        ++state.function_count;
        return;
    }
    if (tok.kind == TokenKind::ConstantPlaceholder) ++state.constant_count;
    // terminal fills the innermost slot; completed subtrees cascade upward
    if (state.stack.empty()) return;  // single-token expression
    --state.stack.back();
    while (!state.stack.empty() && state.stack.back() == 0) {
        state.stack.pop_back();
        if (!state.stack.empty()) --state.stack.back();
    }
}

Tree decode(std::span<const int> sequence, const Library& lib) {
    Tree tree;
    if (sequence.empty()) {
        tree.status = DecodeStatus::IncompleteExpression;
        return tree;
    }
    for (int id : sequence) {
        if (id < 0 || id >= lib.size()) {
            tree.status = DecodeStatus::UnknownToken;
            return tree;
        }
    }
    tree.nodes.reserve(sequence.size());
    std::vector<int> open;  // node indices still missing children
    int const_index = 0;
    for (std::size_t pos = 0; pos < sequence.size(); ++pos) {
        if (pos > 0 && open.empty()) {
            tree.status = DecodeStatus::TrailingTokens;
            return tree;
        }
        const Token& tok = lib.token(sequence[pos]);
        int idx = static_cast<int>(tree.nodes.size());
        TreeNode node;
        node.token = tok.id;
        if (tok.kind == TokenKind::ConstantPlaceholder) node.const_index = const_index++;
        tree.nodes.push_back(node);
        if (!open.empty()) {
            TreeNode& parent = tree.nodes[static_cast<std::size_t>(open.back())];
            parent.child[parent.child[0] < 0 ? 0 : 1] = idx;
            const Token& ptok = lib.token(parent.token);
            if (parent.child[ptok.arity - 1] >= 0) open.pop_back();
        }
        if (tok.arity > 0) open.push_back(idx);
        while (!open.empty()) {
            TreeNode& top = tree.nodes[static_cast<std::size_t>(open.back())];
            const Token& ttok = lib.token(top.token);
            if (top.child[ttok.arity - 1] >= 0)
                open.pop_back();
            else
                break;
        }
    }
    if (!open.empty()) tree.status = DecodeStatus::IncompleteExpression;
    return tree;
}

namespace {

void encode_walk(const Tree& tree, int idx, std::vector<int>& out) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
    out.push_back(n.token);
    for (int k = 0; k < 2; ++k)
        if (n.child[k] >= 0) encode_walk(tree, n.child[k], out);
}

}  // namespace

std::vector<int> encode(const Tree& tree) {
    std::vector<int> out;
    out.reserve(tree.nodes.size());
    if (!tree.nodes.empty()) encode_walk(tree, 0, out);
    return out;
}

int count_functions(std::span<const int> sequence, const Library& lib) {
    int n = 0;
    for (int id : sequence) n += lib.token(id).arity > 0 ? 1 : 0;
    return n;
}

int count_constants(std::span<const int> sequence, const Library& lib) {
    int n = 0;
    for (int id : sequence) n += lib.is_constant(id) ? 1 : 0;
    return n;
}

std::vector<double> evaluate(const Expression& expr, const Library& lib,
                             std::span<const double> features, std::size_t n_samples,
                             std::size_t n_features) {
    Tree tree = decode(expr.sequence, lib);
    if (!tree.ok()) throw std::invalid_argument("evaluate: expression does not decode");
    if (static_cast<int>(expr.constants.size()) != count_constants(expr.sequence, lib))
        throw std::invalid_argument("evaluate: constant count mismatch");

    // post-order schedule so a small value stack suffices per sample
    std::vector<int> order;
    order.reserve(tree.nodes.size());
    {
        std::vector<std::pair<int, bool>> st{{0, false}};
        while (!st.empty()) {
            auto [idx, expanded] = st.back();
            st.pop_back();
            if (expanded) {
                order.push_back(idx);
                continue;
            }
            st.emplace_back(idx, true);
            const TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
            for (int k = 1; k >= 0; --k)
                if (n.child[k] >= 0) st.emplace_back(n.child[k], false);
        }
    }

    std::vector<double> out(n_samples);
    std::vector<double> stack;
    stack.reserve(tree.nodes.size());
    for (std::size_t s = 0; s < n_samples; ++s) {
        stack.clear();
        const double* row = features.data() + s * n_features;
        for (int idx : order) {
            const TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
            const Token& tok = lib.token(n.token);
            double v;
            switch (tok.kind) {
                case TokenKind::Variable:
                    v = row[lib.variable_index(n.token)];
                    break;
                case TokenKind::ConstantPlaceholder:
                    v = expr.constants[static_cast<std::size_t>(n.const_index)];
                    break;
                case TokenKind::UnaryOp: {
                    double a = stack.back();
                    stack.pop_back();
                    if (tok.symbol == "ln")
                        v = std::log(a);
                    else if (tok.symbol == "exp")
                        v = std::exp(a);
                    else if (tok.symbol == "sqrt")
                        v = std::sqrt(a);
                    else  // square
                        v = a * a;
                    break;
                }
                case TokenKind::BinaryOp: {
                    double bb = stack.back();
                    stack.pop_back();
                    double aa = stack.back();
                    stack.pop_back();
                    if (tok.symbol == "add")
                        v = aa + bb;
                    else if (tok.symbol == "sub")
                        v = aa - bb;
                    else if (tok.symbol == "mul")
                        v = aa * bb;
                    else  // div; no protected variant, non-finite is surfaced
                        v = aa / bb;
                    break;
                }
            }
            stack.push_back(v);
        }
        double r = stack.back();
        out[s] = std::isfinite(r) ? r : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

namespace {

std::string format_constant(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::string render_walk(const Tree& tree, int idx, const Expression& expr, const Library& lib,
                        int precision) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
    const Token& tok = lib.token(n.token);
    switch (tok.kind) {
        case TokenKind::Variable:
            return tok.symbol;
        case TokenKind::ConstantPlaceholder:
            return format_constant(expr.constants[static_cast<std::size_t>(n.const_index)],
                                   precision);
        case TokenKind::UnaryOp:
            return tok.symbol + "(" + render_walk(tree, n.child[0], expr, lib, precision) + ")";
        case TokenKind::BinaryOp: {
            static const char* infix[] = {"+", "-", "*", "/"};
            const char* op = tok.symbol == "add"   ? infix[0]
                             : tok.symbol == "sub" ? infix[1]
                             : tok.symbol == "mul" ? infix[2]
                                                   : infix[3];
            return "(" + render_walk(tree, n.child[0], expr, lib, precision) + " " + op + " " +
                   render_walk(tree, n.child[1], expr, lib, precision) + ")";
        }
    }
    return {};
}

}  // namespace

std::string render(const Expression& expr, const Library& lib, int precision) {
    Tree tree = decode(expr.sequence, lib);
    if (!tree.ok()) throw std::invalid_argument("render: expression does not decode");
    return render_walk(tree, 0, expr, lib, precision);
}

std::string structure_key(std::span<const int> sequence, const Library& lib) {
    std::string out;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        if (i) out += ' ';
        out += lib.token(sequence[i]).symbol;
    }
    return out;
}

std::string serialize(const Expression& expr, const Library& lib) {
    std::string out = "tokens=" + structure_key(expr.sequence, lib) + "; constants=";
    for (std::size_t i = 0; i < expr.constants.size(); ++i) {
        if (i) out += ',';
        out += format_constant(expr.constants[i], 17);
    }
    return out;
}

Expression parse_serialized(const std::string& line, const Library& lib) {
    auto tok_pos = line.find("tokens=");
    auto sep_pos = line.find(';', tok_pos == std::string::npos ? 0 : tok_pos);
    if (tok_pos == std::string::npos || sep_pos == std::string::npos)
        throw std::invalid_argument("expression line must look like 'tokens=...; constants=...'");
    auto const_pos = line.find("constants=", sep_pos);
    if (const_pos == std::string::npos)
        throw std::invalid_argument("expression line is missing 'constants='");

    Expression expr;
    {
        std::istringstream in(line.substr(tok_pos + 7, sep_pos - tok_pos - 7));
        std::string sym;
        while (in >> sym) {
            int id = lib.find(sym);
            if (id < 0) throw std::invalid_argument("unknown token symbol: " + sym);
            expr.sequence.push_back(id);
        }
    }
    {
        std::string rest = line.substr(const_pos + 10);
        std::istringstream in(rest);
        std::string item;
        while (std::getline(in, item, ',')) {
            if (item.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            std::size_t used = 0;
            double v = std::stod(item, &used);
            expr.constants.push_back(v);
        }
    }
    if (expr.sequence.empty()) throw std::invalid_argument("empty token sequence");
    Tree t = decode(expr.sequence, lib);
    if (!t.ok()) throw std::invalid_argument("token sequence does not form a complete tree");
    if (static_cast<int>(expr.constants.size()) != count_constants(expr.sequence, lib))
        throw std::invalid_argument("constant count does not match placeholders");
    return expr;
}

}  // namespace rsl
