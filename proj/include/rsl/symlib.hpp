#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl {

enum class TokenKind { BinaryOp, UnaryOp, Variable, ConstantPlaceholder };

struct Token {
    int id = -1;
    TokenKind kind = TokenKind::Variable;
    std::string symbol;
    int arity = 0;  // 2 binary, 1 unary, 0 terminal
};

// Which unary/binary operators to enable when building the default library.
struct LibraryConfig {
    bool op_add = true, op_sub = true, op_mul = true, op_div = true;
    bool op_ln = true, op_exp = true, op_sqrt = true, op_square = true;
};

// Ordered token alphabet: binary ops, unary ops, input variables, constant.
class Library {
public:
    static Library standard(const LibraryConfig& cfg = {});

    const std::vector<Token>& tokens() const { return tokens_; }
    const Token& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(tokens_.size()); }
    int variable_count() const { return variable_count_; }
    bool has_constant() const { return constant_id_ >= 0; }
    int constant_id() const { return constant_id_; }

    // -1 when the symbol is unknown
    int find(const std::string& symbol) const;

    bool is_function(int id) const { return token(id).arity > 0; }
    bool is_unary(int id) const { return token(id).kind == TokenKind::UnaryOp; }
    bool is_binary(int id) const { return token(id).kind == TokenKind::BinaryOp; }
    bool is_constant(int id) const { return token(id).kind == TokenKind::ConstantPlaceholder; }
    bool is_variable(int id) const { return token(id).kind == TokenKind::Variable; }

    // feature column index for a Variable token
    int variable_index(int id) const { return var_index_.at(static_cast<std::size_t>(id)); }

private:
    void add(TokenKind kind, const std::string& symbol);
    void validate() const;

    std::vector<Token> tokens_;
    std::vector<int> var_index_;
    int variable_count_ = 0;
    int constant_id_ = -1;
};

// Prefix token sequence plus one fitted value per ConstantPlaceholder.
struct Expression {
    std::vector<int> sequence;
    std::vector<double> constants;
};

// Pending child counts while a prefix sequence is being emitted. The stack is
// the "arity array": one entry per open function node, innermost last.
struct ArityState {
    std::vector<int> stack;
    int tokens_emitted = 0;
    int function_count = 0;
    int constant_count = 0;

    bool complete() const { return tokens_emitted > 0 && stack.empty(); }
    int pending_total() const {
        int s = 0;
        for (int v : stack) s += v;
        return s;
    }
};

struct AppendAfterComplete : std::logic_error {
    AppendAfterComplete() : std::logic_error("token appended to a completed expression") {}
};

// Push a token's arity, or fill one pending child slot with cascading pops.
void arity_update(ArityState& state, const Token& tok);

enum class DecodeStatus { Ok, IncompleteExpression, TrailingTokens, UnknownToken };

struct TreeNode {
    int token = -1;
    int child[2] = {-1, -1};  // node indices; -1 when absent
    int const_index = -1;     // position in Expression::constants for C leaves
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root; prefix order
    DecodeStatus status = DecodeStatus::Ok;
    bool ok() const { return status == DecodeStatus::Ok; }
};

Tree decode(std::span<const int> sequence, const Library& lib);

// Pre-order walk; inverse of decode on valid trees.
std::vector<int> encode(const Tree& tree);

int count_functions(std::span<const int> sequence, const Library& lib);
int count_constants(std::span<const int> sequence, const Library& lib);

// Elementwise evaluation over a row-major feature matrix
// (n_samples x variable_count). Non-finite results (division blowup, ln of a
// non-positive, sqrt of a negative, exp overflow) are reported per sample as
// quiet NaN; the batch never aborts.
std::vector<double> evaluate(const Expression& expr, const Library& lib,
                             std::span<const double> features, std::size_t n_samples,
                             std::size_t n_features);

// Parenthesized infix with constants substituted. `precision` is significant
// digits: 17 for machine output, 4 for human reports.
std::string render(const Expression& expr, const Library& lib, int precision = 17);

// Structure-only text: space-separated token symbols.
std::string structure_key(std::span<const int> sequence, const Library& lib);

// One-line form `tokens=<symbols>; constants=<comma-separated reals>`.
std::string serialize(const Expression& expr, const Library& lib);
Expression parse_serialized(const std::string& line, const Library& lib);  // throws std::invalid_argument

}  // namespace rsl
