#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "rsl/rng.hpp"
#include "rsl/symlib.hpp"

using namespace rsl;

namespace {

Expression expr_of(const Library& lib, std::initializer_list<const char*> symbols,
                   std::vector<double> constants = {}) {
    Expression e;
    for (const char* s : symbols) {
        int id = lib.find(s);
        REQUIRE(id >= 0);
        e.sequence.push_back(id);
    }
    e.constants = std::move(constants);
    return e;
}

// naive recursive interpreter, independent of the production evaluator
double naive_eval(const Library& lib, std::span<const int> seq, std::size_t& pos,
                  const std::vector<double>& constants, std::size_t& cpos, const double* row) {
    const Token& tok = lib.token(seq[pos++]);
    switch (tok.kind) {
        case TokenKind::Variable: return row[lib.variable_index(tok.id)];
        case TokenKind::ConstantPlaceholder: return constants[cpos++];
        case TokenKind::UnaryOp: {
            double a = naive_eval(lib, seq, pos, constants, cpos, row);
            if (tok.symbol == "ln") return std::log(a);
            if (tok.symbol == "exp") return std::exp(a);
            if (tok.symbol == "sqrt") return std::sqrt(a);
            return a * a;
        }
        case TokenKind::BinaryOp: {
            double a = naive_eval(lib, seq, pos, constants, cpos, row);
            double b = naive_eval(lib, seq, pos, constants, cpos, row);
            if (tok.symbol == "add") return a + b;
            if (tok.symbol == "sub") return a - b;
            if (tok.symbol == "mul") return a * b;
            return a / b;
        }
    }
    return 0;
}

// random valid expression by arity-respecting sampling with a closing budget
Expression random_expression(const Library& lib, Rng& rng, int max_functions) {
    Expression e;
    ArityState st;
    while (!(st.tokens_emitted > 0 && st.stack.empty())) {
        std::vector<int> choices;
        for (const Token& t : lib.tokens()) {
            if (t.arity > 0 && st.function_count >= max_functions) continue;
            choices.push_back(t.id);
        }
        int id = choices[rng.index(choices.size())];
        e.sequence.push_back(id);
        arity_update(st, lib.token(id));
    }
    for (int i = 0; i < st.constant_count; ++i) e.constants.push_back(rng.uniform(-3, 3));
    return e;
}

}  // namespace

TEST_CASE("arity_update basics") {
    Library lib = Library::standard();
    ArityState st;
    arity_update(st, lib.token(lib.find("add")));
    CHECK(st.stack == std::vector<int>{2});
    arity_update(st, lib.token(lib.find("eps_a")));
    CHECK(st.stack == std::vector<int>{1});
    arity_update(st, lib.token(lib.find("gamma_a")));
    CHECK(st.stack.empty());
    CHECK(st.complete());
    CHECK_THROWS_AS(arity_update(st, lib.token(lib.find("eps_a"))), AppendAfterComplete);
}

TEST_CASE("arity_update cascading pop: add ln C") {
    Library lib = Library::standard();
    ArityState st;
    arity_update(st, lib.token(lib.find("add")));
    arity_update(st, lib.token(lib.find("ln")));
    CHECK(st.stack == std::vector<int>{2, 1});
    arity_update(st, lib.token(lib.find("C")));
    CHECK(st.stack == std::vector<int>{1});
    CHECK(st.function_count == 2);
    CHECK(st.constant_count == 1);
}

TEST_CASE("decode outcomes") {
    Library lib = Library::standard();
    auto ok = expr_of(lib, {"add", "eps_a", "gamma_a"});
    Tree t = decode(ok.sequence, lib);
    REQUIRE(t.ok());
    CHECK(t.nodes.size() == 3);
    CHECK(lib.token(t.nodes[0].token).symbol == "add");

    auto incomplete = expr_of(lib, {"add", "eps_a"});
    CHECK(decode(incomplete.sequence, lib).status == DecodeStatus::IncompleteExpression);

    auto trailing = expr_of(lib, {"eps_a", "gamma_a"});
    CHECK(decode(trailing.sequence, lib).status == DecodeStatus::TrailingTokens);
}

TEST_CASE("decode(encode(tree)) round trip on random trees") {
    Library lib = Library::standard();
    Rng rng(991);
    for (int i = 0; i < 200; ++i) {
        Expression e = random_expression(lib, rng, 8);
        Tree t = decode(e.sequence, lib);
        REQUIRE(t.ok());
        CHECK(encode(t) == e.sequence);
    }
}

TEST_CASE("arity replay empties exactly at the last token") {
    Library lib = Library::standard();
    Rng rng(4242);
    for (int i = 0; i < 200; ++i) {
        Expression e = random_expression(lib, rng, 6);
        ArityState st;
        for (std::size_t k = 0; k < e.sequence.size(); ++k) {
            CHECK(!st.complete());
            arity_update(st, lib.token(e.sequence[k]));
        }
        CHECK(st.complete());
    }
}

TEST_CASE("evaluate: identity read-through and singular input") {
    Library lib = Library::standard();
    auto id = expr_of(lib, {"eps_a"});
    double row[4] = {0.5, 1.0, 2.0, 3.0};
    auto out = evaluate(id, lib, std::span<const double>(row, 4), 1, 4);
    CHECK(out[0] == doctest::Approx(0.5));

    auto div0 = expr_of(lib, {"div", "C", "eps_a"}, {1.0});
    double row0[4] = {0.0, 1.0, 1.0, 1.0};
    auto out0 = evaluate(div0, lib, std::span<const double>(row0, 4), 1, 4);
    CHECK(std::isnan(out0[0]));
}

TEST_CASE("evaluate: published structure on the 90-degree Data-1 row") {
    // ln Nf = 3.148 + 7.171/((eps+gam) + (-0.003)/(eps*t - 0.785*t + 2.74))
    Library lib = Library::standard();
    Expression e = parse_serialized(
        "tokens=add C div C add add eps_a gamma_a div C add sub mul eps_a tau_over_G mul C "
        "tau_over_G C; constants=3.148,7.171,-0.003,0.785,2.74",
        lib);
    // phi=90 row: eps 0.393, gamma 0.649, tau/G = 100*473.3/67000
    double row[4] = {0.393, 0.649, 100.0 * 787.1 / 198500.0, 100.0 * 473.3 / 67000.0};
    auto out = evaluate(e, lib, std::span<const double>(row, 4), 1, 4);
    CHECK(out[0] == doctest::Approx(10.038).epsilon(2e-3));
    CHECK(std::exp(out[0]) == doctest::Approx(2.3e4).epsilon(0.05));
}

TEST_CASE("evaluate matches the naive recursive interpreter") {
    Library lib = Library::standard();
    Rng rng(20240229);
    int checked = 0;
    for (int i = 0; i < 60; ++i) {
        Expression e = random_expression(lib, rng, 7);
        std::vector<double> rows(4 * 18);
        for (double& v : rows) v = rng.uniform(0.05, 3.0);
        auto out = evaluate(e, lib, rows, 18, 4);
        for (std::size_t s = 0; s < 18; ++s) {
            std::size_t pos = 0, cpos = 0;
            double ref = naive_eval(lib, e.sequence, pos, e.constants, cpos, rows.data() + 4 * s);
            if (!std::isfinite(ref)) {
                CHECK(std::isnan(out[s]));
            } else {
                CHECK(out[s] == doctest::Approx(ref).epsilon(1e-12));
                ++checked;
            }
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("evaluate is pure (bit-identical repeats)") {
    Library lib = Library::standard();
    Rng rng(5);
    Expression e = random_expression(lib, rng, 6);
    std::vector<double> rows(4 * 7);
    for (double& v : rows) v = rng.uniform(0.1, 2.0);
    auto a = evaluate(e, lib, rows, 7, 4);
    auto b = evaluate(e, lib, rows, 7, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]))
            CHECK(std::isnan(b[i]));
        else
            CHECK(a[i] == b[i]);
    }
}

TEST_CASE("render formats") {
    Library lib = Library::standard();
    CHECK(render(expr_of(lib, {"add", "eps_a", "gamma_a"}), lib) == "(eps_a + gamma_a)");
    CHECK(render(expr_of(lib, {"mul", "C", "eps_a"}, {2.5}), lib) == "(2.5 * eps_a)");
    CHECK(render(expr_of(lib, {"ln", "eps_a"}), lib) == "ln(eps_a)");
    // 17 significant digits in machine output, 4 in reports
    Expression c = expr_of(lib, {"C"}, {1.0 / 3.0});
    CHECK(render(c, lib, 17) == "0.33333333333333331");
    CHECK(render(c, lib, 4) == "0.3333");
    CHECK(render(c, lib) == render(c, lib));
}

TEST_CASE("serialize round trip") {
    Library lib = Library::standard();
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        Expression e = random_expression(lib, rng, 6);
        Expression back = parse_serialized(serialize(e, lib), lib);
        CHECK(back.sequence == e.sequence);
        REQUIRE(back.constants.size() == e.constants.size());
        for (std::size_t k = 0; k < e.constants.size(); ++k)
            CHECK(back.constants[k] == e.constants[k]);
    }
    CHECK_THROWS_AS(parse_serialized("tokens=add eps_a; constants=", lib),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_serialized("garbage", lib), std::invalid_argument);
}
