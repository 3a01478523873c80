#include "doctest.h"

#include <functional>

#include "cotlab/arith.hpp"
#include "cotlab/datagen.hpp"

using namespace cotlab;

namespace {

std::string compact_expr(const Expr& e) { return compact(to_tokens(e)); }

}  // namespace

TEST_CASE("parse and render") {
    Expr e = parse_expr("1 + 5 × ( 1 − 2 ) =", 11);
    CHECK(e.tokens.size() == 10);
    CHECK(e.has_equals());
    CHECK(render(e) == "1 + 5 × ( 1 − 2 ) =");
    CHECK(parse_expr(render(e), 11) == e);
    CHECK(parse_expr("3", 11).tokens.size() == 1);
    CHECK(render(parse_expr("1 - 2 * 3 / 4", 11)) == "1 − 2 × 3 ÷ 4");
    CHECK(parse_compact("1+5×(1−2)=", 11) == e);
    CHECK(parse_compact("10×10", 11).tokens.size() == 3);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_expr("( 1 +", 11), ParseError);
    CHECK_THROWS_AS(parse_expr("− 1", 11), ParseError);
    CHECK_THROWS_AS(parse_expr("1 + 11", 11), ParseError);
    CHECK_THROWS_AS(parse_expr("1 = 2", 11), ParseError);
    CHECK_THROWS_AS(parse_expr("", 11), ParseError);
    CHECK_THROWS_AS(parse_expr("1 )", 11), ParseError);
    try {
        parse_expr("1 + + 2", 11);
        FAIL("expected a parse error");
    } catch (const ParseError& err) {
        CHECK(err.position() == 2);
    }
}

TEST_CASE("evaluate") {
    CHECK(evaluate(parse_compact("1+5×(1−2)", 11)).value() == 7);
    CHECK(evaluate(parse_compact("3+5×(4−8÷(1+3))", 11)).value() == 2);
    for (int k = 0; k < 11; ++k) CHECK(evaluate(parse_expr(std::to_string(k), 11)).value() == k);
    CHECK(evaluate(parse_compact("8−2−1", 11)).value() == 5);
    CHECK(evaluate(parse_compact("8÷2÷2", 11)).value() == 2);
    CHECK_THROWS_AS(evaluate(parse_compact("1÷(2−2)", 11)), DivisionByZero);
}

TEST_CASE("handles") {
    Expr e = parse_compact("7×(6+5+4×5)", 11);
    auto h = find_handles(e);
    REQUIRE(h.size() == 2);
    CHECK(h[0].start == 3);
    CHECK(h[0].op == TokKind::plus);
    CHECK(h[1].start == 7);
    CHECK(h[1].op == TokKind::times);

    auto h2 = find_handles(parse_compact("1+5×10", 11));
    REQUIRE(h2.size() == 1);
    CHECK(h2[0].start == 2);

    auto h3 = find_handles(parse_compact("2+3", 11));
    REQUIRE(h3.size() == 1);
    CHECK(h3[0].start == 0);

    // '=' counts as a boundary on the left
    auto h4 = find_handles(parse_compact("2+3=", 11));
    CHECK(h4.size() == 1);
    CHECK(find_handles(parse_compact("1−2+3", 11)).size() == 1);
}

TEST_CASE("cot steps") {
    CHECK(compact_expr(cot_step(parse_compact("1+5×(1−2)", 11))) == "1+5×10");
    CHECK(compact_expr(cot_step(parse_compact("1+5×10", 11))) == "1+6");
    CHECK(compact_expr(cot_step(parse_compact("1+6", 11))) == "7");
    CHECK(compact_expr(cot_step(parse_compact("7×(6+5+4×5)", 11))) == "7×(0+4×5)");
    CHECK(compact_expr(cot_step(parse_compact("3÷(2−2)", 11))) == "3÷0");
    CHECK_THROWS_AS(cot_trace(parse_compact("3÷(2−2)", 11)), DivisionByZero);
}

TEST_CASE("cot trace golden") {
    CotSample s = cot_trace(parse_compact("1+5×(1−2)", 11));
    REQUIRE(s.steps.size() == 3);
    CHECK(compact(s.steps[0]) == "1+5×10");
    CHECK(compact(s.steps[1]) == "1+6");
    CHECK(compact(s.steps[2]) == "7");
    CHECK(compact(s.answer) == "7");
    CHECK(compact(serialize_tokens(s)) == "1+5×(1−2)=1+5×10=1+6=7");
    CHECK(compact(serialize_tokens(s, Format::direct)) == "1+5×(1−2)=7");
    CHECK(parse_sample(Task::arithmetic, serialize(s) + " <eos>") == s);

    CotSample single = cot_trace(parse_expr("3", 11));
    CHECK(single.steps.empty());
    CHECK(single.answer == Tokens{"3"});
    CHECK(serialize(single) == "3 = 3");
    CHECK(parse_sample(Task::arithmetic, serialize(single)) == single);
}

TEST_CASE("bracket matching") {
    auto r = match_brackets(Tokens{"(", "a", ")"});
    CHECK(r[0] == BracketRecord{-1, 2});
    CHECK(r[2] == BracketRecord{0, -1});
    CHECK(r[1] == BracketRecord{0, 2});

    auto r2 = match_brackets(Tokens{"(", "(", ")", "(", ")", ")"});
    CHECK(r2[1] == BracketRecord{-1, 2});
    CHECK(r2[3] == BracketRecord{-1, 4});
    CHECK(r2[0] == BracketRecord{-1, 5});
    CHECK(r2[5] == BracketRecord{0, -1});

    CHECK(match_brackets(Tokens{"a"})[0] == BracketRecord{kTopLevel, kTopLevel});
    CHECK_THROWS_AS(match_brackets(Tokens{"(", "a"}), UnbalancedBrackets);
    CHECK_THROWS_AS(match_brackets(Tokens{")"}), UnbalancedBrackets);
}

TEST_CASE("bracket matching agrees with the depth formula") {
    // Depth r_i counts '(' before i minus ')' before i, plus one on '('.
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        Expr e = gen_arithmetic(8, 11, rng).expr;
        Tokens t = to_tokens(e);
        auto rec = match_brackets(t);
        std::vector<int> depth(t.size());
        int open = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            depth[i] = open + (t[i] == "(" ? 1 : 0);
            if (t[i] == "(") ++open;
            if (t[i] == ")") --open;
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] == "(") {
                // partner: first later ')' with the same depth
                std::size_t j = i + 1;
                while (!(t[j] == ")" && depth[j] == depth[i])) ++j;
                CHECK(rec[i].right == static_cast<long>(j));
                CHECK(rec[j].left == static_cast<long>(i));
            }
        }
    }
}

TEST_CASE("random traces preserve value and count steps") {
    Rng rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = rng.below(11);
        ArithInstance inst = gen_arithmetic(n, 11, rng);
        CotSample s = cot_trace(inst.expr);
        CHECK(s.steps.size() == n);
        const auto v = evaluate(inst.expr).value();
        CHECK(v == inst.answer);
        Expr cur = inst.expr;
        for (std::size_t k = 0; k < n; ++k) {
            auto hs = find_handles(cur);
            REQUIRE(!hs.empty());
            Expr next = cot_step(cur);
            CHECK(next.operator_count() + 1 == cur.operator_count());
            CHECK(evaluate(next).value() == v);
            CHECK(to_tokens(next) == s.steps[k]);
            cur = next;
        }
        CHECK(s.answer == Tokens{std::to_string(v)});
    }
}

TEST_CASE("every expression with up to three operators has a handle") {
    // Trees over {0,1,2} with every operator; each composite child may or
    // may not be bracketed, so non-tree-shaped strings appear as well.
    const std::vector<std::string> ops{"+", "−", "×", "÷"};
    std::function<std::vector<Tokens>(int)> build = [&](int k) -> std::vector<Tokens> {
        std::vector<Tokens> out;
        if (k == 0) {
            for (int v = 0; v < 3; ++v) out.push_back({std::to_string(v)});
            return out;
        }
        for (int left = 0; left < k; ++left) {
            auto L = build(left);
            auto R = build(k - 1 - left);
            for (const auto& l : L) {
                for (const auto& r : R) {
                    for (const auto& op : ops) {
                        for (int wrap = 0; wrap < 4; ++wrap) {
                            if ((wrap & 1) && left == 0) continue;
                            if ((wrap & 2) && k - 1 - left == 0) continue;
                            Tokens t;
                            if (wrap & 1) t.push_back("(");
                            t.insert(t.end(), l.begin(), l.end());
                            if (wrap & 1) t.push_back(")");
                            t.push_back(op);
                            if (wrap & 2) t.push_back("(");
                            t.insert(t.end(), r.begin(), r.end());
                            if (wrap & 2) t.push_back(")");
                            out.push_back(std::move(t));
                        }
                    }
                }
            }
        }
        return out;
    };
    std::size_t checked = 0;
    for (int k = 1; k <= 3; ++k) {
        for (const auto& t : build(k)) {
            Expr e = parse_tokens(t, 3);
            REQUIRE(e.operator_count() == static_cast<std::size_t>(k));
            auto hs = find_handles(e);
            CHECK(!hs.empty());
            ++checked;
            // leftmost selection and value preservation where defined
            bool defined = true;
            std::int64_t v = 0;
            try {
                v = evaluate(e).value();
            } catch (const DivisionByZero&) {
                defined = false;
            }
            if (!defined) continue;
            Expr next = cot_step(e);
            CHECK(evaluate(next).value() == v);
            const auto first = hs.front().start;
            for (const auto& h : hs) CHECK(h.start >= first);
        }
    }
    CHECK(checked > 10000);
}

TEST_CASE("trace is a pure function of tokens") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) {
        Expr e1 = gen_arithmetic(7, 11, a).expr;
        Expr e2 = gen_arithmetic(7, 11, b).expr;
        CHECK(cot_trace(e1) == cot_trace(e2));
    }
}
