#include "doctest.h"

#include "cotlab/datagen.hpp"
#include "cotlab/equation.hpp"

using namespace cotlab;

namespace {

const char* kWorkedSystem = "2 x1 + 3 x2 + 3 x3 = 8 , 1 x1 + 7 x2 + 0 x3 = 0 , 0 x1 + 2 x2 + 1 x3 = 1 ,";

// Plain matrix-vector product; independent of the solver.
std::vector<std::int64_t> matvec(const LinearSystem& s, const std::vector<std::int64_t>& x) {
    std::vector<std::int64_t> y(s.m, 0);
    for (std::size_t i = 0; i < s.m; ++i) {
        for (std::size_t j = 0; j < s.m; ++j) y[i] = (y[i] + s.a(i, j) * x[j]) % s.p;
    }
    return y;
}

}  // namespace

TEST_CASE("parse and render the worked system") {
    LinearSystem s = parse_system(kWorkedSystem, 11);
    CHECK(s.m == 3);
    CHECK(s.A == std::vector<std::int64_t>{2, 3, 3, 1, 7, 0, 0, 2, 1});
    CHECK(s.b == std::vector<std::int64_t>{8, 0, 1});
    CHECK(render_system_text(s) == kWorkedSystem);

    LinearSystem one = parse_system("5 x1 = 3 ,", 11);
    CHECK(one.m == 1);
    CHECK(one.A == std::vector<std::int64_t>{5});
    CHECK(one.b == std::vector<std::int64_t>{3});

    CHECK_THROWS_AS(parse_system("2 x1 + 3 x2 8 ,", 11), ParseError);
    CHECK_THROWS_AS(parse_system("2 x1 = 3", 11), ParseError);
    CHECK_THROWS_AS(parse_system("2 x1 + 1 x2 = 3 ,", 11), ParseError);
    CHECK_THROWS_AS(parse_system("12 x1 = 3 ,", 11), ParseError);
}

TEST_CASE("gauss steps on the worked system") {
    GaussState st{0, parse_system(kWorkedSystem, 11), 0};
    st = gauss_step(st);
    CHECK(st.last_pivot == 0);
    CHECK(render_system_text(st.system, 1) == "x1 + 7 x2 + 7 x3 = 4 , 0 x2 + 4 x3 = 7 , 2 x2 + 1 x3 = 1 ,");
    st = gauss_step(st);
    CHECK(st.last_pivot == 2);
    CHECK(render_system_text(st.system, 2) == "x1 + 9 x3 = 6 , x2 + 6 x3 = 6 , 4 x3 = 7 ,");
    st = gauss_step(st);
    CHECK(render_system_text(st.system, 3) == "x1 = 4 , x2 = 1 , x3 = 10 ,");
    CHECK_THROWS_AS(gauss_step(st), SingularSystem);
}

TEST_CASE("gauss trace golden") {
    CotSample s = gauss_trace(parse_system(kWorkedSystem, 11));
    REQUIRE(s.steps.size() == 2);
    CHECK(join(s.answer) == "x1 = 4 , x2 = 1 , x3 = 10 ,");
    CHECK(serialize(s) == std::string(kWorkedSystem) +
                              " [SEP] x1 + 7 x2 + 7 x3 = 4 , 0 x2 + 4 x3 = 7 , 2 x2 + 1 x3 = 1 ,"
                              " [SEP] x1 + 9 x3 = 6 , x2 + 6 x3 = 6 , 4 x3 = 7 ,"
                              " [SEP] x1 = 4 , x2 = 1 , x3 = 10 ,");
    CHECK(serialize(s, Format::direct) == std::string(kWorkedSystem) + " [SEP] x1 = 4 , x2 = 1 , x3 = 10 ,");
    CHECK(parse_sample(Task::equation, serialize(s) + " <eos>") == s);
    CHECK(solve_direct(parse_system(kWorkedSystem, 11)) == std::vector<std::int64_t>{4, 1, 10});
}

TEST_CASE("identity and one-variable systems") {
    LinearSystem I(3, 11);
    for (std::size_t i = 0; i < 3; ++i) I.a(i, i) = 1;
    I.b = {4, 5, 6};
    GaussState st = gauss_step(GaussState{0, I, 0});
    CHECK(st.system == I);
    CHECK(solve_direct(I) == I.b);

    LinearSystem one = parse_system("5 x1 = 3 ,", 11);
    CotSample s = gauss_trace(one);
    CHECK(s.steps.empty());
    const auto expect = (FieldElement(3, 11) / FieldElement(5, 11)).value();
    CHECK(join(s.answer) == "x1 = " + std::to_string(expect) + " ,");
}

TEST_CASE("singular systems") {
    LinearSystem s = parse_system("1 x1 + 2 x2 = 3 , 2 x1 + 4 x2 = 6 ,", 11);
    CHECK(determinant(s) == 0);
    CHECK_THROWS_AS(solve_direct(s), SingularSystem);
    CHECK_THROWS_AS(gauss_trace(s), SingularSystem);
}

TEST_CASE("planted solutions are recovered") {
    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 1 + rng.below(5);
        LinearSystem s = gen_equation(m, 11, rng);
        std::vector<std::int64_t> x(m);
        for (auto& v : x) v = rng.range(0, 10);
        s.b = matvec(s, x);
        CHECK(solve_direct(s) == x);
    }
}

TEST_CASE("trace properties on random systems") {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 1 + rng.below(5);
        const std::int64_t p = trial % 2 ? 11 : 5;
        LinearSystem s = gen_equation(m, p, rng);
        const auto x = solve_direct(s);
        CHECK(residual(s, x) == std::vector<std::int64_t>(m, 0));

        GaussState st{0, s, 0};
        for (std::size_t i = 1; i <= m; ++i) {
            // pivot minimality: no earlier feasible row
            std::size_t feasible = m;
            for (std::size_t k = i - 1; k < m && feasible == m; ++k) {
                bool ok = st.system.a(k, i - 1) != 0;
                for (std::size_t c = 0; c + 1 < i; ++c) ok = ok && st.system.a(k, c) == 0;
                if (ok) feasible = k;
            }
            st = gauss_step(st);
            CHECK(st.last_pivot == feasible);
            CHECK(solve_direct(st.system) == x);
            // echelon pattern
            for (std::size_t j = 0; j < m; ++j) {
                for (std::size_t k = 0; k < i; ++k) CHECK(st.system.a(j, k) == (j == k ? 1 : 0));
            }
            // the rendering parses back to the same system
            CHECK(parse_system_tokens(render_system(st.system, i), p) == st.system);
        }
        CotSample tr = gauss_trace(s);
        CHECK(tr.steps.size() == m - 1);
        LinearSystem fin = parse_system_tokens(tr.answer, p);
        CHECK(fin.b == x);
        CHECK(residual(s, fin.b) == std::vector<std::int64_t>(m, 0));
    }
}
