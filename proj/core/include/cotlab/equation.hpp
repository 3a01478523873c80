#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cotlab/cot.hpp"
#include "cotlab/field.hpp"

namespace cotlab {

// Coefficients are stored already reduced into [0, p-1], row-major.
struct LinearSystem {
    std::size_t m = 0;
    std::int64_t p = 11;
    std::vector<std::int64_t> A;
    std::vector<std::int64_t> b;

    LinearSystem() = default;
    LinearSystem(std::size_t m, std::int64_t p);

    std::int64_t& a(std::size_t i, std::size_t j) { return A[i * m + j]; }
    std::int64_t a(std::size_t i, std::size_t j) const { return A[i * m + j]; }
    FieldElement coeff(std::size_t i, std::size_t j) const { return FieldElement(a(i, j), p); }

    friend bool operator==(const LinearSystem&, const LinearSystem&) = default;
};

std::string variable_token(std::size_t k);  // 0-based index -> "x1", "x2", ...

// Accepts the full problem format and any step rendering: a bare variable
// has coefficient 1 and an absent variable has coefficient 0.
LinearSystem parse_system(std::string_view text, std::int64_t p);
LinearSystem parse_system_tokens(const Tokens& toks, std::int64_t p);

// step == 0 renders every coefficient. For step i >= 1, variables k <= i
// drop zero terms and print coefficient 1 bare, variables k > i keep
// explicit coefficients, and rows j > i omit x1..xi.
Tokens render_system(const LinearSystem& s, std::size_t step = 0);
std::string render_system_text(const LinearSystem& s, std::size_t step = 0);

struct GaussState {
    std::size_t step = 0;        // number of completed elimination steps
    LinearSystem system;
    std::size_t last_pivot = 0;  // 0-based row chosen by the latest step
};

GaussState gauss_step(const GaussState& state);
CotSample gauss_trace(const LinearSystem& s);
std::vector<std::int64_t> solve_direct(const LinearSystem& s);
std::int64_t determinant(const LinearSystem& s);
// A x - b, reduced mod p.
std::vector<std::int64_t> residual(const LinearSystem& s, const std::vector<std::int64_t>& x);

}  // namespace cotlab
