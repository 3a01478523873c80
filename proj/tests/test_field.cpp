#include "doctest.h"

#include "cotlab/field.hpp"

using namespace cotlab;

namespace {

FieldElement F(std::int64_t v, std::int64_t p) { return FieldElement(v, p); }

// Brute-force scan over all residues.
std::int64_t inverse_by_scan(std::int64_t a, std::int64_t p) {
    for (std::int64_t x = 1; x < p; ++x) {
        if (a * x % p == 1) return x;
    }
    return -1;
}

}  // namespace

TEST_CASE("field operations in Z_5") {
    CHECK(F(2, 5) + F(3, 5) == F(0, 5));
    CHECK(F(2, 5) * F(3, 5) == F(1, 5));
    CHECK(F(2, 5) - F(3, 5) == F(4, 5));
    CHECK(F(2, 5) / F(3, 5) == F(4, 5));
    CHECK(field_op(F(2, 5), F(3, 5), FieldOpKind::add).value() == 0);
}

TEST_CASE("additive identity in Z_11") {
    for (std::int64_t x = 0; x < 11; ++x) CHECK(F(x, 11) + F(0, 11) == F(x, 11));
}

TEST_CASE("inverse examples") {
    CHECK(inverse(F(4, 11)).value() == 3);
    CHECK(inverse_by_scan(4, 11) == 3);
    CHECK(inverse(F(2, 5)).value() == 3);
    CHECK(inverse_by_scan(2, 5) == 3);
    for (std::int64_t p : {2, 3, 5, 7, 11, 13}) CHECK(inverse(F(1, p)).value() == 1);
}

TEST_CASE("construction and errors") {
    CHECK(F(-1, 11).value() == 10);
    CHECK(F(23, 11).value() == 1);
    CHECK_THROWS_AS(F(1, 4), NotPrime);
    CHECK_THROWS_AS(F(1, 1), NotPrime);
    CHECK_THROWS_AS(F(1, 5) + F(1, 7), ModulusMismatch);
    CHECK_THROWS_AS(F(1, 5) / F(0, 5), DivisionByZero);
    CHECK_THROWS_AS(inverse(F(0, 7)), DivisionByZero);
    CHECK(is_prime(2));
    CHECK(is_prime(2147483647));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(91));
}

TEST_CASE("field axioms exhaustively for small primes") {
    for (std::int64_t p : {2, 3, 5, 7, 11}) {
        CAPTURE(p);
        const FieldElement zero = F(0, p), one = F(1, p);
        for (std::int64_t a = 0; a < p; ++a) {
            const FieldElement A = F(a, p);
            CHECK(A + zero == A);
            CHECK(A * one == A);
            if (a != 0) {
                CHECK(A * inverse(A) == one);
                CHECK(inverse(A).value() == inverse_by_scan(a, p));
            }
            for (std::int64_t b = 0; b < p; ++b) {
                const FieldElement Bv = F(b, p);
                CHECK(A + Bv == Bv + A);
                CHECK(A * Bv == Bv * A);
                CHECK(A - Bv == A + (zero - Bv));
                if (b != 0) CHECK(A / Bv == A * inverse(Bv));
                for (std::int64_t c = 0; c < p; ++c) {
                    const FieldElement C = F(c, p);
                    CHECK((A + Bv) + C == A + (Bv + C));
                    CHECK((A * Bv) * C == A * (Bv * C));
                    CHECK(A * (Bv + C) == A * Bv + A * C);
                }
            }
        }
    }
}
