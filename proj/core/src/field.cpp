#include "cotlab/field.hpp"

#include <ostream>
#include <string>

namespace cotlab {

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::int64_t d = 3; d <= n / d; d += 2) {
        if (n % d == 0) return false;
    }
    return true;
}

FieldElement make_unchecked(std::int64_t value, std::int64_t modulus) noexcept {
    return FieldElement(value, modulus, FieldElement::Unchecked{});
}

FieldElement::FieldElement(std::int64_t value, std::int64_t modulus) : value_(0), modulus_(modulus) {
    if (modulus > kMaxModulus) throw NotPrime("modulus " + std::to_string(modulus) + " exceeds 2^31 - 1");
    if (!is_prime(modulus)) throw NotPrime("modulus " + std::to_string(modulus) + " is not prime");
    value_ = mod_normalize(value, modulus);
}

FieldElement power(const FieldElement& a, std::uint64_t e) {
    const std::int64_t p = a.modulus();
    std::int64_t base = a.value();
    std::int64_t acc = 1 % p;
    while (e > 0) {
        if (e & 1u) acc = mulmod(acc, base, p);
        base = mulmod(base, base, p);
        e >>= 1u;
    }
    return make_unchecked(acc, p);
}

FieldElement inverse(const FieldElement& a) {
    if (a.value() == 0) throw DivisionByZero("inverse of zero");
    return power(a, static_cast<std::uint64_t>(a.modulus() - 2));
}

FieldElement field_op(const FieldElement& a, const FieldElement& b, FieldOpKind kind) {
    if (a.modulus() != b.modulus()) {
        throw ModulusMismatch("moduli " + std::to_string(a.modulus()) + " and " +
                              std::to_string(b.modulus()) + " differ");
    }
    const std::int64_t p = a.modulus();
    switch (kind) {
        case FieldOpKind::add:
            return make_unchecked(mod_normalize(a.value() + b.value(), p), p);
        case FieldOpKind::sub:
            return make_unchecked(mod_normalize(a.value() - b.value(), p), p);
        case FieldOpKind::mul:
            return make_unchecked(mulmod(a.value(), b.value(), p), p);
        case FieldOpKind::div:
            if (b.value() == 0) throw DivisionByZero("division by zero in Z_" + std::to_string(p));
            return make_unchecked(mulmod(a.value(), inverse(b).value(), p), p);
    }
    return make_unchecked(0, p);
}

std::ostream& operator<<(std::ostream& os, const FieldElement& a) { return os << a.value(); }

}  // namespace cotlab
