#pragma once

#include <cstdint>
#include <iosfwd>

#include "cotlab/errors.hpp"

namespace cotlab {

// Deterministic trial division; moduli here are small.
bool is_prime(std::int64_t n);

// Moduli are capped so a product of two residues fits in 64 bits.
inline constexpr std::int64_t kMaxModulus = (std::int64_t{1} << 31) - 1;

inline std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t p) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b) %
                                     static_cast<std::uint64_t>(p));
}

// Reduce any integer into [0, p-1].
inline std::int64_t mod_normalize(std::int64_t x, std::int64_t p) {
    std::int64_t r = x % p;
    return r < 0 ? r + p : r;
}

class FieldElement {
public:
    FieldElement(std::int64_t value, std::int64_t modulus);

    std::int64_t value() const noexcept { return value_; }
    std::int64_t modulus() const noexcept { return modulus_; }

    friend bool operator==(const FieldElement&, const FieldElement&) = default;

private:
    struct Unchecked {};
    FieldElement(std::int64_t value, std::int64_t modulus, Unchecked) noexcept
        : value_(value), modulus_(modulus) {}

    std::int64_t value_;
    std::int64_t modulus_;

    friend FieldElement make_unchecked(std::int64_t, std::int64_t) noexcept;
};

enum class FieldOpKind { add, sub, mul, div };

FieldElement field_op(const FieldElement& a, const FieldElement& b, FieldOpKind kind);
FieldElement inverse(const FieldElement& a);
FieldElement power(const FieldElement& a, std::uint64_t e);

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    return field_op(a, b, FieldOpKind::add);
}
inline FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    return field_op(a, b, FieldOpKind::sub);
}
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    return field_op(a, b, FieldOpKind::mul);
}
inline FieldElement operator/(const FieldElement& a, const FieldElement& b) {
    return field_op(a, b, FieldOpKind::div);
}

std::ostream& operator<<(std::ostream& os, const FieldElement& a);

}  // namespace cotlab
