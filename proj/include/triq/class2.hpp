#ifndef TRIQ_CLASS2_HPP
#define TRIQ_CLASS2_HPP

#include <optional>
#include <vector>

#include "triq/arith.hpp"

namespace triq {

enum class ClassGroupMode { wide, narrow };

// Class group data of Q(sqrt(d)) computed from reduced binary quadratic
// forms of the fundamental discriminant. Forms give the narrow group; for
// real fields the wide group is the quotient by the class of (-1, b0, *),
// i.e. wide h = narrow h / 2 exactly when N(eps_d) = +1.
struct FormClassGroup {
    Int discriminant;
    ClassGroupMode mode = ClassGroupMode::wide;
    Int class_number;
    Int two_part;
    std::vector<Int> two_sylow;   // cyclic 2-power orders, descending; empty if two_part = 1
    std::optional<int> unit_norm; // D > 0 only: N(eps_d) from the principal cycle
};

// D = d if d = 1 mod 4, else 4d. Requires d squarefree, d != 0, 1.
Int fundamental_discriminant(const Int& d);

// Full computation including the 2-Sylow structure (found by composing
// forms). Throws std::invalid_argument for non-squarefree d.
FormClassGroup form_class_group(const Int& d, ClassGroupMode mode = ClassGroupMode::wide);

// 2-part of the wide class number of Q(sqrt(d)). Cheaper than
// form_class_group: counts reduced-form cycles without composition.
Int h2(const Int& d);

// The shapes with known 2-class numbers (or a divisibility statement).
enum class CaseShape {
    d_two,                 // d = 2
    d_minus_one,           // d = -1
    d_minus_two,           // d = -2
    prime_1_mod_4,         // d = p
    prime_3_mod_4,         // d = q
    minus_prime_3_mod_4,   // d = -q
    twice_prime_3_mod_4,   // d = 2q
    pq,                    // d = pq,  p = 1 mod 4, q = 3 mod 4
    twice_pq,              // d = 2pq
    minus_pq,              // d = -pq
    minus_twice_q_3_mod_8, // d = -2q, q = 3 mod 8
};

// Detects which shape (if any) d matches; needs the factorization of d,
// so d must be small enough to factor by trial division.
std::optional<CaseShape> detect_shape(const Int& d);

// The closed-form 2-class number for the shape, when determined:
// 1 for the one-class shapes, 2 for pq / 2pq / -pq with (p|q) = -1 and for
// -2q with q = 3 mod 8. Absent when only "divisible by 4" is known
// ((p|q) = +1) or d does not match the shape.
std::optional<Int> h2_fast(const Int& d, CaseShape shape);

}  // namespace triq

#endif
