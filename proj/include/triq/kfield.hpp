#ifndef TRIQ_KFIELD_HPP
#define TRIQ_KFIELD_HPP

#include <array>
#include <optional>
#include <string>

#include "triq/arith.hpp"
#include "triq/pell.hpp"

namespace triq {

// Element of Gal(K/Q) for K = Q(sqrt2, sqrt p, sqrt q), encoded by which of
// the three generators' radicals it negates: bit 0 = sqrt2, bit 1 = sqrt p,
// bit 2 = sqrt q. Composition is XOR.
struct GaloisElement {
    unsigned mask = 0;

    static GaloisElement identity() { return {0}; }
    static GaloisElement tau1() { return {1}; }
    static GaloisElement tau2() { return {2}; }
    static GaloisElement tau3() { return {4}; }

    GaloisElement operator*(GaloisElement o) const { return {mask ^ o.mask}; }
    bool operator==(GaloisElement o) const { return mask == o.mask; }
    bool is_involution() const { return mask != 0; }
};

// Exact element of K over the monomial basis
//   {1, sqrt2, sqrt p, sqrt q, sqrt 2p, sqrt 2q, sqrt pq, sqrt 2pq}.
// Coordinates are stored indexed by the radical bitmask (bit 0 = 2,
// bit 1 = p, bit 2 = q), so monomial(m1)*monomial(m2) = g * monomial(m1^m2)
// with g the product of the shared radicands.
class KElement {
  public:
    KElement(Int p, Int q);  // zero element
    static KElement one(const Int& p, const Int& q);
    static KElement monomial(const Int& p, const Int& q, unsigned mask, const Rat& coeff);
    // Embeds (a + b*sqrt(d))/denom for d in {2, p, q, 2p, 2q, pq, 2pq}.
    static KElement from_quad_unit(const Int& p, const Int& q, const QuadUnit& u);

    const Int& p() const { return p_; }
    const Int& q() const { return q_; }
    const Rat& coord(unsigned mask) const { return c_[mask]; }
    Rat& coord(unsigned mask) { return c_[mask]; }

    bool is_zero() const;
    bool operator==(const KElement& o) const;
    KElement operator+(const KElement& o) const;
    KElement operator-(const KElement& o) const;
    KElement operator-() const;
    KElement operator*(const KElement& o) const;
    KElement operator*(const Rat& s) const;
    KElement pow(unsigned long e) const;

    // Field inverse via the product of the seven conjugates. Throws
    // std::domain_error on zero.
    KElement inverse() const;

    // Product of x with all its conjugates; a rational.
    Rat absolute_norm() const;

    std::string to_string() const;

  private:
    Int p_, q_;
    std::array<Rat, 8> c_;
    Int radicand(unsigned mask) const;
    void check_compatible(const KElement& o) const;
};

KElement apply(GaloisElement sigma, const KElement& x);

// Index-2 (biquadratic) subfields, identified by the involution fixing
// them, plus the quadratic subfields for naming purposes.
struct SubfieldId {
    enum class Kind { biquadratic, quadratic };
    Kind kind;
    unsigned mask;  // involution mask (biquadratic) / monomial mask (quadratic)

    static SubfieldId k1() { return {Kind::biquadratic, 4}; }  // Q(sqrt2, sqrt p), fixed by tau3
    static SubfieldId k2() { return {Kind::biquadratic, 2}; }  // Q(sqrt2, sqrt q), fixed by tau2
    static SubfieldId k3() { return {Kind::biquadratic, 6}; }  // Q(sqrt2, sqrt pq), tau2*tau3
    static SubfieldId k4() { return {Kind::biquadratic, 1}; }  // Q(sqrt p, sqrt q), tau1
    static SubfieldId k5() { return {Kind::biquadratic, 3}; }  // Q(sqrt q, sqrt 2p), tau1*tau2
    static SubfieldId k6() { return {Kind::biquadratic, 5}; }  // Q(sqrt p, sqrt 2q), tau1*tau3
    static SubfieldId k7() { return {Kind::biquadratic, 7}; }  // Q(sqrt 2p, sqrt 2q)
    static SubfieldId quadratic(unsigned monomial_mask) {
        return {Kind::quadratic, monomial_mask};
    }

    GaloisElement stabilizer() const;
    bool fixes_monomial(unsigned monomial_mask) const;
};

// N_{K/F}(x) = x * sigma(x) for the involution sigma fixing F. Requires a
// biquadratic target; asserts the result lands in F.
KElement rel_norm(const KElement& x, SubfieldId target);

// --- symbolic norm tables -------------------------------------------------

enum class UnitKind { eps_2, eps_p, sqrt_eps_q, sqrt_eps_2q, sqrt_eps_pq, sqrt_eps_2pq };

enum NormMapId {
    norm_1_tau1 = 0,
    norm_1_tau2 = 1,
    norm_1_tau3 = 2,
    norm_1_tau1tau2 = 3,
    norm_1_tau1tau3 = 4,
    norm_1_tau2tau3 = 5,
};

GaloisElement norm_map_involution(NormMapId id);

// sign * eps_m^unit_exponent where eps_m is the unit under the square root
// (or the unit itself for the eps_2 / eps_p rows); exponent in {0, 1, 2}.
struct SymbolicUnitValue {
    int sign;
    int unit_exponent;
    bool operator==(const SymbolicUnitValue& o) const {
        return sign == o.sign && unit_exponent == o.unit_exponent;
    }
};

using NormTableRow = std::array<std::optional<SymbolicUnitValue>, 6>;

// The tabulated value of the unit under each norm map 1+sigma. The rows for
// sqrt_eps_pq / sqrt_eps_2pq require the square case tag and carry no entry
// for 1+tau3 (not tabulated).
NormTableRow norm_table(UnitKind kind, std::optional<SqrtCase> case_tag = std::nullopt);

// Exact K-embedding of the square root described by a decomposition
// (sqrt of eps_q, eps_2q, eps_pq, eps_2pq per case, or of eps_2p).
// The result squares back to the source unit; verified before returning.
KElement sqrt_unit_element(const Int& p, const Int& q, const SqrtDecomposition& dec);

// --- exact square test ----------------------------------------------------

struct SquareTestConfig {
    std::optional<Int> denom_bound;  // default 16*p*q
    long start_precision = 256;      // bits
    long max_precision = 16384;      // bits
};

enum class SquareAnswer {
    is_square,                // root found and verified exactly
    not_square_within_bound,  // no root with coordinate denominators <= bound
    inconclusive,             // precision ceiling hit before certification
};

struct SquareTestResult {
    SquareAnswer answer;
    std::optional<KElement> root;
    long precision_used = 0;
    Int denom_bound_used;

    bool found() const { return answer == SquareAnswer::is_square; }
};

// Decides whether xi is a square in K. A positive answer is unconditionally
// sound (the returned root squares to xi exactly); a negative answer is
// certified only up to the denominator bound; "inconclusive" means the
// precision ceiling was reached first. Searches the 128 sign patterns of
// the real embeddings in a fixed order, so results are deterministic.
SquareTestResult is_square_in_K(const KElement& xi, const SquareTestConfig& cfg = {});

// Wada's identity eps^2 = (eps*eps^s1)(eps*eps^s2)(eps^s1*eps^s2)^(-1),
// checked exactly. Holds for every invertible eps; a false return means an
// arithmetic bug.
bool wada_check(const KElement& eps, GaloisElement s1, GaloisElement s2);

}  // namespace triq

#endif
