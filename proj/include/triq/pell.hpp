#ifndef TRIQ_PELL_HPP
#define TRIQ_PELL_HPP

#include <filesystem>
#include <optional>

#include "triq/arith.hpp"

namespace triq {

// Fundamental unit of the real quadratic field Q(sqrt(d)):
// (a + b*sqrt(d)) / denom with a, b > 0, the smallest unit > 1.
// denom == 2 only when d = 1 mod 4 and a = b mod 2.
struct QuadUnit {
    Int d;
    Int a, b;
    int denom = 1;
    int norm = 1;  // (a^2 - d*b^2) / denom^2, always +1 or -1
    unsigned long cf_period = 0;

    bool pell_identity_holds() const {
        return a * a - d * b * b == Int(norm) * denom * denom;
    }
};

// Computed via the continued fraction of sqrt(d) with exact integer state;
// for d = 1 mod 4 the half-integer unit of the maximal order is recovered
// from the cube-root trace equation. Throws std::invalid_argument for
// d < 2 or d not squarefree.
QuadUnit fundamental_unit(const Int& d);

// Process-wide memoized variant, safe for concurrent callers.
QuadUnit fundamental_unit_cached(const Int& d);

// Which factorization of (x-1)(x+1) = d*y^2 holds for a norm +1 unit.
// Named after the square witness: x-1, p(x-1) or 2p(x+1) is a square in N.
enum class SqrtCase { x_minus_1, p_x_minus_1, two_p_x_plus_1 };

const char* to_string(SqrtCase c);

// Exact components of the square root of a norm-one unit (or of 2*unit),
// together with the quadratic identity they satisfy:
//   x_minus_1      : x-1 = c1^2,   x+1 = m*c2^2
//   p_x_minus_1    : x-1 = p*c1^2, x+1 = (m/p)*c2^2
//   two_p_x_plus_1 : x+1 = 2p*c1^2, x-1 = (m/2p)*c2^2   (m even)
//                    x+1 = 2p*c1^2, x-1 = 2(m/p)*c2^2   (m odd)
// For the eps_{2p} decomposition case_tag is absent and u_sign holds the
// sign in (c1^2 - 2p*c2^2)/2 = (-1)^u_sign.
struct SqrtDecomposition {
    QuadUnit source;
    std::optional<SqrtCase> case_tag;
    Int c1, c2;
    std::optional<int> u_sign;
};

// Resolves the trichotomy for a norm +1 unit of radicand m in
// {q, 2q, pq, 2pq}. Pass p = 1 for the q / 2q shapes (only the plain
// split is admissible there). Exactly one case must hold; zero matches
// throw std::domain_error("no admissible case") and two or more throw
// std::logic_error.
SqrtDecomposition sqrt_case(const QuadUnit& unit, const Int& p);

// sqrt(eps_2p) = (c1 + c2*sqrt(2p))/sqrt(2) for p = 1 mod 8 and
// N(eps_2p) = +1, with (c1^2 - 2p*c2^2)/2 = (-1)^u_sign and b = c1*c2.
SqrtDecomposition eps2p_decompose(const QuadUnit& unit);

// File-backed unit cache: one JSON record per line with all integers as
// decimal strings. Concurrent readers are fine; insertion appends a single
// line atomically (last writer wins on identical values).
class UnitCache {
  public:
    explicit UnitCache(std::filesystem::path path);
    ~UnitCache();
    UnitCache(const UnitCache&) = delete;
    UnitCache& operator=(const UnitCache&) = delete;

    std::optional<QuadUnit> lookup(const Int& d) const;
    void insert(const QuadUnit& u);
    const std::filesystem::path& path() const { return path_; }

  private:
    struct Impl;
    Impl* impl_;
    std::filesystem::path path_;
};

// Memoized unit computation that also consults/updates a file cache.
QuadUnit fundamental_unit_cached(const Int& d, UnitCache* cache);

}  // namespace triq

#endif
