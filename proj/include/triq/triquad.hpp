#ifndef TRIQ_TRIQUAD_HPP
#define TRIQ_TRIQUAD_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triq/arith.hpp"
#include "triq/class2.hpp"
#include "triq/kfield.hpp"
#include "triq/pell.hpp"

namespace triq {

// Which classification case a pair (p, q) falls into. The C1..C9 family is
// indexed by the square-case pair (x_case, v_case); easy_1..easy_7 are the
// odd-class-number cases.
enum class CaseLabel {
    thm_3_3,
    c1, c2, c3, c4, c5, c6, c7, c8, c9,
    easy_1, easy_2, easy_3, easy_4, easy_5, easy_6, easy_7,
    unsupported,
};

// Wire names: "Thm3.3", "Thm3.5".."Thm3.11" for c1..c7, "C8", "C9",
// "Thm3.12/1".."Thm3.12/7", "Unsupported".
std::string to_string(CaseLabel label);

enum class AlphaValue { zero, one, unresolved };

struct Classification {
    Int p, q;
    int p_mod8 = 0, q_mod8 = 0;
    int legendre_pq = 0;
    std::optional<int> norm_eps_2p;
    std::optional<SqrtCase> x_case;  // square case of eps_2pq
    std::optional<SqrtCase> v_case;  // square case of eps_pq
    std::optional<int> u_sign;
    CaseLabel theorem = CaseLabel::unsupported;
    int norm_case = 0;  // 1 when N(eps_2p) = -1, 2 when +1; 0 for the easy cases
    std::map<std::string, AlphaValue> alpha_bits;  // starts unresolved
    std::string note;   // unsupported: nearest family

    // e.g. "Thm3.3/N=+1", "Thm3.12/4", "C8/N=-1"
    std::string full_label() const;
};

// Maps (p, q) to its case. Rejects non-prime, even or equal inputs with
// std::invalid_argument; configurations outside the classified families
// come back with theorem = unsupported, never a guess.
Classification classify(const Int& p, const Int& q, UnitCache* cache = nullptr);

// Formal unit: exponent vector over the seven base units
// (eps_2, eps_p, eps_q, eps_2p, eps_2q, eps_pq, eps_2pq), denominators
// powers of 2 up to 4, plus a sign.
struct UnitSymbol {
    std::array<Rat, 7> exponents;
    int sign = 1;
    std::string label;
};

enum class GroupShape { trivial, cyclic, two_two, unknown };
const char* to_string(GroupShape s);

struct UnitGroupReport {
    Classification cls;
    std::vector<UnitSymbol> generators;  // 7 entries; -1 is implied
    bool resolved = true;                // all alpha bits decided
    Int q_index;                         // (E_K : prod E_subfields), power of 2
    Int h2_K;
    std::vector<Int> q_index_candidates; // when unresolved, by bit assignment order
    std::vector<Int> h2_candidates;
    GroupShape structure = GroupShape::unknown;
    bool kuroda_consistent = false;
    std::map<Int, Int> subfield_h2;      // radicand -> h2 for {2,p,q,2p,2q,pq,2pq}
    std::vector<std::string> certificates;
};

// Emits the generator list for the classified case, resolves alpha bits
// through the exact square test, computes the unit index from the exponent
// matrix determinant, the 2-class number from the case formula, and
// cross-checks with the class number formula.
UnitGroupReport unit_group(const Classification& c, const SquareTestConfig& cfg = {},
                           UnitCache* cache = nullptr);

// h2(K) = q_index * prod h2(m) / 2^9 over m in {2,p,q,2p,2q,pq,2pq}.
// Throws std::runtime_error("non-integral Kuroda value") when the result
// is not a positive integer.
Int kuroda_h2(const Int& p, const Int& q, const Int& q_index);

// The 2-power exponent v in the degree-2^n class number formula:
// n(2^(n-1)-1) for real fields, (n-1)(2^(n-2)-1)+2^(n-1)-1 for imaginary.
int kuroda_v(int n, bool real);

// Klein-group criteria on the (p = 1 mod 8, q = 3 mod 8, (p|q) = +1)
// family; false for every other family.
bool type22_check(const Classification& c, const UnitGroupReport& r);

// Memoized h2 (process-wide), used by the sweep paths.
Int h2_cached(const Int& d);

}  // namespace triq

#endif
