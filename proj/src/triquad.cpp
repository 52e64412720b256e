#include "triq/triquad.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace triq {

namespace {

using ExpVec = std::array<Rat, 7>;

const char* kBaseNames[7] = {"eps2", "epsP", "epsQ", "eps2P", "eps2Q", "epsPQ", "eps2PQ"};

ExpVec ev(std::initializer_list<std::pair<int, Rat>> terms) {
    ExpVec v{};
    for (auto& [i, c] : terms) v[i] += c;
    return v;
}

const Rat kHalf(1, 2);
const Rat kQuarter(1, 4);

std::string label_of(const ExpVec& v) {
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < 7; ++i) {
        if (v[i] == 0) continue;
        if (!first) os << "*";
        os << kBaseNames[i];
        if (v[i] != 1) os << "^" << v[i].get_str();
        first = false;
    }
    if (first) os << "1";
    return os.str();
}

Rat det7(std::array<ExpVec, 7> m) {
    Rat det = 1;
    for (int col = 0; col < 7; ++col) {
        int piv = -1;
        for (int r = col; r < 7; ++r)
            if (m[r][col] != 0) { piv = r; break; }
        if (piv < 0) return Rat(0);
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det *= m[col][col];
        for (int r = col + 1; r < 7; ++r) {
            if (m[r][col] == 0) continue;
            Rat f = m[r][col] / m[col][col];
            for (int cc = col; cc < 7; ++cc) m[r][cc] -= f * m[col][cc];
        }
    }
    return det;
}

Int q_index_from_det(const Rat& det) {
    if (det == 0) throw std::logic_error("unit_group: singular exponent matrix");
    Rat a = abs(det);
    if (a.get_num() != 1) throw std::logic_error("unit_group: determinant is not a 2-power");
    Int den = a.get_den();
    if (mpz_popcount(den.get_mpz_t()) != 1)
        throw std::logic_error("unit_group: determinant is not a 2-power");
    return den;
}

// --- per-theorem data -------------------------------------------------------

// Pieces the square-test candidate elements are built from.
enum class Piece { eps2, epsp, sq_q, sq_2q, sq_pq, sq_2pq, sq_2p, sq_pq2pq };

struct PieceRef {
    Piece piece;
    char exp;  // '1' fixed, 'a' (a = 1+u mod 2) or 'u'
};

struct BitSpec {
    std::string name;
    std::vector<PieceRef> element;
};

struct Plan {
    std::vector<BitSpec> bits;
    // generator exponent vectors as a function of the resolved bit values
    std::function<std::vector<ExpVec>(const std::vector<int>&)> generators;
    // h2 = prod3 / 2^(4 - reduction(bits)) for the C family
    std::function<int(const std::vector<int>&)> h2_reduction;
    bool expects_q_exponent = true;  // q_index == 2^(5 + sum(bits))
};

std::vector<ExpVec> with_p5(std::initializer_list<ExpVec> tail) {
    std::vector<ExpVec> g = {
        ev({{0, 1}}),          // eps_2
        ev({{1, 1}}),          // eps_p
        ev({{2, kHalf}}),      // sqrt eps_q
        ev({{4, kHalf}}),      // sqrt eps_2q
        ev({{5, kHalf}}),      // sqrt eps_pq
    };
    for (const ExpVec& v : tail) g.push_back(v);
    return g;
}

const ExpVec kSqrt2pq = ev({{6, kHalf}});
const ExpVec kSqrt2p = ev({{3, kHalf}});
const ExpVec kW = ev({{0, kHalf}, {1, kHalf}, {3, kHalf}});  // sqrt(eps2 epsP eps2P)
const ExpVec kLambda = ev({{2, kQuarter}, {4, kQuarter}, {5, kQuarter}, {6, kQuarter}});

// nested generator sqrt(eps2^a epsP^b' * quarter-root block)
ExpVec nested(int a_exp, int u_exp, std::initializer_list<int> quarter_idx) {
    ExpVec v{};
    v[0] += Rat(a_exp) * kHalf;
    v[1] += Rat(u_exp) * kHalf;
    for (int i : quarter_idx) v[i] += kQuarter;
    return v;
}

Plan c_theorem_plan(CaseLabel label, int norm_case, int a_bit, int u_bit) {
    Plan plan;

    auto one_alpha = [&](std::vector<PieceRef> elem) {
        plan.bits.push_back({"alpha", std::move(elem)});
    };

    if (norm_case == 1) {
        switch (label) {
            case CaseLabel::c1:
                plan.bits.push_back({"a",
                                     {{Piece::sq_q, '1'},
                                      {Piece::sq_2q, '1'},
                                      {Piece::sq_pq, '1'},
                                      {Piece::sq_2pq, '1'}}});
                plan.generators = [](const std::vector<int>& b) {
                    return with_p5({kW, b[0] ? kLambda : kSqrt2pq});
                };
                plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
                return plan;
            case CaseLabel::c6:
                one_alpha({{Piece::epsp, '1'}, {Piece::sq_2q, '1'}, {Piece::sq_pq2pq, '1'}});
                plan.generators = [](const std::vector<int>& b) {
                    std::vector<ExpVec> g = {ev({{0, 1}}), ev({{1, 1}}), ev({{2, kHalf}}),
                                             ev({{5, kHalf}}), ev({{6, kHalf}}), kW};
                    g.push_back(b[0] ? nested(0, 1, {4, 5, 6}) : ev({{4, kHalf}}));
                    return g;
                };
                // uniform template: the stated case value omits alpha, but the
                // generator list at alpha = 1 forces q = 2^6 and the class
                // number formula then fixes the 2^(4-alpha) denominator
                plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
                return plan;
            case CaseLabel::c8:
                one_alpha({{Piece::epsp, '1'}, {Piece::sq_q, '1'}, {Piece::sq_pq2pq, '1'}});
                plan.generators = [](const std::vector<int>& b) {
                    std::vector<ExpVec> g = {ev({{0, 1}}), ev({{1, 1}}), ev({{4, kHalf}}),
                                             ev({{5, kHalf}}), ev({{6, kHalf}}), kW};
                    g.push_back(b[0] ? nested(0, 1, {2, 5, 6}) : ev({{2, kHalf}}));
                    return g;
                };
                plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
                return plan;
            default:
                plan.generators = [](const std::vector<int>&) {
                    return with_p5({kSqrt2pq, kW});
                };
                plan.h2_reduction = [](const std::vector<int>&) { return 0; };
                return plan;
        }
    }

    // norm_case == 2: N(eps_2p) = +1, with a = 1 + u mod 2
    switch (label) {
        case CaseLabel::c1:
            plan.bits.push_back({"r_prime",
                                 {{Piece::eps2, 'a'},
                                  {Piece::epsp, 'a'},
                                  {Piece::sq_q, '1'},
                                  {Piece::sq_pq, '1'},
                                  {Piece::sq_2p, '1'}}});
            plan.bits.push_back({"r",
                                 {{Piece::eps2, 'a'},
                                  {Piece::epsp, 'a'},
                                  {Piece::sq_2q, '1'},
                                  {Piece::sq_2pq, '1'},
                                  {Piece::sq_2p, '1'}}});
            plan.generators = [a_bit](const std::vector<int>& b) {
                return with_p5({b[0] ? nested(a_bit, a_bit, {2, 5, 3}) : kSqrt2p,
                                b[1] ? nested(a_bit, a_bit, {4, 6, 3}) : kSqrt2pq});
            };
            plan.h2_reduction = [](const std::vector<int>& b) { return b[0] + b[1]; };
            return plan;
        case CaseLabel::c2:
        case CaseLabel::c3:
            plan.bits.push_back({"alpha",
                                 {{Piece::eps2, 'a'},
                                  {Piece::epsp, 'a'},
                                  {Piece::sq_2q, '1'},
                                  {Piece::sq_2pq, '1'},
                                  {Piece::sq_2p, '1'}}});
            plan.generators = [a_bit](const std::vector<int>& b) {
                return with_p5({kSqrt2pq, b[0] ? nested(a_bit, a_bit, {4, 6, 3}) : kSqrt2p});
            };
            plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
            return plan;
        case CaseLabel::c4:
        case CaseLabel::c7:
            plan.bits.push_back({"alpha",
                                 {{Piece::eps2, 'a'},
                                  {Piece::epsp, 'a'},
                                  {Piece::sq_q, '1'},
                                  {Piece::sq_pq, '1'},
                                  {Piece::sq_2p, '1'}}});
            plan.generators = [a_bit](const std::vector<int>& b) {
                return with_p5({kSqrt2pq, b[0] ? nested(a_bit, a_bit, {2, 5, 3}) : kSqrt2p});
            };
            plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
            return plan;
        case CaseLabel::c5:
        case CaseLabel::c6:
            plan.bits.push_back({"alpha",
                                 {{Piece::eps2, 'a'},
                                  {Piece::epsp, 'u'},
                                  {Piece::sq_q, '1'},
                                  {Piece::sq_2q, '1'},
                                  {Piece::sq_pq, '1'},
                                  {Piece::sq_2pq, '1'},
                                  {Piece::sq_2p, '1'}}});
            plan.generators = [a_bit, u_bit](const std::vector<int>& b) {
                return with_p5(
                    {kSqrt2pq, b[0] ? nested(a_bit, u_bit, {2, 4, 5, 6, 3}) : kSqrt2p});
            };
            plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
            return plan;
        case CaseLabel::c8:
            plan.bits.push_back(
                {"alpha", {{Piece::epsp, '1'}, {Piece::sq_q, '1'}, {Piece::sq_pq2pq, '1'}}});
            plan.generators = [](const std::vector<int>& b) {
                std::vector<ExpVec> g = {ev({{0, 1}}), ev({{1, 1}}), ev({{4, kHalf}}),
                                         ev({{5, kHalf}}), ev({{6, kHalf}}), kSqrt2p};
                g.push_back(b[0] ? nested(0, 1, {2, 5, 6}) : ev({{2, kHalf}}));
                return g;
            };
            plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
            return plan;
        case CaseLabel::c9:
            plan.bits.push_back({"alpha",
                                 {{Piece::eps2, 'a'},
                                  {Piece::epsp, 'u'},
                                  {Piece::sq_pq2pq, '1'},
                                  {Piece::sq_2p, '1'}}});
            plan.generators = [a_bit, u_bit](const std::vector<int>& b) {
                return with_p5({kSqrt2pq, b[0] ? nested(a_bit, u_bit, {5, 6, 3}) : kSqrt2p});
            };
            plan.h2_reduction = [](const std::vector<int>& b) { return b[0]; };
            return plan;
        default:
            throw std::logic_error("c_theorem_plan: not a C-family label");
    }
}

std::vector<ExpVec> easy_generators(int item) {
    switch (item) {
        case 1:
            return {ev({{0, 1}}), ev({{2, kHalf}}), ev({{4, kHalf}}), ev({{1, kHalf}}),
                    ev({{6, kHalf}}),
                    ev({{4, kQuarter}, {5, kQuarter}, {6, kQuarter}}),
                    ev({{0, kHalf}, {2, kQuarter}, {4, kQuarter}, {1, kQuarter}, {3, kQuarter}})};
        case 2:
            return {ev({{0, 1}}), ev({{2, kHalf}}), ev({{3, kHalf}}), ev({{5, kHalf}}),
                    ev({{6, kHalf}}),
                    ev({{2, kQuarter}, {1, kQuarter}, {3, kQuarter}, {5, kQuarter}, {6, kQuarter}}),
                    ev({{0, kHalf}, {4, kQuarter}, {5, kQuarter}, {6, kQuarter}})};
        case 3:
            return with_p5({kW, ev({{4, kQuarter}, {5, kQuarter}, {6, kQuarter}})});
        case 4:
            return with_p5(
                {kW, ev({{0, kHalf}, {2, kQuarter}, {5, kQuarter}, {6, kQuarter}})});
        case 5:
            return with_p5(
                {kW, ev({{1, kHalf}, {4, kQuarter}, {5, kQuarter}, {6, kQuarter}})});
        case 6:
            return with_p5({kW, ev({{0, kHalf}, {1, kHalf}, {2, kQuarter}, {5, kQuarter},
                                    {6, kQuarter}})});
        case 7:
            return {ev({{0, 1}}), ev({{1, kHalf}}), ev({{3, kHalf}}), ev({{2, kHalf}}),
                    ev({{5, kHalf}}),
                    ev({{1, kQuarter}, {2, kQuarter}, {6, kQuarter}}),
                    ev({{3, kQuarter}, {4, kQuarter}, {6, kQuarter}})};
    }
    throw std::logic_error("easy_generators: bad item");
}

std::vector<std::string> alpha_bit_names(CaseLabel label, int norm_case) {
    if (norm_case == 1) {
        if (label == CaseLabel::c1) return {"a"};
        if (label == CaseLabel::c6 || label == CaseLabel::c8) return {"alpha"};
        return {};
    }
    if (norm_case == 2) {
        if (label == CaseLabel::thm_3_3) return {};
        if (label == CaseLabel::c1) return {"r_prime", "r"};
        switch (label) {
            case CaseLabel::c2: case CaseLabel::c3: case CaseLabel::c4:
            case CaseLabel::c5: case CaseLabel::c6: case CaseLabel::c7:
            case CaseLabel::c8: case CaseLabel::c9:
                return {"alpha"};
            default: break;
        }
    }
    return {};
}

int easy_item_of(CaseLabel label) {
    switch (label) {
        case CaseLabel::easy_1: return 1;
        case CaseLabel::easy_2: return 2;
        case CaseLabel::easy_3: return 3;
        case CaseLabel::easy_4: return 4;
        case CaseLabel::easy_5: return 5;
        case CaseLabel::easy_6: return 6;
        case CaseLabel::easy_7: return 7;
        default: return 0;
    }
}

}  // namespace

std::string to_string(CaseLabel label) {
    switch (label) {
        case CaseLabel::thm_3_3: return "Thm3.3";
        case CaseLabel::c1: return "Thm3.5";
        case CaseLabel::c2: return "Thm3.6";
        case CaseLabel::c3: return "Thm3.7";
        case CaseLabel::c4: return "Thm3.8";
        case CaseLabel::c5: return "Thm3.9";
        case CaseLabel::c6: return "Thm3.10";
        case CaseLabel::c7: return "Thm3.11";
        case CaseLabel::c8: return "C8";
        case CaseLabel::c9: return "C9";
        case CaseLabel::easy_1: return "Thm3.12/1";
        case CaseLabel::easy_2: return "Thm3.12/2";
        case CaseLabel::easy_3: return "Thm3.12/3";
        case CaseLabel::easy_4: return "Thm3.12/4";
        case CaseLabel::easy_5: return "Thm3.12/5";
        case CaseLabel::easy_6: return "Thm3.12/6";
        case CaseLabel::easy_7: return "Thm3.12/7";
        case CaseLabel::unsupported: return "Unsupported";
    }
    return "?";
}

const char* to_string(GroupShape s) {
    switch (s) {
        case GroupShape::trivial: return "trivial";
        case GroupShape::cyclic: return "cyclic";
        case GroupShape::two_two: return "two_two";
        case GroupShape::unknown: return "unknown";
    }
    return "?";
}

std::string Classification::full_label() const {
    if (theorem == CaseLabel::unsupported) return "Unsupported";
    std::string s = triq::to_string(theorem);
    if (norm_case == 1) s += "/N=-1";
    if (norm_case == 2) s += "/N=+1";
    return s;
}

Classification classify(const Int& p, const Int& q, UnitCache* cache) {
    if (!is_prime(p)) throw std::invalid_argument(p.get_str() + " is not prime");
    if (!is_prime(q)) throw std::invalid_argument(q.get_str() + " is not prime");
    if (p == q) throw std::invalid_argument("p and q must be distinct");
    if (p == 2 || q == 2) throw std::invalid_argument("p and q must be odd");

    Classification c;
    c.p = p;
    c.q = q;
    c.p_mod8 = (int)mpz_fdiv_ui(p.get_mpz_t(), 8);
    c.q_mod8 = (int)mpz_fdiv_ui(q.get_mpz_t(), 8);
    c.legendre_pq = legendre(p, q);

    if (c.p_mod8 == 1 && c.q_mod8 == 3) {
        QuadUnit u2p = fundamental_unit_cached(2 * p, cache);
        c.norm_eps_2p = u2p.norm;
        c.norm_case = (u2p.norm == -1) ? 1 : 2;
        if (u2p.norm == 1) c.u_sign = eps2p_decompose(u2p).u_sign;
        if (c.legendre_pq == -1) {
            c.theorem = CaseLabel::thm_3_3;
        } else {
            c.x_case = sqrt_case(fundamental_unit_cached(2 * p * q, cache), p).case_tag;
            c.v_case = sqrt_case(fundamental_unit_cached(p * q, cache), p).case_tag;
            static const CaseLabel grid[3][3] = {
                // v: x_minus_1, p_x_minus_1, two_p_x_plus_1
                {CaseLabel::c1, CaseLabel::c2, CaseLabel::c3},  // x = x_minus_1
                {CaseLabel::c4, CaseLabel::c5, CaseLabel::c6},  // x = p_x_minus_1
                {CaseLabel::c7, CaseLabel::c8, CaseLabel::c9},  // x = two_p_x_plus_1
            };
            c.theorem = grid[(int)*c.x_case][(int)*c.v_case];
        }
        for (const std::string& n : alpha_bit_names(c.theorem, c.norm_case))
            c.alpha_bits[n] = AlphaValue::unresolved;
        return c;
    }

    auto easy = [&](int item) {
        static const CaseLabel items[] = {CaseLabel::easy_1, CaseLabel::easy_2, CaseLabel::easy_3,
                                          CaseLabel::easy_4, CaseLabel::easy_5, CaseLabel::easy_6,
                                          CaseLabel::easy_7};
        c.theorem = items[item - 1];
    };
    if (c.p_mod8 == 3 && c.q_mod8 == 7) easy(c.legendre_pq == 1 ? 1 : 2);
    else if (c.p_mod8 == 5 && c.q_mod8 == 7) easy(c.legendre_pq == 1 ? 3 : 4);
    else if (c.p_mod8 == 5 && c.q_mod8 == 3) easy(c.legendre_pq == 1 ? 5 : 6);
    else if (c.p_mod8 == 3 && c.q_mod8 == 3) easy(7);
    else {
        c.theorem = CaseLabel::unsupported;
        std::ostringstream os;
        os << "no case covers (p,q) = (" << c.p_mod8 << "," << c.q_mod8 << ") mod 8";
        if (c.p_mod8 == 1 && c.q_mod8 == 7)
            os << "; nearest family needs q = 3 mod 8";
        else if ((c.q_mod8 == 1 || c.q_mod8 == 5) &&
                 (c.p_mod8 == 3 || c.p_mod8 == 7 || c.p_mod8 == 5 || c.p_mod8 == 1))
            os << "; the swapped pair (q,p) may classify";
        c.note = os.str();
    }
    return c;
}

int kuroda_v(int n, bool real) {
    if (n < 1) throw std::invalid_argument("kuroda_v: n >= 1");
    if (real) return n * ((1 << (n - 1)) - 1);
    return (n - 1) * ((1 << (n - 2)) - 1) + (1 << (n - 1)) - 1;
}

namespace {
std::mutex g_h2_mu;
std::map<Int, Int> g_h2_memo;
}  // namespace

Int h2_cached(const Int& d) {
    {
        std::lock_guard lk(g_h2_mu);
        auto it = g_h2_memo.find(d);
        if (it != g_h2_memo.end()) return it->second;
    }
    Int v = h2(d);
    std::lock_guard lk(g_h2_mu);
    g_h2_memo.emplace(d, v);
    return v;
}

Int kuroda_h2(const Int& p, const Int& q, const Int& q_index) {
    if (q_index < 1 || mpz_popcount(q_index.get_mpz_t()) != 1)
        throw std::invalid_argument("kuroda_h2: q_index must be a power of two");
    Int prod = q_index;
    for (const Int& m : {Int(2), p, q, Int(2 * p), Int(2 * q), Int(p * q), Int(2 * p * q)})
        prod *= h2_cached(m);
    Int denom = Int(1) << kuroda_v(3, true);
    if (prod % denom != 0) throw std::runtime_error("non-integral Kuroda value");
    return prod / denom;
}

namespace {

struct UnitData {
    QuadUnit u2, up, uq, u2p, u2q, upq, u2pq;
    SqrtDecomposition dq, d2q, dpq, d2pq;
    std::optional<SqrtDecomposition> d2p;
    int a = 0;  // a = 1 + u mod 2
};

UnitData gather_units(const Classification& c, UnitCache* cache) {
    UnitData u;
    const Int& p = c.p;
    const Int& q = c.q;
    u.u2 = fundamental_unit_cached(2, cache);
    u.up = fundamental_unit_cached(p, cache);
    u.uq = fundamental_unit_cached(q, cache);
    u.u2p = fundamental_unit_cached(2 * p, cache);
    u.u2q = fundamental_unit_cached(2 * q, cache);
    u.upq = fundamental_unit_cached(p * q, cache);
    u.u2pq = fundamental_unit_cached(2 * p * q, cache);
    u.dq = sqrt_case(u.uq, 1);
    u.d2q = sqrt_case(u.u2q, 1);
    u.dpq = sqrt_case(u.upq, p);
    u.d2pq = sqrt_case(u.u2pq, p);
    if (c.theorem == CaseLabel::thm_3_3) {
        if (u.dpq.case_tag != SqrtCase::x_minus_1 || u.d2pq.case_tag != SqrtCase::x_minus_1)
            throw std::logic_error("unit_group: (p|q) = -1 forces the x-1 case");
    }
    if (c.norm_case == 2) {
        u.d2p = eps2p_decompose(u.u2p);
        u.a = 1 - u.d2p->u_sign.value();
    }
    return u;
}

}  // namespace

UnitGroupReport unit_group(const Classification& c, const SquareTestConfig& cfg,
                           UnitCache* cache) {
    if (c.theorem == CaseLabel::unsupported)
        throw std::invalid_argument("unit_group: unsupported classification");

    const Int& p = c.p;
    const Int& q = c.q;
    UnitGroupReport r;
    r.cls = c;
    for (const Int& m : {Int(2), p, q, Int(2 * p), Int(2 * q), Int(p * q), Int(2 * p * q)})
        r.subfield_h2[m] = h2_cached(m);
    Int prod3 = r.subfield_h2[2 * p] * r.subfield_h2[p * q] * r.subfield_h2[2 * p * q];

    auto finish_generators = [&r](const std::vector<ExpVec>& gens) {
        r.generators.clear();
        std::array<ExpVec, 7> m;
        for (int i = 0; i < 7; ++i) {
            UnitSymbol s;
            s.exponents = gens[i];
            s.sign = 1;
            s.label = label_of(gens[i]);
            r.generators.push_back(s);
            m[i] = gens[i];
        }
        return q_index_from_det(det7(m));
    };

    if (int item = easy_item_of(c.theorem)) {
        r.q_index = finish_generators(easy_generators(item));
        r.h2_K = 1;
        r.resolved = true;
        r.structure = GroupShape::trivial;
        r.kuroda_consistent = (kuroda_h2(p, q, r.q_index) == r.h2_K);
        return r;
    }

    UnitData U = gather_units(c, cache);

    // explicit K-embeddings of the pieces used by the square tests
    auto k_eps2 = KElement::from_quad_unit(p, q, U.u2);
    auto k_epsp = KElement::from_quad_unit(p, q, U.up);
    std::optional<KElement> k_sqpq2pq;  // root of eps_pq * eps_2pq, on demand
    bool pq2pq_inconclusive = false;

    auto piece_element = [&](const PieceRef& pr) -> std::optional<KElement> {
        int e = 1;
        if (pr.exp == 'a') e = U.a;
        if (pr.exp == 'u') e = *c.u_sign;
        if (e == 0) return KElement::one(p, q);
        switch (pr.piece) {
            case Piece::eps2: return k_eps2;
            case Piece::epsp: return k_epsp;
            case Piece::sq_q: return sqrt_unit_element(p, q, U.dq);
            case Piece::sq_2q: return sqrt_unit_element(p, q, U.d2q);
            case Piece::sq_pq: return sqrt_unit_element(p, q, U.dpq);
            case Piece::sq_2pq: return sqrt_unit_element(p, q, U.d2pq);
            case Piece::sq_2p: return sqrt_unit_element(p, q, *U.d2p);
            case Piece::sq_pq2pq: {
                if (k_sqpq2pq) return *k_sqpq2pq;
                if (pq2pq_inconclusive) return std::nullopt;
                KElement prod = KElement::from_quad_unit(p, q, U.upq) *
                                KElement::from_quad_unit(p, q, U.u2pq);
                SquareTestResult st = is_square_in_K(prod, cfg);
                if (st.answer == SquareAnswer::is_square) {
                    k_sqpq2pq = *st.root;
                    return *k_sqpq2pq;
                }
                if (st.answer == SquareAnswer::inconclusive) {
                    pq2pq_inconclusive = true;
                    r.certificates.push_back("sqrt(epsPQ*eps2PQ): inconclusive at precision " +
                                             std::to_string(st.precision_used));
                    return std::nullopt;
                }
                throw std::logic_error(
                    "unit_group: eps_pq*eps_2pq is not a square, contradicting the subfield "
                    "unit system");
            }
        }
        return std::nullopt;
    };

    Plan plan = (c.theorem == CaseLabel::thm_3_3)
                    ? Plan{}
                    : c_theorem_plan(c.theorem, c.norm_case, U.a, c.u_sign.value_or(0));

    // resolve the alpha bits by the exact square test
    std::vector<int> bits(plan.bits.size(), -1);
    for (size_t i = 0; i < plan.bits.size(); ++i) {
        const BitSpec& bs = plan.bits[i];
        std::optional<KElement> elem = KElement::one(p, q);
        for (const PieceRef& pr : bs.element) {
            auto pe = piece_element(pr);
            if (!pe) { elem.reset(); break; }
            elem = *elem * *pe;
        }
        if (!elem) {
            r.cls.alpha_bits[bs.name] = AlphaValue::unresolved;
            continue;
        }
        SquareTestResult st = is_square_in_K(*elem, cfg);
        std::ostringstream cert;
        cert << bs.name << ": ";
        switch (st.answer) {
            case SquareAnswer::is_square:
                bits[i] = 1;
                r.cls.alpha_bits[bs.name] = AlphaValue::one;
                cert << "square (root verified exactly, precision " << st.precision_used << ")";
                break;
            case SquareAnswer::not_square_within_bound:
                bits[i] = 0;
                r.cls.alpha_bits[bs.name] = AlphaValue::zero;
                cert << "not a square (certified up to denominator bound "
                     << st.denom_bound_used.get_str() << ", precision " << st.precision_used
                     << ")";
                break;
            case SquareAnswer::inconclusive:
                r.cls.alpha_bits[bs.name] = AlphaValue::unresolved;
                cert << "inconclusive at precision ceiling " << st.precision_used;
                break;
        }
        r.certificates.push_back(cert.str());
    }
    r.resolved = std::all_of(bits.begin(), bits.end(), [](int b) { return b >= 0; });

    auto theorem_h2 = [&](const std::vector<int>& bvals) -> Int {
        if (c.theorem == CaseLabel::thm_3_3) {
            Int h2p = r.subfield_h2[2 * p];
            if (c.norm_case == 1) {
                if (mpz_odd_p(h2p.get_mpz_t()))
                    throw std::logic_error("unit_group: h2(2p) must be even here");
                return h2p / 2;
            }
            return h2p;
        }
        int red = plan.h2_reduction(bvals);
        Int denom = Int(1) << (4 - red);
        if (prod3 % denom != 0) throw std::logic_error("unit_group: non-integral case formula");
        return prod3 / denom;
    };

    auto generators_for = [&](const std::vector<int>& bvals) -> std::vector<ExpVec> {
        if (c.theorem == CaseLabel::thm_3_3) {
            if (c.norm_case == 1) return with_p5({kW, kLambda});
            return with_p5({nested(U.a, U.a, {2, 5, 3}), nested(U.a, U.a, {4, 6, 3})});
        }
        return plan.generators(bvals);
    };

    auto expected_q = [&](const std::vector<int>& bvals) -> std::optional<Int> {
        if (c.theorem == CaseLabel::thm_3_3) return Int(1) << (c.norm_case == 1 ? 6 : 7);
        int s = 0;
        for (int b : bvals) s += b;
        return Int(1) << (5 + s);
    };

    if (r.resolved) {
        r.q_index = finish_generators(generators_for(bits));
        if (auto eq = expected_q(bits); eq && *eq != r.q_index)
            throw std::logic_error("unit_group: determinant disagrees with the stated unit index");
        r.h2_K = theorem_h2(bits);
        r.kuroda_consistent = (kuroda_h2(p, q, r.q_index) == r.h2_K);
        if (c.theorem == CaseLabel::c6 && c.norm_case == 1 && !bits.empty() && bits[0] == 1)
            r.certificates.push_back(
                "case formula corrected: alpha = 1 makes q(K) = 2^6, so the 2-class number "
                "carries the 2^(4-alpha) denominator");
    } else {
        // enumerate unresolved assignments in lexicographic order
        std::vector<size_t> open;
        for (size_t i = 0; i < bits.size(); ++i)
            if (bits[i] < 0) open.push_back(i);
        for (unsigned mask = 0; mask < (1u << open.size()); ++mask) {
            std::vector<int> bv = bits;
            for (size_t j = 0; j < open.size(); ++j) bv[open[j]] = (mask >> j) & 1;
            std::array<ExpVec, 7> m;
            auto gens = generators_for(bv);
            for (int i = 0; i < 7; ++i) m[i] = gens[i];
            r.q_index_candidates.push_back(q_index_from_det(det7(m)));
            r.h2_candidates.push_back(theorem_h2(bv));
        }
        // emit the all-zero assignment's generator list for reference
        std::vector<int> bv = bits;
        for (size_t i : open) bv[i] = 0;
        r.q_index = finish_generators(generators_for(bv));
        r.h2_K = 0;  // not resolved; consumers must use h2_candidates
        r.kuroda_consistent = false;
        r.structure = GroupShape::unknown;
        return r;
    }

    // group structure
    if (r.h2_K == 1) {
        r.structure = GroupShape::trivial;
    } else if (c.theorem == CaseLabel::thm_3_3) {
        r.structure = GroupShape::cyclic;
    } else if (type22_check(r.cls, r)) {
        r.structure = GroupShape::two_two;
        if (r.h2_K != 4)
            throw std::logic_error("unit_group: type (2,2) criteria met but h2(K) != 4");
    } else if (r.h2_K == 2) {
        r.structure = GroupShape::cyclic;
    } else {
        r.structure = GroupShape::unknown;
    }
    return r;
}

bool type22_check(const Classification& c, const UnitGroupReport& r) {
    if (!(c.p_mod8 == 1 && c.q_mod8 == 3 && c.legendre_pq == 1)) return false;
    if (!c.x_case || !c.v_case) return false;
    Int h2pq = r.subfield_h2.at(c.p * c.q);
    Int h22pq = r.subfield_h2.at(2 * c.p * c.q);
    Int h22p = r.subfield_h2.at(2 * c.p);

    bool both_x = (*c.x_case == SqrtCase::x_minus_1 && *c.v_case == SqrtCase::x_minus_1);
    bool cond1 = (h2pq == 4 && h22pq == 4 && h22p == 2 && !both_x);

    bool pair_ok = false;
    if (c.norm_eps_2p == -1) {
        using SC = SqrtCase;
        const std::pair<SC, SC> allowed[] = {
            {SC::x_minus_1, SC::two_p_x_plus_1}, {SC::x_minus_1, SC::p_x_minus_1},
            {SC::p_x_minus_1, SC::x_minus_1},    {SC::p_x_minus_1, SC::p_x_minus_1},
            {SC::two_p_x_plus_1, SC::x_minus_1}, {SC::two_p_x_plus_1, SC::two_p_x_plus_1},
        };
        for (auto& [x, v] : allowed)
            if (*c.x_case == x && *c.v_case == v) pair_ok = true;
    }
    bool cond2 = pair_ok && h2pq == 4 && h22pq == 4 && h22p == 4;
    return cond1 || cond2;
}

}  // namespace triq
