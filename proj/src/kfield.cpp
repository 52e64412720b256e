#include "triq/kfield.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace triq {

namespace {

int sign_of(unsigned monomial_mask, unsigned flip_mask) {
    return (std::popcount(monomial_mask & flip_mask) % 2) ? -1 : 1;
}

}  // namespace

KElement::KElement(Int p, Int q) : p_(std::move(p)), q_(std::move(q)) {
    if (p_ == q_ || p_ < 2 || q_ < 2) throw std::invalid_argument("KElement: bad field (p, q)");
}

KElement KElement::one(const Int& p, const Int& q) {
    KElement x(p, q);
    x.c_[0] = 1;
    return x;
}

KElement KElement::monomial(const Int& p, const Int& q, unsigned mask, const Rat& coeff) {
    if (mask > 7) throw std::invalid_argument("KElement: monomial mask out of range");
    KElement x(p, q);
    x.c_[mask] = coeff;
    x.c_[mask].canonicalize();
    return x;
}

KElement KElement::from_quad_unit(const Int& p, const Int& q, const QuadUnit& u) {
    unsigned mask;
    if (u.d == 2) mask = 1;
    else if (u.d == p) mask = 2;
    else if (u.d == q) mask = 4;
    else if (u.d == 2 * p) mask = 3;
    else if (u.d == 2 * q) mask = 5;
    else if (u.d == p * q) mask = 6;
    else if (u.d == 2 * p * q) mask = 7;
    else throw std::invalid_argument("KElement: radicand " + u.d.get_str() + " not in the field");
    KElement x(p, q);
    x.c_[0] = Rat(u.a, u.denom);
    x.c_[mask] = Rat(u.b, u.denom);
    x.c_[0].canonicalize();
    x.c_[mask].canonicalize();
    return x;
}

Int KElement::radicand(unsigned mask) const {
    Int r = 1;
    if (mask & 1) r *= 2;
    if (mask & 2) r *= p_;
    if (mask & 4) r *= q_;
    return r;
}

void KElement::check_compatible(const KElement& o) const {
    if (p_ != o.p_ || q_ != o.q_) throw std::invalid_argument("KElement: mixed fields");
}

bool KElement::is_zero() const {
    for (const Rat& c : c_)
        if (c != 0) return false;
    return true;
}

bool KElement::operator==(const KElement& o) const {
    if (p_ != o.p_ || q_ != o.q_) return false;
    for (unsigned m = 0; m < 8; ++m)
        if (c_[m] != o.c_[m]) return false;
    return true;
}

KElement KElement::operator+(const KElement& o) const {
    check_compatible(o);
    KElement r(p_, q_);
    for (unsigned m = 0; m < 8; ++m) r.c_[m] = c_[m] + o.c_[m];
    return r;
}

KElement KElement::operator-(const KElement& o) const {
    check_compatible(o);
    KElement r(p_, q_);
    for (unsigned m = 0; m < 8; ++m) r.c_[m] = c_[m] - o.c_[m];
    return r;
}

KElement KElement::operator-() const {
    KElement r(p_, q_);
    for (unsigned m = 0; m < 8; ++m) r.c_[m] = -c_[m];
    return r;
}

KElement KElement::operator*(const KElement& o) const {
    check_compatible(o);
    KElement r(p_, q_);
    for (unsigned m1 = 0; m1 < 8; ++m1) {
        if (c_[m1] == 0) continue;
        for (unsigned m2 = 0; m2 < 8; ++m2) {
            if (o.c_[m2] == 0) continue;
            // sqrt(r1)*sqrt(r2) = g * sqrt(r1 r2 / g^2), g = shared radicands
            Rat term = c_[m1] * o.c_[m2] * radicand(m1 & m2);
            r.c_[m1 ^ m2] += term;
        }
    }
    return r;
}

KElement KElement::operator*(const Rat& s) const {
    KElement r(p_, q_);
    for (unsigned m = 0; m < 8; ++m) r.c_[m] = c_[m] * s;
    return r;
}

KElement KElement::pow(unsigned long e) const {
    KElement acc = one(p_, q_);
    KElement base = *this;
    while (e > 0) {
        if (e & 1) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

KElement KElement::inverse() const {
    if (is_zero()) throw std::domain_error("KElement: inverse of zero");
    KElement conj = one(p_, q_);
    for (unsigned s = 1; s < 8; ++s) conj = conj * apply(GaloisElement{s}, *this);
    KElement n = *this * conj;
    for (unsigned m = 1; m < 8; ++m)
        if (n.c_[m] != 0) throw std::logic_error("KElement: norm not rational");
    if (n.c_[0] == 0) throw std::domain_error("KElement: inverse of zero divisor");
    return conj * Rat(Rat(1) / n.c_[0]);
}

Rat KElement::absolute_norm() const {
    KElement conj = one(p_, q_);
    for (unsigned s = 1; s < 8; ++s) conj = conj * apply(GaloisElement{s}, *this);
    KElement n = *this * conj;
    for (unsigned m = 1; m < 8; ++m)
        if (n.c_[m] != 0) throw std::logic_error("KElement: norm not rational");
    return n.c_[0];
}

std::string KElement::to_string() const {
    static const unsigned order[8] = {0, 1, 2, 4, 3, 5, 6, 7};
    static const char* names[8] = {"1",        "sqrt2",  "sqrtp",  "sqrt2p",
                                   "sqrtq",    "sqrt2q", "sqrtpq", "sqrt2pq"};
    std::ostringstream os;
    bool first = true;
    for (unsigned i = 0; i < 8; ++i) {
        unsigned m = order[i];
        if (c_[m] == 0) continue;
        if (!first) os << " + ";
        os << c_[m].get_str();
        if (m != 0) os << "*" << names[m];
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

KElement apply(GaloisElement sigma, const KElement& x) {
    KElement r = x;
    for (unsigned m = 0; m < 8; ++m)
        if (sign_of(m, sigma.mask) < 0) r.coord(m) = -r.coord(m);
    return r;
}

GaloisElement SubfieldId::stabilizer() const {
    if (kind != Kind::biquadratic)
        throw std::invalid_argument("SubfieldId: quadratic subfields have no single involution");
    return GaloisElement{mask};
}

bool SubfieldId::fixes_monomial(unsigned monomial_mask) const {
    if (kind == Kind::biquadratic) return sign_of(monomial_mask, mask) > 0;
    return monomial_mask == 0 || monomial_mask == mask;
}

KElement rel_norm(const KElement& x, SubfieldId target) {
    GaloisElement sigma = target.stabilizer();
    KElement n = x * apply(sigma, x);
    for (unsigned m = 0; m < 8; ++m)
        if (!target.fixes_monomial(m) && n.coord(m) != 0)
            throw std::logic_error("rel_norm: result escaped the target subfield");
    return n;
}

// ---------------------------------------------------------------------------
// norm tables

GaloisElement norm_map_involution(NormMapId id) {
    switch (id) {
        case norm_1_tau1: return GaloisElement::tau1();
        case norm_1_tau2: return GaloisElement::tau2();
        case norm_1_tau3: return GaloisElement::tau3();
        case norm_1_tau1tau2: return GaloisElement::tau1() * GaloisElement::tau2();
        case norm_1_tau1tau3: return GaloisElement::tau1() * GaloisElement::tau3();
        case norm_1_tau2tau3: return GaloisElement::tau2() * GaloisElement::tau3();
    }
    throw std::invalid_argument("norm_map_involution: bad id");
}

NormTableRow norm_table(UnitKind kind, std::optional<SqrtCase> case_tag) {
    using V = SymbolicUnitValue;
    auto row = [](V a, V b, V c, V d, V e, V f) {
        return NormTableRow{a, b, c, d, e, f};
    };
    // entry order: 1+tau1, 1+tau2, 1+tau3, 1+tau1tau2, 1+tau1tau3, 1+tau2tau3
    switch (kind) {
        case UnitKind::eps_2:
            return row(V{-1, 0}, V{1, 2}, V{1, 2}, V{-1, 0}, V{-1, 0}, V{1, 2});
        case UnitKind::eps_p:
            return row(V{1, 2}, V{-1, 0}, V{1, 2}, V{-1, 0}, V{1, 2}, V{-1, 0});
        case UnitKind::sqrt_eps_q:
            return row(V{-1, 1}, V{1, 1}, V{-1, 0}, V{-1, 1}, V{1, 0}, V{-1, 0});
        case UnitKind::sqrt_eps_2q:
            return row(V{1, 0}, V{1, 1}, V{-1, 0}, V{1, 0}, V{-1, 1}, V{-1, 0});
        case UnitKind::sqrt_eps_2pq: {
            if (!case_tag) throw std::invalid_argument("norm_table: case tag required");
            switch (*case_tag) {
                case SqrtCase::x_minus_1:
                    return NormTableRow{V{1, 0}, V{-1, 0}, std::nullopt,
                                        V{-1, 1}, V{-1, 1}, V{1, 1}};
                case SqrtCase::p_x_minus_1:
                    return NormTableRow{V{1, 0}, V{1, 0}, std::nullopt,
                                        V{1, 1}, V{-1, 1}, V{-1, 1}};
                case SqrtCase::two_p_x_plus_1:
                    return NormTableRow{V{1, 0}, V{-1, 0}, std::nullopt,
                                        V{-1, 1}, V{1, 1}, V{-1, 1}};
            }
            break;
        }
        case UnitKind::sqrt_eps_pq: {
            if (!case_tag) throw std::invalid_argument("norm_table: case tag required");
            switch (*case_tag) {
                case SqrtCase::x_minus_1:
                    return NormTableRow{V{-1, 1}, V{-1, 0}, std::nullopt,
                                        V{1, 0}, V{1, 0}, V{1, 1}};
                case SqrtCase::p_x_minus_1:
                    return NormTableRow{V{-1, 1}, V{1, 0}, std::nullopt,
                                        V{-1, 0}, V{1, 0}, V{-1, 1}};
                case SqrtCase::two_p_x_plus_1:
                    return NormTableRow{V{1, 1}, V{-1, 0}, std::nullopt,
                                        V{-1, 0}, V{1, 0}, V{-1, 1}};
            }
            break;
        }
    }
    throw std::invalid_argument("norm_table: unknown unit kind");
}

KElement sqrt_unit_element(const Int& p, const Int& q, const SqrtDecomposition& dec) {
    const Int& d = dec.source.d;
    const Rat c1(dec.c1), c2(dec.c2);
    const Rat half(1, 2);
    KElement el(p, q);

    auto set = [&el](unsigned mask, const Rat& v) {
        el.coord(mask) = v;
        el.coord(mask).canonicalize();
    };

    if (dec.u_sign.has_value()) {
        // sqrt(eps_2p) = (c1 + c2 sqrt(2p)) / sqrt2 = (c1/2) sqrt2 + c2 sqrt p
        if (d != 2 * p) throw std::invalid_argument("sqrt_unit_element: expected radicand 2p");
        set(1, c1 * half);
        set(2, c2);
    } else if (d == q) {
        set(1, c1 * half);
        set(5, c2 * half);
    } else if (d == 2 * q) {
        set(1, c1 * half);
        set(4, c2);
    } else if (d == p * q) {
        switch (*dec.case_tag) {
            case SqrtCase::x_minus_1: set(1, c1 * half); set(7, c2 * half); break;
            case SqrtCase::p_x_minus_1: set(3, c1 * half); set(5, c2 * half); break;
            case SqrtCase::two_p_x_plus_1: set(2, c1); set(4, c2); break;
        }
    } else if (d == 2 * p * q) {
        switch (*dec.case_tag) {
            case SqrtCase::x_minus_1: set(1, c1 * half); set(6, c2); break;
            case SqrtCase::p_x_minus_1: set(3, c1 * half); set(4, c2); break;
            case SqrtCase::two_p_x_plus_1: set(2, c1); set(5, c2 * half); break;
        }
    } else {
        throw std::invalid_argument("sqrt_unit_element: radicand not supported");
    }

    if (!(el * el == KElement::from_quad_unit(p, q, dec.source)))
        throw std::logic_error("sqrt_unit_element: square check failed for d=" + d.get_str());
    return el;
}

// ---------------------------------------------------------------------------
// exact square test

namespace {

Int cdiv(const Int& a, const Int& b) {
    Int q;
    mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

Int fdiv(const Int& a, const Int& b) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

// Best rational approximation to num/2^W with denominator <= bound, via the
// continued fraction of |num|/2^W (convergents plus the final
// semiconvergent). The caller decides whether the result is close enough.
std::optional<Rat> reconstruct_rational(const Int& num, long W, const Int& bound) {
    bool neg = num < 0;
    Int n = abs(num);
    Int d = Int(1) << W;
    Rat x(n, d);
    x.canonicalize();

    Int hm1 = 1, km1 = 0;  // convergent h_{-1}/k_{-1}
    Int hm2 = 0, km2 = 1;  // convergent h_{-2}/k_{-2}
    std::optional<Rat> best;
    auto consider = [&](const Int& h, const Int& k) {
        if (k <= 0 || k > bound) return;
        Rat c(h, k);
        c.canonicalize();
        if (!best || abs(c - x) < abs(*best - x)) best = c;
    };
    while (d != 0) {
        Int a = fdiv(n, d);
        Int h = a * hm1 + hm2;
        Int k = a * km1 + km2;
        if (k > bound) {
            if (km1 > 0) {
                Int j = (bound - km2) / km1;
                if (j > 0) consider(j * hm1 + hm2, j * km1 + km2);
            }
            break;
        }
        consider(h, k);
        hm2 = hm1; km2 = km1;
        hm1 = h; km1 = k;
        Int r = n - a * d;
        n = d;
        d = r;
    }
    if (!best) return std::nullopt;
    return neg ? Rat(-*best) : *best;
}

}  // namespace

SquareTestResult is_square_in_K(const KElement& xi, const SquareTestConfig& cfg) {
    if (xi.is_zero()) throw std::invalid_argument("is_square_in_K: zero element");
    const Int& p = xi.p();
    const Int& q = xi.q();
    Int bound = cfg.denom_bound.value_or(Int(16 * p * q));
    if (bound < 1) throw std::invalid_argument("is_square_in_K: bad denominator bound");

    SquareTestResult res;
    res.denom_bound_used = bound;

    // sum of |coefficients|, rounded up: part of the error budget
    Int coeff_sum = 8;
    for (unsigned m = 0; m < 8; ++m)
        coeff_sum += cdiv(abs(xi.coord(m).get_num()), xi.coord(m).get_den());

    for (long W = cfg.start_precision; W <= cfg.max_precision; W *= 2) {
        res.precision_used = W;

        // sqrt of each radicand, scaled by 2^W (exact floor)
        std::array<Int, 8> sq;
        std::array<Int, 8> rad;
        for (unsigned m = 0; m < 8; ++m) {
            Int r = 1;
            if (m & 1) r *= 2;
            if (m & 2) r *= p;
            if (m & 4) r *= q;
            rad[m] = r;
            sq[m] = isqrt(r << (2 * W));
        }

        // embedding values of xi, scaled by 2^W
        const Int E1 = coeff_sum;
        std::array<Int, 8> val;
        bool uncertain_sign = false;
        bool negative = false;
        for (unsigned t = 0; t < 8 && !negative; ++t) {
            Int v = 0;
            for (unsigned m = 0; m < 8; ++m) {
                const Rat& c = xi.coord(m);
                if (c == 0) continue;
                Int term = fdiv(Int(c.get_num()) * sq[m], Int(c.get_den()));
                if (sign_of(m, t) < 0) v -= term; else v += term;
            }
            if (v < -E1) negative = true;
            else if (v <= E1) uncertain_sign = true;
            val[t] = v;
        }
        if (negative) {
            // an embedding is certainly negative: no square root in this
            // totally real field, independent of any bound
            res.answer = SquareAnswer::not_square_within_bound;
            return res;
        }
        if (uncertain_sign) continue;  // escalate

        // square roots of the embedding values, with error bound E3
        std::array<Int, 8> root;
        Int E2_sum = 0, root_max = 0;
        for (unsigned t = 0; t < 8; ++t) {
            root[t] = isqrt(val[t] << W);
            Int e2 = cdiv(E1 << W, root[t] == 0 ? Int(1) : root[t]) + 1;
            E2_sum += e2;
            if (root[t] > root_max) root_max = root[t];
        }
        Int E3 = cdiv(E2_sum, Int(8)) + 1;
        Int E4 = 2 * E3 + ((root_max + E3) >> (W - 1)) + 4;
        bool certifiable = (2 * bound * bound * E4) < (Int(1) << W);

        // fixed pattern order: embedding 0 keeps the positive root
        bool found = false;
        for (unsigned w = 0; w < 128 && !found; ++w) {
            KElement cand(p, q);
            bool viable = true;
            for (unsigned m = 0; m < 8 && viable; ++m) {
                Int u = 0;
                for (unsigned t = 0; t < 8; ++t) {
                    int s = (t == 0) ? 1 : (((w >> (t - 1)) & 1) ? -1 : 1);
                    if (sign_of(m, t) < 0) s = -s;
                    if (s > 0) u += root[t]; else u -= root[t];
                }
                u = fdiv(u, Int(8));
                Int cm = fdiv(u << W, sq[m]);
                auto r = reconstruct_rational(cm, W, bound);
                if (!r) { viable = false; break; }
                // |cm/2^W - r| <= E4/2^W required
                Int lhs = abs(cm * r->get_den() - (Int(r->get_num()) << W));
                if (lhs > E4 * r->get_den()) { viable = false; break; }
                cand.coord(m) = *r;
            }
            if (!viable) continue;
            if (cand * cand == xi) {
                res.answer = SquareAnswer::is_square;
                res.root = cand;
                found = true;
            }
        }
        if (found) return res;
        if (certifiable) {
            res.answer = SquareAnswer::not_square_within_bound;
            return res;
        }
    }
    res.answer = SquareAnswer::inconclusive;
    return res;
}

bool wada_check(const KElement& eps, GaloisElement s1, GaloisElement s2) {
    if (!s1.is_involution() || !s2.is_involution() || s1 == s2)
        throw std::invalid_argument("wada_check: need two distinct involutions");
    KElement e1 = eps * apply(s1, eps);
    KElement e2 = eps * apply(s2, eps);
    KElement e3 = apply(s1, eps) * apply(s2, eps);
    return eps * eps == e1 * e2 * e3.inverse();
}

}  // namespace triq
