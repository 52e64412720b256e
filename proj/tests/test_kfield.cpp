#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "triq/kfield.hpp"
#include "triq/pell.hpp"

using namespace triq;

namespace {

const Int P(17), Q(3);

KElement rand_element(std::mt19937_64& rng, const Int& p, const Int& q, int span = 4) {
    KElement x(p, q);
    for (unsigned m = 0; m < 8; ++m) {
        long num = (long)(rng() % (2 * span + 1)) - span;
        long den = 1 + (long)(rng() % 2);
        x.coord(m) = Rat(num, den);
        x.coord(m).canonicalize();
    }
    return x;
}

}  // namespace

TEST_CASE("galois action basics") {
    KElement s2 = KElement::monomial(P, Q, 1, 1);
    CHECK(apply(GaloisElement::tau1(), s2) == -s2);
    CHECK(apply(GaloisElement::tau2(), s2) == s2);

    std::mt19937_64 rng(7);
    KElement x = rand_element(rng, P, Q);
    CHECK(apply(GaloisElement::identity(), x) == x);

    KElement spq = KElement::monomial(P, Q, 6, 1);
    GaloisElement t23 = GaloisElement::tau2() * GaloisElement::tau3();
    CHECK(apply(t23, spq) == spq);
}

TEST_CASE("galois action is multiplicative and composes") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i) {
        KElement x = rand_element(rng, P, Q);
        KElement y = rand_element(rng, P, Q);
        GaloisElement s{unsigned(rng() % 8)};
        GaloisElement t{unsigned(rng() % 8)};
        CHECK(apply(s, x * y) == apply(s, x) * apply(s, y));
        CHECK(apply(s * t, x) == apply(s, apply(t, x)));
    }
}

TEST_CASE("multiplication table: sqrt2p * sqrtpq = p * sqrt2q") {
    KElement a = KElement::monomial(P, Q, 3, 1);
    KElement b = KElement::monomial(P, Q, 6, 1);
    KElement c = a * b;
    CHECK(c.coord(5) == Rat(P));
    KElement s2 = KElement::monomial(P, Q, 1, 1);
    KElement sp = KElement::monomial(P, Q, 2, 1);
    CHECK((s2 * sp).coord(3) == 1);
    CHECK((s2 * s2).coord(0) == 2);
}

TEST_CASE("inverse and norm") {
    std::mt19937_64 rng(1234);
    for (int i = 0; i < 30; ++i) {
        KElement x = rand_element(rng, P, Q);
        if (x.is_zero()) continue;
        Rat n = x.absolute_norm();
        if (n == 0) continue;  // zero divisors exist in the ring of coordinates
        KElement inv = x.inverse();
        CHECK(x * inv == KElement::one(P, Q));
    }
}

TEST_CASE("rel_norm lands in the subfield and matches the proof values") {
    // sqrt(eps_2pq) for (p,q) = (17,3): eps_102 = 101 + 10 sqrt102, x-1 = 100
    QuadUnit u102 = fundamental_unit(102);
    SqrtDecomposition d = sqrt_case(u102, P);
    REQUIRE(d.case_tag == SqrtCase::x_minus_1);
    KElement root = sqrt_unit_element(P, Q, d);

    // N_{K/k2} (1 + tau2) of that element is -1
    KElement n2 = rel_norm(root, SubfieldId::k2());
    CHECK(n2 == -KElement::one(P, Q));

    // N_{K/k5} (1 + tau1 tau2) is -eps_2pq
    KElement n5 = rel_norm(root, SubfieldId::k5());
    CHECK(n5 == -KElement::from_quad_unit(P, Q, u102));

    // N(1) = 1 for every biquadratic subfield
    for (auto sf : {SubfieldId::k1(), SubfieldId::k2(), SubfieldId::k3(), SubfieldId::k4(),
                    SubfieldId::k5(), SubfieldId::k6(), SubfieldId::k7()})
        CHECK(rel_norm(KElement::one(P, Q), sf) == KElement::one(P, Q));
}

TEST_CASE("norm table spot entries") {
    auto rowq = norm_table(UnitKind::sqrt_eps_q);
    CHECK(rowq[norm_1_tau1].value() == SymbolicUnitValue{-1, 1});
    auto row2 = norm_table(UnitKind::eps_2);
    CHECK(row2[norm_1_tau2].value() == SymbolicUnitValue{1, 2});
    auto row2pq = norm_table(UnitKind::sqrt_eps_2pq, SqrtCase::x_minus_1);
    CHECK(row2pq[norm_1_tau2tau3].value() == SymbolicUnitValue{1, 1});
    CHECK_FALSE(row2pq[norm_1_tau3].has_value());
    CHECK_THROWS_AS(norm_table(UnitKind::sqrt_eps_pq), std::invalid_argument);
}

TEST_CASE("norm table rows validate against rel_norm for (17,3)") {
    // q = 3 pattern rows of the first table
    QuadUnit uq = fundamental_unit(Q);
    QuadUnit u2q = fundamental_unit(2 * Q);
    QuadUnit u2 = fundamental_unit(2);
    QuadUnit up = fundamental_unit(P);

    struct RowCase {
        UnitKind kind;
        KElement elem;
        KElement base;  // eps_m for the symbolic value
    };
    std::vector<RowCase> rows;
    rows.push_back({UnitKind::eps_2, KElement::from_quad_unit(P, Q, u2),
                    KElement::from_quad_unit(P, Q, u2)});
    rows.push_back({UnitKind::eps_p, KElement::from_quad_unit(P, Q, up),
                    KElement::from_quad_unit(P, Q, up)});
    rows.push_back({UnitKind::sqrt_eps_q, sqrt_unit_element(P, Q, sqrt_case(uq, 1)),
                    KElement::from_quad_unit(P, Q, uq)});
    rows.push_back({UnitKind::sqrt_eps_2q, sqrt_unit_element(P, Q, sqrt_case(u2q, 1)),
                    KElement::from_quad_unit(P, Q, u2q)});

    for (const auto& rc : rows) {
        NormTableRow row = norm_table(rc.kind);
        for (int i = 0; i < 6; ++i) {
            REQUIRE(row[i].has_value());
            GaloisElement sigma = norm_map_involution((NormMapId)i);
            KElement got = rc.elem * apply(sigma, rc.elem);
            KElement want = rc.base.pow(row[i]->unit_exponent) * Rat(row[i]->sign);
            CAPTURE((int)rc.kind);
            CAPTURE(i);
            CHECK(got == want);
        }
    }
}

TEST_CASE("wada identity on random invertible elements") {
    std::mt19937_64 rng(555);
    int done = 0;
    while (done < 100) {
        KElement x = rand_element(rng, P, Q);
        if (x.is_zero() || x.absolute_norm() == 0) continue;
        unsigned s1 = 1 + rng() % 7;
        unsigned s2 = 1 + rng() % 7;
        if (s1 == s2) continue;
        CHECK(wada_check(x, GaloisElement{s1}, GaloisElement{s2}));
        ++done;
    }
    KElement mono = KElement::monomial(P, Q, 3, Rat(2, 3));
    CHECK(wada_check(mono, GaloisElement::tau1(), GaloisElement::tau2()));
    KElement sum = KElement::one(P, Q) + KElement::monomial(P, Q, 1, 1) +
                   KElement::monomial(P, Q, 2, 1);
    CHECK(wada_check(sum, GaloisElement::tau1(), GaloisElement::tau3()));
}

TEST_CASE("square test: constructed squares are found") {
    KElement e2 = KElement::from_quad_unit(P, Q, fundamental_unit(2));
    SquareTestResult r = is_square_in_K(e2 * e2);
    REQUIRE(r.found());
    // root is normalized to be positive in the all-positive embedding: eps2 itself
    CHECK(*r.root == e2);

    std::mt19937_64 rng(42);
    for (int i = 0; i < 20; ++i) {
        KElement eta = rand_element(rng, P, Q);
        if (eta.is_zero()) continue;
        SquareTestResult rr = is_square_in_K(eta * eta);
        REQUIRE(rr.found());
        CHECK(*rr.root * *rr.root == eta * eta);
    }
}

TEST_CASE("square test: eps2 is not a square in K") {
    KElement e2 = KElement::from_quad_unit(P, Q, fundamental_unit(2));
    SquareTestResult r = is_square_in_K(e2);
    CHECK(r.answer == SquareAnswer::not_square_within_bound);
}

TEST_CASE("square test: negative element rejected immediately") {
    KElement e2 = KElement::from_quad_unit(P, Q, fundamental_unit(2));
    SquareTestResult r = is_square_in_K(-(e2 * e2));
    CHECK(r.answer == SquareAnswer::not_square_within_bound);
}

TEST_CASE("square test: the fourth-root product of Thm 3.3 case 1 for (17,3)") {
    // (p,q) = (17,3) has N(eps_34) = +1, so this pair is case 2; case 1 needs
    // N(eps_2p) = -1: (p,q) = (41,3) has eps_82 with norm -1. The product
    // sqrt(eps_q) sqrt(eps_2q) sqrt(eps_pq) sqrt(eps_2pq) must be a square.
    Int p(41), q(3);
    QuadUnit u82 = fundamental_unit(82);
    REQUIRE(u82.norm == -1);
    KElement prod = sqrt_unit_element(p, q, sqrt_case(fundamental_unit(q), 1)) *
                    sqrt_unit_element(p, q, sqrt_case(fundamental_unit(2 * q), 1)) *
                    sqrt_unit_element(p, q, sqrt_case(fundamental_unit(p * q), p)) *
                    sqrt_unit_element(p, q, sqrt_case(fundamental_unit(2 * p * q), p));
    SquareTestConfig cfg;
    cfg.max_precision = 1 << 16;
    SquareTestResult r = is_square_in_K(prod, cfg);
    REQUIRE(r.found());
    CHECK(*r.root * *r.root == prod);
}

TEST_CASE("square test honors the denominator bound exactly") {
    // root with a coordinate denominator of 8: found iff the bound admits it
    KElement eta(P, Q);
    eta.coord(0) = Rat(3, 8);
    eta.coord(1) = Rat(5, 2);
    eta.coord(6) = Rat(7, 4);
    KElement xi = eta * eta;

    SquareTestConfig wide_enough;
    wide_enough.denom_bound = Int(8);
    SquareTestResult hit = is_square_in_K(xi, wide_enough);
    REQUIRE(hit.found());
    CHECK(*hit.root * *hit.root == xi);

    SquareTestConfig too_tight;
    too_tight.denom_bound = Int(4);
    SquareTestResult miss = is_square_in_K(xi, too_tight);
    CHECK(miss.answer == SquareAnswer::not_square_within_bound);
    CHECK(miss.denom_bound_used == 4);
}

TEST_CASE("square test rejects zero input") {
    CHECK_THROWS_AS(is_square_in_K(KElement(P, Q)), std::invalid_argument);
}
