#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <vector>

#include "triq/arith.hpp"

using namespace triq;

namespace {

// trial-division oracle
std::vector<bool> prime_sieve(unsigned long n) {
    std::vector<bool> is(n + 1, true);
    is[0] = is[1] = false;
    for (unsigned long i = 2; i * i <= n; ++i)
        if (is[i])
            for (unsigned long j = i * i; j <= n; j += i) is[j] = false;
    return is;
}

}  // namespace

TEST_CASE("is_prime basics") {
    CHECK(is_prime(2));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(0));
    CHECK_FALSE(is_prime(561));  // Carmichael number
    CHECK(is_prime(Int("2305843009213693951")));  // 2^61 - 1
    CHECK_FALSE(is_prime(Int("2305843009213693951") * 7));
    // above the deterministic witness bound and coprime to every witness
    CHECK_THROWS_AS(is_prime(Int("170141183460469231731687303715884105727")), std::domain_error);
}

TEST_CASE("is_prime agrees with trial division up to 1e6") {
    auto sieve = prime_sieve(1000000);
    for (unsigned long n = 0; n <= 1000000; ++n) {
        if (is_prime(Int(n)) != sieve[n]) {
            CAPTURE(n);
            REQUIRE(is_prime(Int(n)) == sieve[n]);
        }
    }
}

TEST_CASE("legendre examples") {
    CHECK(legendre(1, 7) == 1);
    CHECK(legendre(17, 3) == -1);  // 17 = 2 mod 3
    CHECK(legendre(2, 7) == 1);    // squares mod 7: 1,2,4
    CHECK(legendre(7, 7) == 0);
    CHECK_THROWS_AS(legendre(3, 15), std::invalid_argument);
    CHECK_THROWS_AS(legendre(3, 2), std::invalid_argument);
}

TEST_CASE("legendre equals Euler criterion for p < 1000") {
    auto sieve = prime_sieve(1000);
    for (unsigned long p = 3; p < 1000; p += 2) {
        if (!sieve[p]) continue;
        Int P(p);
        for (unsigned long a = 0; a < p; ++a) {
            Int e;
            Int base(a), ex((p - 1) / 2);
            mpz_powm(e.get_mpz_t(), base.get_mpz_t(), ex.get_mpz_t(), P.get_mpz_t());
            int euler = (e == 0) ? 0 : (e == 1 ? 1 : -1);
            if (legendre(Int(a), P) != euler) {
                CAPTURE(a);
                CAPTURE(p);
                REQUIRE(legendre(Int(a), P) == euler);
            }
        }
    }
}

TEST_CASE("legendre is multiplicative") {
    std::mt19937_64 rng(12345);
    const Int p(997);
    for (int i = 0; i < 500; ++i) {
        Int a((unsigned long)(rng() % 100000));
        Int b((unsigned long)(rng() % 100000));
        CHECK(legendre(a * b, p) == legendre(a, p) * legendre(b, p));
    }
}

TEST_CASE("is_perfect_square") {
    CHECK(is_perfect_square(0).value() == 0);
    CHECK(is_perfect_square(36).value() == 6);
    CHECK_FALSE(is_perfect_square(34).has_value());
    CHECK_FALSE(is_perfect_square(-4).has_value());
    Int big("123456789123456789123456789");
    CHECK(is_perfect_square(big * big).value() == big);
    CHECK_FALSE(is_perfect_square(big * big + 1).has_value());

    for (unsigned long n = 0; n < 1000000; ++n) {
        unsigned long r = (unsigned long)std::sqrt((double)n);
        while (r * r > n) --r;
        while ((r + 1) * (r + 1) <= n) ++r;
        bool square = (r * r == n);
        if (is_perfect_square(Int(n)).has_value() != square) {
            CAPTURE(n);
            REQUIRE(is_perfect_square(Int(n)).has_value() == square);
        }
    }
}

TEST_CASE("is_rational_square") {
    CHECK(is_rational_square(Rat(4, 9)).value() == Rat(2, 3));
    CHECK_FALSE(is_rational_square(Rat(2, 9)).has_value());
    CHECK_FALSE(is_rational_square(Rat(-4, 9)).has_value());
}

TEST_CASE("squarefree") {
    CHECK(is_squarefree(1));
    CHECK(is_squarefree(2));
    CHECK(is_squarefree(102));
    CHECK_FALSE(is_squarefree(4));
    CHECK_FALSE(is_squarefree(12));
    CHECK_FALSE(is_squarefree(0));
    CHECK(is_squarefree(-15));
    CHECK_FALSE(is_squarefree(-18));
}

TEST_CASE("two-adic helpers") {
    CHECK(v2(Int(48)) == 4);
    CHECK(odd_part(Int(48)) == 3);
    CHECK(v2(Int(7)) == 0);
}
