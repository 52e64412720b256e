#include "triq/arith.hpp"

#include <stdexcept>

namespace triq {

namespace {

// Strong probable-prime test to base a (n odd, n > a).
bool miller_rabin_witness(const Int& n, unsigned long a) {
    Int d = n - 1;
    unsigned long r = mpz_scan1(d.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), r);

    Int x, base(a);
    mpz_powm(x.get_mpz_t(), base.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n - 1) return true;
    for (unsigned long i = 1; i < r; ++i) {
        x = (x * x) % n;
        if (x == n - 1) return true;
        if (x == 1) return false;
    }
    return false;
}

// Witnesses 2..41 decide primality for every n below this bound
// (Sorenson & Webster).
const Int kDeterministicBound("3317044064679887385961981");
constexpr unsigned long kWitnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};

}  // namespace

bool is_prime(const Int& n) {
    if (n < 2) return false;
    for (unsigned long w : kWitnesses) {
        if (n == w) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), w)) return false;
    }
    if (n >= kDeterministicBound)
        throw std::domain_error("is_prime: range unsupported (n >= 3.317e24)");
    for (unsigned long w : kWitnesses)
        if (!miller_rabin_witness(n, w)) return false;
    return true;
}

int legendre(const Int& a, const Int& p) {
    if (mpz_even_p(p.get_mpz_t()) || !is_prime(p))
        throw std::invalid_argument("legendre: modulus must be an odd prime");
    return mpz_legendre(a.get_mpz_t(), p.get_mpz_t());
}

Int isqrt(const Int& n) {
    if (n < 0) throw std::invalid_argument("isqrt: negative argument");
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

std::optional<Int> is_perfect_square(const Int& n) {
    if (n < 0) return std::nullopt;
    Int r = isqrt(n);
    if (r * r == n) return r;
    return std::nullopt;
}

std::optional<Rat> is_rational_square(const Rat& x) {
    if (x < 0) return std::nullopt;
    auto num = is_perfect_square(x.get_num());
    if (!num) return std::nullopt;
    auto den = is_perfect_square(x.get_den());
    if (!den) return std::nullopt;
    return Rat(*num, *den);
}

unsigned long v2(const Int& n) {
    if (n == 0) throw std::invalid_argument("v2: zero argument");
    return mpz_scan1(n.get_mpz_t(), 0);
}

Int odd_part(const Int& n) {
    Int r;
    mpz_tdiv_q_2exp(r.get_mpz_t(), n.get_mpz_t(), v2(n));
    return r;
}

bool is_squarefree(const Int& d) {
    Int n = abs(d);
    if (n == 0) return false;
    if (n == 1) return true;
    if (n >= Int("1000000000000000000"))
        throw std::domain_error("is_squarefree: input too large to certify");
    // Strip primes up to 1e6. The remaining cofactor then has at most two
    // prime factors, so it is squarefree unless it is a prime square.
    for (unsigned long p = 2; p <= 1000000 && Int(p) * p <= n; p = (p == 2 ? 3 : p + 2)) {
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
            if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
        }
    }
    if (n == 1 || is_prime(n)) return true;
    return !is_perfect_square(n).has_value();
}

}  // namespace triq
