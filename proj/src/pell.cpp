#include "triq/pell.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace triq {

namespace {

// One period of the continued fraction of sqrt(d). Returns the convergent
// (x, y) just before the period closes, so x^2 - d*y^2 = (-1)^period.
struct CfResult {
    Int x, y;
    unsigned long period;
};

CfResult cf_fundamental_solution(const Int& d, const Int& a0) {
    Int m = 0, den = 1, a = a0;
    Int p_prev = 1, p_cur = a0;
    Int q_prev = 0, q_cur = 1;
    unsigned long k = 0;
    for (;;) {
        m = den * a - m;
        den = (d - m * m) / den;
        ++k;
        // period closes when den returns to 1 (partial quotient 2*a0);
        // the last convergent is the fundamental solution
        if (den == 1) break;
        a = (a0 + m) / den;
        Int p_next = a * p_cur + p_prev;
        Int q_next = a * q_cur + q_prev;
        p_prev = p_cur;
        p_cur = p_next;
        q_prev = q_cur;
        q_cur = q_next;
    }
    return {p_cur, q_cur, k};
}

// If the fundamental unit of the maximal order is (A + B*sqrt(d))/2 with
// A, B odd, then its cube is the fundamental solution of x^2 - d y^2 = +-1
// and A satisfies A^3 - 3 n A = 2x. Solve that trace equation exactly.
std::optional<QuadUnit> half_integer_unit(const Int& d, const CfResult& cf, int n) {
    Int t = 2 * cf.x;
    Int r;
    mpz_root(r.get_mpz_t(), t.get_mpz_t(), 3);
    for (Int A = r - 2; A <= r + 2; ++A) {
        if (A <= 0 || mpz_even_p(A.get_mpz_t())) continue;
        if (A * A * A - 3 * n * A != t) continue;
        Int num = A * A - 4 * n;
        if (num <= 0 || num % d != 0) continue;
        auto B = is_perfect_square(num / d);
        if (!B || mpz_even_p(B->get_mpz_t())) continue;
        QuadUnit u{d, A, *B, 2, n, cf.period};
        if (!u.pell_identity_holds())
            throw std::logic_error("fundamental_unit: half-integer identity failed");
        return u;
    }
    return std::nullopt;
}

}  // namespace

QuadUnit fundamental_unit(const Int& d) {
    if (d < 2) throw std::invalid_argument("fundamental_unit: need d >= 2");
    Int a0 = isqrt(d);
    if (a0 * a0 == d) throw std::invalid_argument("fundamental_unit: d is a perfect square");
    if (!is_squarefree(d)) throw std::invalid_argument("fundamental_unit: d is not squarefree");

    CfResult cf = cf_fundamental_solution(d, a0);
    int norm = (cf.period % 2 == 0) ? 1 : -1;
    if (mpz_fdiv_ui(d.get_mpz_t(), 4) == 1) {
        if (auto half = half_integer_unit(d, cf, norm)) return *half;
    }
    QuadUnit u{d, cf.x, cf.y, 1, norm, cf.period};
    if (!u.pell_identity_holds()) throw std::logic_error("fundamental_unit: Pell identity failed");
    return u;
}

QuadUnit fundamental_unit_cached(const Int& d) { return fundamental_unit_cached(d, nullptr); }

const char* to_string(SqrtCase c) {
    switch (c) {
        case SqrtCase::x_minus_1: return "x_minus_1";
        case SqrtCase::p_x_minus_1: return "p_x_minus_1";
        case SqrtCase::two_p_x_plus_1: return "two_p_x_plus_1";
    }
    return "?";
}

SqrtDecomposition sqrt_case(const QuadUnit& unit, const Int& p) {
    if (unit.norm != 1) throw std::domain_error("sqrt_case: no admissible case (norm is -1)");
    if (unit.denom != 1)
        throw std::domain_error("sqrt_case: half-integer units are outside the supported shapes");
    const Int& m = unit.d;
    const Int& x = unit.a;
    const Int& y = unit.b;
    if (p < 1 || (p > 1 && m % p != 0))
        throw std::invalid_argument("sqrt_case: p must divide the radicand");

    struct Match {
        SqrtCase tag;
        Int c1, c2;
    };
    std::vector<Match> found;

    // x-1 = c1^2, x+1 = m*c2^2
    if (auto c1 = is_perfect_square(x - 1)) {
        if ((x + 1) % m == 0) {
            if (auto c2 = is_perfect_square((x + 1) / m))
                found.push_back({SqrtCase::x_minus_1, *c1, *c2});
        }
    }
    if (p > 1) {
        // x-1 = p*c1^2, x+1 = (m/p)*c2^2
        if ((x - 1) % p == 0 && (x + 1) % (m / p) == 0) {
            auto c1 = is_perfect_square((x - 1) / p);
            auto c2 = is_perfect_square((x + 1) / (m / p));
            if (c1 && c2) found.push_back({SqrtCase::p_x_minus_1, *c1, *c2});
        }
        // even m: x+1 = 2p*c1^2, x-1 = (m/2p)*c2^2
        // odd m:  x+1 = 2p*c1^2, x-1 = 2(m/p)*c2^2
        Int s = 2 * p;
        Int t = mpz_even_p(m.get_mpz_t()) ? Int(m / s) : Int(2 * (m / p));
        if ((x + 1) % s == 0 && (x - 1) % t == 0) {
            auto c1 = is_perfect_square((x + 1) / s);
            auto c2 = is_perfect_square((x - 1) / t);
            if (c1 && c2) found.push_back({SqrtCase::two_p_x_plus_1, *c1, *c2});
        }
    }

    if (found.empty()) throw std::domain_error("sqrt_case: no admissible case");
    if (found.size() > 1)
        throw std::logic_error("sqrt_case: trichotomy violated, multiple cases hold for d=" +
                               m.get_str());

    const Match& mt = found.front();
    // Re-verify the case identity and the coefficient relation exactly.
    bool ok = false;
    switch (mt.tag) {
        case SqrtCase::x_minus_1:
            ok = (m * mt.c2 * mt.c2 - mt.c1 * mt.c1 == 2) && (mt.c1 * mt.c2 == y);
            break;
        case SqrtCase::p_x_minus_1:
            ok = ((m / p) * mt.c2 * mt.c2 - p * mt.c1 * mt.c1 == 2) && (mt.c1 * mt.c2 == y);
            break;
        case SqrtCase::two_p_x_plus_1:
            if (mpz_even_p(m.get_mpz_t()))
                ok = (2 * p * mt.c1 * mt.c1 - (m / (2 * p)) * mt.c2 * mt.c2 == 2) &&
                     (mt.c1 * mt.c2 == y);
            else
                ok = (p * mt.c1 * mt.c1 - (m / p) * mt.c2 * mt.c2 == 1) && (2 * mt.c1 * mt.c2 == y);
            break;
    }
    if (!ok) throw std::logic_error("sqrt_case: identity check failed for d=" + m.get_str());
    return SqrtDecomposition{unit, mt.tag, mt.c1, mt.c2, std::nullopt};
}

SqrtDecomposition eps2p_decompose(const QuadUnit& unit) {
    if (unit.norm != 1) throw std::invalid_argument("eps2p_decompose: unit must have norm +1");
    if (unit.denom != 1 || mpz_odd_p(unit.d.get_mpz_t()))
        throw std::invalid_argument("eps2p_decompose: radicand must be 2p");
    Int p = unit.d / 2;
    if (mpz_fdiv_ui(p.get_mpz_t(), 8) != 1 || !is_prime(p))
        throw std::invalid_argument("eps2p_decompose: need d = 2p with p = 1 mod 8 prime");

    const Int& beta = unit.a;
    struct Match {
        Int c1, c2;
        int u;
    };
    std::vector<Match> found;
    // u = 0: beta+1 = c1^2, beta-1 = 2p*c2^2;  u = 1: the two swap.
    if (auto c1 = is_perfect_square(beta + 1)) {
        if ((beta - 1) % unit.d == 0)
            if (auto c2 = is_perfect_square((beta - 1) / unit.d)) found.push_back({*c1, *c2, 0});
    }
    if (auto c1 = is_perfect_square(beta - 1)) {
        if ((beta + 1) % unit.d == 0)
            if (auto c2 = is_perfect_square((beta + 1) / unit.d)) found.push_back({*c1, *c2, 1});
    }
    if (found.empty()) throw std::logic_error("eps2p_decompose: no decomposition found");
    if (found.size() > 1) throw std::logic_error("eps2p_decompose: ambiguous decomposition");
    const Match& mt = found.front();
    if (mt.c1 * mt.c1 - unit.d * mt.c2 * mt.c2 != Int(2 * (mt.u == 0 ? 1 : -1)) ||
        mt.c1 * mt.c2 != unit.b)
        throw std::logic_error("eps2p_decompose: identity check failed");
    return SqrtDecomposition{unit, std::nullopt, mt.c1, mt.c2, mt.u};
}

// ---------------------------------------------------------------------------
// caching

namespace {

std::shared_mutex g_memo_mu;
std::map<Int, QuadUnit> g_memo;

nlohmann::json unit_to_json(const QuadUnit& u) {
    return nlohmann::json{{"d", u.d.get_str()},       {"a", u.a.get_str()},
                          {"b", u.b.get_str()},       {"denom", u.denom},
                          {"norm", u.norm},           {"cf_period", u.cf_period}};
}

std::optional<QuadUnit> unit_from_json(const nlohmann::json& j) {
    QuadUnit u;
    u.d = Int(j.at("d").get<std::string>());
    u.a = Int(j.at("a").get<std::string>());
    u.b = Int(j.at("b").get<std::string>());
    u.denom = j.at("denom").get<int>();
    u.norm = j.at("norm").get<int>();
    u.cf_period = j.at("cf_period").get<unsigned long>();
    if (!u.pell_identity_holds()) return std::nullopt;  // corrupt record
    return u;
}

}  // namespace

struct UnitCache::Impl {
    mutable std::shared_mutex mu;
    std::map<Int, QuadUnit> mem;
    int fd = -1;
};

UnitCache::UnitCache(std::filesystem::path path) : impl_(new Impl), path_(std::move(path)) {
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                if (auto u = unit_from_json(j)) impl_->mem.emplace(u->d, *u);
            } catch (const nlohmann::json::exception&) {
                // skip malformed lines; the cache is advisory
            }
        }
    }
    impl_->fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (impl_->fd < 0) throw std::runtime_error("UnitCache: cannot open " + path_.string());
}

UnitCache::~UnitCache() {
    if (impl_->fd >= 0) ::close(impl_->fd);
    delete impl_;
}

std::optional<QuadUnit> UnitCache::lookup(const Int& d) const {
    std::shared_lock lk(impl_->mu);
    auto it = impl_->mem.find(d);
    if (it == impl_->mem.end()) return std::nullopt;
    return it->second;
}

void UnitCache::insert(const QuadUnit& u) {
    {
        std::unique_lock lk(impl_->mu);
        auto [it, fresh] = impl_->mem.emplace(u.d, u);
        if (!fresh) return;  // already persisted
    }
    std::string line = unit_to_json(u).dump() + "\n";
    // single write() on an O_APPEND descriptor keeps records intact
    (void)!::write(impl_->fd, line.data(), line.size());
}

QuadUnit fundamental_unit_cached(const Int& d, UnitCache* cache) {
    {
        std::shared_lock lk(g_memo_mu);
        auto it = g_memo.find(d);
        if (it != g_memo.end()) return it->second;
    }
    if (cache) {
        if (auto u = cache->lookup(d)) {
            std::unique_lock lk(g_memo_mu);
            g_memo.emplace(d, *u);
            return *u;
        }
    }
    QuadUnit u = fundamental_unit(d);
    {
        std::unique_lock lk(g_memo_mu);
        g_memo.emplace(d, u);
    }
    if (cache) cache->insert(u);
    return u;
}

}  // namespace triq
