#include "triq/class2.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace triq {

namespace {

using i64 = long long;
using i128 = __int128;

// ---------------------------------------------------------------------------
// divisor machinery: lazily grown smallest-prime-factor sieve

class DivisorHelper {
  public:
    std::vector<i64> divisors(i64 n) {
        std::vector<std::pair<i64, int>> fac = factor(n);
        std::vector<i64> divs{1};
        for (auto [p, e] : fac) {
            size_t base = divs.size();
            i64 pe = 1;
            for (int k = 1; k <= e; ++k) {
                pe *= p;
                for (size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pe);
            }
        }
        return divs;
    }

    std::vector<std::pair<i64, int>> factor(i64 n) {
        std::vector<std::pair<i64, int>> fac;
        if (n <= (i64)kSieveLimit) {
            ensure((uint32_t)n);
            while (n > 1) {
                i64 p = spf_[n];
                int e = 0;
                while (n % p == 0) n /= p, ++e;
                fac.push_back({p, e});
            }
            return fac;
        }
        for (i64 p = 2; p * p <= n; p = (p == 2 ? 3 : p + 2)) {
            if (n % p) continue;
            int e = 0;
            while (n % p == 0) n /= p, ++e;
            fac.push_back({p, e});
        }
        if (n > 1) fac.push_back({n, 1});
        return fac;
    }

  private:
    static constexpr uint32_t kSieveLimit = 8'000'000;
    std::vector<uint32_t> spf_;
    std::mutex mu_;

    void ensure(uint32_t n) {
        std::lock_guard lk(mu_);
        if (spf_.size() > n) return;
        uint32_t lim = std::min(kSieveLimit, std::max(n + 1, 1u << 16));
        spf_.assign(lim + 1, 0);
        for (uint32_t i = 2; i <= lim; ++i) {
            if (spf_[i] == 0)
                for (uint64_t j = i; j <= lim; j += i)
                    if (spf_[j] == 0) spf_[j] = i;
        }
    }
};

DivisorHelper& divisor_helper() {
    static DivisorHelper h;
    return h;
}

std::mutex g_div_mu;  // divisors() mutates the sieve; serialize access

std::vector<i64> divisors_of(i64 n) {
    std::lock_guard lk(g_div_mu);
    return divisor_helper().divisors(n);
}

std::vector<std::pair<i64, int>> factor_of(i64 n) {
    std::lock_guard lk(g_div_mu);
    return divisor_helper().factor(n);
}

i64 isqrt64(i64 n) {
    if (n < 0) throw std::invalid_argument("isqrt64: negative");
    i64 r = (i64)std::sqrt((double)n);
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// ---------------------------------------------------------------------------
// forms

struct Form {
    i64 a, b, c;
    bool operator==(const Form& o) const { return a == o.a && b == o.b && c == o.c; }
};

struct FormKey {
    i64 a, b;
    bool operator==(const FormKey& o) const { return a == o.a && b == o.b; }
};
struct FormKeyHash {
    size_t operator()(const FormKey& k) const {
        return std::hash<i64>()(k.a * 1000003 ^ k.b);
    }
};

i64 mod_pos(i64 x, i64 m) {
    i64 r = x % m;
    return r < 0 ? r + m : r;
}

// All reduced forms of discriminant D grouped into classes: rho-cycles for
// D > 0, single forms for D < 0. Composition identifies classes through the
// reduced-form lookup table.
class FormTable {
  public:
    explicit FormTable(i64 D) : D_(D) {
        if (D > 0) {
            s_ = isqrt64(D);
            if (s_ * s_ == D) throw std::invalid_argument("FormTable: square discriminant");
            enumerate_real();
            partition_cycles();
        } else {
            enumerate_imaginary();
        }
        build_lookup();
        principal_ = class_of(principal_form());
    }

    i64 disc() const { return D_; }
    int num_classes() const { return (int)classes_.size(); }
    int principal_class() const { return principal_; }

    // D > 0: does the principal cycle contain a form with leading
    // coefficient -1? Equivalent to N(eps) = -1.
    bool minus_one_in_principal() const {
        for (int fi : classes_[principal_])
            if (forms_[fi].a == -1) return true;
        return false;
    }

    int class_of(Form f) const {
        f = reduce(f);
        auto it = lookup_.find(FormKey{f.a, f.b});
        if (it == lookup_.end()) throw std::logic_error("FormTable: reduced form not in table");
        return it->second;
    }

    int mul(int i, int j) const { return class_of(compose(rep(i), rep(j))); }

    int inverse(int i) const {
        Form f = rep(i);
        return class_of(Form{f.a, -f.b, f.c});
    }

    int power(int i, Int e) const {
        int acc = principal_;
        int base = i;
        while (e > 0) {
            if (mpz_odd_p(e.get_mpz_t())) acc = mul(acc, base);
            base = mul(base, base);
            e >>= 1;
        }
        return acc;
    }

    // Every cycle of an indefinite discriminant alternates the sign of the
    // leading coefficient, so a positive representative always exists.
    Form rep(int i) const {
        for (int fi : classes_[i])
            if (forms_[fi].a > 0) return forms_[fi];
        throw std::logic_error("FormTable: no positive representative");
    }

    Form principal_form() const {
        i64 b0 = (D_ > 0) ? s_ : 0;
        i64 ad = mod_pos(D_, 2);
        if (mod_pos(b0, 2) != ad) --b0;
        if (D_ < 0 && b0 < 0) b0 += 2;
        return Form{1, b0, (i64)(((i128)b0 * b0 - D_) / 4)};
    }

    Form minus_principal_form() const {  // (-1, b0, *), D > 0 only
        Form p = principal_form();
        return Form{-1, p.b, (i64)(((i128)p.b * p.b - D_) / -4)};
    }

    Form reduce(Form f) const {
        check_disc(f);
        if (D_ > 0) {
            for (int guard = 0; guard < 100000; ++guard) {
                if (is_reduced_real(f)) return f;
                f = rho(f);
            }
            throw std::logic_error("FormTable: reduction did not terminate");
        }
        // imaginary: standard normalize / flip loop
        for (int guard = 0; guard < 100000; ++guard) {
            f.b = mod_pos(f.b + f.a, 2 * f.a) - f.a;  // -a < b <= a
            f.c = (i64)(((i128)f.b * f.b - D_) / (4 * f.a));
            if (f.a > f.c) {
                f = Form{f.c, -f.b, f.a};
                continue;
            }
            if ((f.a == f.c || f.a == -f.b) && f.b < 0) f.b = -f.b;
            return f;
        }
        throw std::logic_error("FormTable: reduction did not terminate");
    }

    // Dirichlet composition; callers supply representatives with a > 0.
    Form compose(const Form& f1, const Form& f2) const {
        if (f1.a <= 0 || f2.a <= 0)
            throw std::logic_error("FormTable: compose wants positive leading coefficients");
        i64 s = (f1.b + f2.b) / 2;
        i64 n = f2.b - s;  // (b2 - b1)/2

        i64 u, v;
        i64 d = xgcd(f2.a, f1.a, u, v);  // u*a2 + v*a1 = d
        i64 y1 = u;
        i64 d1 = d, x2 = 0, y2 = -1;
        if (s % d != 0) {
            i64 u2, v2;
            d1 = xgcd(s, d, u2, v2);  // u2*s + v2*d = d1
            x2 = u2;
            y2 = -v2;
        }
        i64 v1 = f1.a / d1;
        i64 v2f = f2.a / d1;
        i128 r = mod_pos128((i128)y1 * y2 * n - (i128)x2 * f2.c, v1);
        i128 num = (i128)f2.c * d1 + r * (f2.b + v2f * r);
        if (num % v1 != 0) throw std::logic_error("FormTable: compose division not exact");
        Form out{v1 * v2f, (i64)(f2.b + 2 * (i128)v2f * r), (i64)(num / v1)};
        check_disc(out);
        return out;
    }

  private:
    i64 D_;
    i64 s_ = 0;
    std::vector<Form> forms_;
    std::vector<std::vector<int>> classes_;
    std::unordered_map<FormKey, int, FormKeyHash> lookup_;
    int principal_ = -1;

    static i64 xgcd(i64 a, i64 b, i64& x, i64& y) { return xgcd_full(a, b, x, y); }

    static i64 xgcd_full(i64 a, i64 b, i64& x, i64& y) {
        i64 old_r = a, r = b, old_x = 1, xx = 0, old_y = 0, yy = 1;
        while (r != 0) {
            i64 q = old_r / r;
            i64 t = old_r - q * r; old_r = r; r = t;
            t = old_x - q * xx; old_x = xx; xx = t;
            t = old_y - q * yy; old_y = yy; yy = t;
        }
        if (old_r < 0) { old_r = -old_r; old_x = -old_x; old_y = -old_y; }
        x = old_x;
        y = old_y;
        return old_r;
    }

    static i128 mod_pos128(i128 x, i64 m) {
        i128 r = x % m;
        return r < 0 ? r + m : r;
    }

    void check_disc(const Form& f) const {
        if ((i128)f.b * f.b - 4 * (i128)f.a * f.c != (i128)D_)
            throw std::logic_error("FormTable: discriminant drift");
    }

    bool is_reduced_real(const Form& f) const {
        if (f.b <= 0 || f.b > s_) return false;
        i64 ta = 2 * std::abs(f.a);
        return ta - f.b <= s_ && ta + f.b >= s_ + 1;
    }

    // Reduction / cycle step for indefinite forms.
    Form rho(const Form& f) const {
        i64 c = f.c;
        i64 ac = std::abs(c);
        i64 r;
        if (ac > s_)
            r = mod_pos(-f.b + ac, 2 * ac) - ac;  // -|c| < r <= |c|
        else
            r = s_ - mod_pos(s_ + f.b, 2 * ac);  // s - 2|c| < r <= s
        i64 cn = (i64)(((i128)r * r - D_) / (4 * c));
        return Form{c, r, cn};
    }

    void enumerate_real() {
        i64 par = mod_pos(D_, 2);
        for (i64 b = (par == 0 ? 2 : 1); b <= s_; b += 2) {
            i64 N = (i64)(((i128)D_ - (i128)b * b) / 4);
            i64 lo = (s_ + 1 - b + 1) / 2;  // ceil((s+1-b)/2)
            if (lo < 1) lo = 1;
            i64 hi = (s_ + b) / 2;
            for (i64 e : divisors_of(N)) {
                if (e < lo || e > hi) continue;
                forms_.push_back({e, b, -(N / e)});
                forms_.push_back({-e, b, N / e});
            }
        }
    }

    void enumerate_imaginary() {
        i64 absD = -D_;
        i64 bmax = isqrt64(absD / 3);
        i64 par = mod_pos(D_, 2);
        for (i64 b = par; b <= bmax; b += 2) {
            i64 N = (i64)(((i128)b * b + absD) / 4);
            for (i64 a : divisors_of(N)) {
                if (a < b || a * a > N) continue;
                if (a == 0) continue;
                i64 c = N / a;
                if (std::gcd(std::gcd(a, b), c) != 1) continue;
                forms_.push_back({a, b, c});
                classes_.push_back({(int)forms_.size() - 1});
                if (b != 0 && a != b && a != c) {
                    forms_.push_back({a, -b, c});
                    classes_.push_back({(int)forms_.size() - 1});
                }
            }
        }
    }

    void partition_cycles() {
        std::unordered_map<FormKey, int, FormKeyHash> index;
        index.reserve(forms_.size() * 2);
        for (int i = 0; i < (int)forms_.size(); ++i)
            index[FormKey{forms_[i].a, forms_[i].b}] = i;
        std::vector<char> seen(forms_.size(), 0);
        for (int i = 0; i < (int)forms_.size(); ++i) {
            if (seen[i]) continue;
            std::vector<int> cyc;
            int cur = i;
            for (int guard = 0; guard <= (int)forms_.size(); ++guard) {
                if (seen[cur]) break;
                seen[cur] = 1;
                cyc.push_back(cur);
                Form nxt = rho(forms_[cur]);
                auto it = index.find(FormKey{nxt.a, nxt.b});
                if (it == index.end())
                    throw std::logic_error("FormTable: rho left the reduced set");
                cur = it->second;
            }
            classes_.push_back(std::move(cyc));
        }
    }

    void build_lookup() {
        for (int ci = 0; ci < (int)classes_.size(); ++ci)
            for (int fi : classes_[ci]) lookup_[FormKey{forms_[fi].a, forms_[fi].b}] = ci;
    }
};

i64 to_i64_checked(const Int& x, const char* what) {
    if (!x.fits_slong_p() || abs(x) > Int("1000000000000"))
        throw std::domain_error(std::string(what) + ": discriminant too large");
    return x.get_si();
}

struct NarrowData {
    FormTable table;
    int unit_norm;  // D > 0 only, else +1 placeholder
    explicit NarrowData(i64 D)
        : table(D), unit_norm(D > 0 ? (table.minus_one_in_principal() ? -1 : 1) : 1) {}
};

Int two_part_of(const Int& n) {
    Int r = 1;
    r <<= v2(n);
    return r;
}

// Cyclic 2-power orders of an abelian 2-group given a membership oracle:
// counting elements killed by 2^k determines the type.
std::vector<Int> sylow_structure(const std::vector<int>& sylow_elems, int identity,
                                 const std::function<int(int, int)>& mul) {
    size_t n = sylow_elems.size();
    if (n <= 1) return {};
    std::vector<unsigned> r;  // r[k] = log2 #{y : y^(2^k) = 1}
    std::vector<int> cur(sylow_elems.begin(), sylow_elems.end());
    r.push_back(0);
    for (;;) {
        std::set<int> next;
        for (int& x : cur) {
            x = mul(x, x);
            next.insert(x);
        }
        // elements with y^(2^k) = 1 are those whose k-th square is the identity;
        // track via count of identity preimages: instead count how many of the
        // original got killed
        size_t killed = 0;
        for (int x : cur)
            if (x == identity) ++killed;
        unsigned rk = 0;
        while ((size_t(1) << rk) < killed) ++rk;
        if ((size_t(1) << rk) != killed)
            throw std::logic_error("sylow_structure: kill count is not a power of two");
        r.push_back(rk);
        if (killed == n) break;
        if (r.size() > 64) throw std::logic_error("sylow_structure: runaway");
    }
    // number of cyclic factors of order >= 2^k is r[k] - r[k-1]
    std::vector<Int> orders;
    for (size_t k = 1; k < r.size(); ++k) {
        unsigned atleast = r[k] - r[k - 1];
        unsigned atleast_next = (k + 1 < r.size()) ? r[k + 1] - r[k] : 0;
        for (unsigned i = 0; i < atleast - atleast_next; ++i) orders.push_back(Int(1) << k);
    }
    std::sort(orders.rbegin(), orders.rend());
    return orders;
}

}  // namespace

Int fundamental_discriminant(const Int& d) {
    if (d == 0 || d == 1) throw std::invalid_argument("fundamental_discriminant: d must not be 0 or 1");
    if (!is_squarefree(d)) throw std::invalid_argument("fundamental_discriminant: d not squarefree");
    return (mpz_fdiv_ui(d.get_mpz_t(), 4) == 1) ? d : Int(4 * d);
}

Int h2(const Int& d) {
    Int D = fundamental_discriminant(d);
    NarrowData nd(to_i64_checked(D, "h2"));
    Int h = nd.table.num_classes();
    if (d > 0 && nd.unit_norm == 1) {
        if (mpz_odd_p(h.get_mpz_t())) throw std::logic_error("h2: narrow class number parity");
        h /= 2;
    }
    return two_part_of(h);
}

FormClassGroup form_class_group(const Int& d, ClassGroupMode mode) {
    Int D = fundamental_discriminant(d);
    NarrowData nd(to_i64_checked(D, "form_class_group"));
    const FormTable& T = nd.table;

    FormClassGroup out;
    out.discriminant = D;
    out.mode = mode;
    if (d > 0) out.unit_norm = nd.unit_norm;

    int h_narrow = T.num_classes();
    bool quotient = (mode == ClassGroupMode::wide && d > 0 && nd.unit_norm == 1);

    int jcls = T.principal_class();
    if (d > 0) {
        jcls = T.class_of(T.minus_principal_form());
        if ((nd.unit_norm == -1) != (jcls == T.principal_class()))
            throw std::logic_error("form_class_group: norm criterion mismatch");
    }

    auto canon = [&](int i) { return quotient ? std::min(i, T.mul(i, jcls)) : i; };
    std::vector<int> elems;
    for (int i = 0; i < h_narrow; ++i)
        if (canon(i) == i) elems.push_back(i);
    auto mul = [&](int i, int j) { return canon(T.mul(i, j)); };
    int identity = canon(T.principal_class());

    Int h = (Int)(long)elems.size();
    out.class_number = h;
    out.two_part = two_part_of(h);

    Int m_odd = odd_part(h);
    std::set<int> sylow;
    for (int x : elems) sylow.insert(canon(T.power(x, m_odd)));
    if ((Int)(long)sylow.size() != out.two_part)
        throw std::logic_error("form_class_group: 2-Sylow size mismatch");
    std::vector<int> selems(sylow.begin(), sylow.end());
    out.two_sylow = sylow_structure(selems, identity, mul);
    return out;
}

std::optional<CaseShape> detect_shape(const Int& d) {
    if (d == 2) return CaseShape::d_two;
    if (d == -1) return CaseShape::d_minus_one;
    if (d == -2) return CaseShape::d_minus_two;
    Int n(abs(d));
    if (!n.fits_slong_p()) return std::nullopt;
    auto fac = factor_of(n.get_si());

    if (d > 0 && fac.size() == 1 && fac[0].second == 1) {
        i64 p = fac[0].first;
        if (p % 4 == 1) return CaseShape::prime_1_mod_4;
        if (p % 4 == 3) return CaseShape::prime_3_mod_4;
    }
    if (d < 0 && fac.size() == 1 && fac[0].second == 1 && fac[0].first % 4 == 3)
        return CaseShape::minus_prime_3_mod_4;
    if (fac.size() == 2 && fac[0].second == 1 && fac[1].second == 1) {
        i64 f0 = fac[0].first, f1 = fac[1].first;
        if (f0 == 2) {
            if (d > 0 && f1 % 4 == 3) return CaseShape::twice_prime_3_mod_4;
            if (d < 0 && f1 % 8 == 3) return CaseShape::minus_twice_q_3_mod_8;
            return std::nullopt;
        }
        bool one_mod4 = (f0 % 4 == 1) != (f1 % 4 == 1);
        if (one_mod4) return d > 0 ? CaseShape::pq : CaseShape::minus_pq;
    }
    if (fac.size() == 3 && fac[0].first == 2 && fac[0].second == 1 && fac[1].second == 1 &&
        fac[2].second == 1 && d > 0) {
        bool one_mod4 = (fac[1].first % 4 == 1) != (fac[2].first % 4 == 1);
        if (one_mod4) return CaseShape::twice_pq;
    }
    return std::nullopt;
}

std::optional<Int> h2_fast(const Int& d, CaseShape shape) {
    auto detected = detect_shape(d);
    if (!detected || *detected != shape) return std::nullopt;

    auto pq_value = [&](const Int& n) -> std::optional<Int> {
        auto fac = factor_of(Int(abs(n)).get_si());
        Int p = 0, q = 0;
        for (auto [f, e] : fac) {
            if (f == 2) continue;
            (f % 4 == 1 ? p : q) = (long)f;
        }
        if (legendre(p, q) == -1) return Int(2);
        return std::nullopt;  // only divisibility by 4 is known
    };

    switch (shape) {
        case CaseShape::d_two:
        case CaseShape::d_minus_one:
        case CaseShape::d_minus_two:
        case CaseShape::prime_1_mod_4:
        case CaseShape::prime_3_mod_4:
        case CaseShape::minus_prime_3_mod_4:
        case CaseShape::twice_prime_3_mod_4:
            return Int(1);
        case CaseShape::pq:
        case CaseShape::twice_pq:
        case CaseShape::minus_pq:
            return pq_value(d);
        case CaseShape::minus_twice_q_3_mod_8:
            return Int(2);
    }
    return std::nullopt;
}

}  // namespace triq
