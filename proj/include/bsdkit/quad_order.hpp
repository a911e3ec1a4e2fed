// Arithmetic in orders of real quadratic fields: elements on the basis
// (1, w) with w = (disc + sqrt(disc))/2, ideals in two-by-two Hermite normal
// form, prime splitting tags, residue fields, and the Frobenius resultant.
#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsdkit/intutil.hpp"

namespace bsdkit {

inline long fund_disc_of(long disc) {
    // largest fundamental discriminant D0 with disc = f^2 * D0
    auto fac = factorize(disc);
    long sf = disc > 0 ? 1 : -1;
    for (auto [p, e] : fac)
        if (e % 2) sf *= p;
    long d0 = (((sf % 4) + 4) % 4 == 1) ? sf : 4 * sf;
    return d0;
}

struct QuadOrder {
    long disc;       // discriminant of the order, > 0, == 0 or 1 mod 4
    long fund_disc;  // discriminant of the maximal order
    long conductor;  // disc = conductor^2 * fund_disc

    explicit QuadOrder(long d) : disc(d) {
        if (d <= 0) throw std::invalid_argument("QuadOrder: discriminant must be positive");
        long m = ((d % 4) + 4) % 4;
        if (m != 0 && m != 1)
            throw std::invalid_argument("QuadOrder: discriminant must be 0 or 1 mod 4");
        Int root;
        if (perfect_square_root(Int(d), root))
            throw std::invalid_argument("QuadOrder: discriminant must not be a square");
        fund_disc = fund_disc_of(d);
        long f2 = d / fund_disc;
        Int fr;
        if (!perfect_square_root(Int(f2), fr))
            throw std::logic_error("QuadOrder: conductor computation failed");
        conductor = static_cast<long>(fr.get_si());
    }

    // w^2 = disc * w - c with c = (disc^2 - disc)/4
    Int omega_norm_term() const { return (Int(disc) * disc - disc) / 4; }
};

struct OrderElt {
    Int x, y;  // value x + y*w
    OrderElt() : x(0), y(0) {}
    OrderElt(Int xx, Int yy) : x(std::move(xx)), y(std::move(yy)) {}
    bool operator==(const OrderElt&) const = default;
    bool is_zero() const { return x == 0 && y == 0; }
};

inline OrderElt elt_add(const OrderElt& a, const OrderElt& b) { return {a.x + b.x, a.y + b.y}; }
inline OrderElt elt_sub(const OrderElt& a, const OrderElt& b) { return {a.x - b.x, a.y - b.y}; }
inline OrderElt elt_neg(const OrderElt& a) { return {-a.x, -a.y}; }

inline OrderElt elt_mul(const QuadOrder& o, const OrderElt& a, const OrderElt& b) {
    Int c = o.omega_norm_term();
    return {a.x * b.x - a.y * b.y * c, a.x * b.y + a.y * b.x + a.y * b.y * o.disc};
}

inline OrderElt elt_conj(const QuadOrder& o, const OrderElt& a) {
    // conjugate of w is disc - w
    return {a.x + a.y * o.disc, -a.y};
}

inline Int elt_trace(const QuadOrder& o, const OrderElt& a) { return 2 * a.x + a.y * o.disc; }

inline Int elt_norm(const QuadOrder& o, const OrderElt& a) {
    return a.x * a.x + a.x * a.y * o.disc + a.y * a.y * o.omega_norm_term();
}

inline OrderElt elt_scale(const Int& n, const OrderElt& a) { return {n * a.x, n * a.y}; }

// ---------------------------------------------------------------------------
// ideals

struct IdealHNF {
    // lattice spanned by the columns (a, 0) and (b, d): the set
    // { a*m + (b + d*w)*n : m, n in Z }; invariants a > 0, d > 0, 0 <= b < a
    Int a, b, d;
    bool zero = false;

    static IdealHNF zero_ideal() {
        IdealHNF z;
        z.a = z.b = z.d = 0;
        z.zero = true;
        return z;
    }
    bool operator==(const IdealHNF&) const = default;
};

inline Int ideal_norm(const IdealHNF& I) { return I.zero ? Int(0) : I.a * I.d; }

// HNF of the lattice spanned by arbitrary (x, y) columns.
inline IdealHNF hnf_from_columns(std::vector<std::pair<Int, Int>> cols) {
    // eliminate the y-row: bring to a single column with y = g = gcd of ys
    Int gy = 0;
    for (auto& [x, y] : cols) gy = int_gcd(gy, y);
    std::pair<Int, Int> wcol{0, 0};
    if (gy != 0) {
        // combine columns via extended gcd until one has y = gy
        for (auto& [x, y] : cols) {
            if (wcol.second == 0) {
                wcol = {x, y};
                continue;
            }
            if (y == 0) continue;
            Int g, s, t;
            mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(),
                       wcol.second.get_mpz_t(), y.get_mpz_t());
            std::pair<Int, Int> nw{s * wcol.first + t * x, g};
            // replace current column by the combination orthogonal to nw
            Int u = wcol.second / g, v = y / g;
            x = v * wcol.first - u * x;
            y = 0;
            wcol = nw;
        }
    }
    Int ga = 0;
    for (auto& [x, y] : cols)
        if (y == 0) ga = int_gcd(ga, x);
    if (gy == 0 && ga == 0) return IdealHNF::zero_ideal();
    if (gy == 0 || ga == 0)
        throw std::domain_error("hnf_from_columns: lattice not of full rank");
    IdealHNF out;
    out.a = ga < 0 ? -ga : ga;
    if (wcol.second < 0) {  // normalize the surviving column so d > 0
        wcol.first = -wcol.first;
        wcol.second = -wcol.second;
    }
    out.d = wcol.second;
    Int r = wcol.first % out.a;
    if (r < 0) r += out.a;
    out.b = r;
    return out;
}

inline IdealHNF ideal_from_generators(const QuadOrder& o, const std::vector<OrderElt>& gens) {
    std::vector<std::pair<Int, Int>> cols;
    OrderElt w(Int(0), Int(1));
    for (const auto& g : gens) {
        if (g.is_zero()) continue;
        cols.emplace_back(g.x, g.y);
        OrderElt wg = elt_mul(o, w, g);
        cols.emplace_back(wg.x, wg.y);
    }
    return hnf_from_columns(std::move(cols));
}

inline IdealHNF ideal_principal(const QuadOrder& o, const OrderElt& g) {
    return ideal_from_generators(o, {g});
}

inline IdealHNF ideal_sum(const IdealHNF& I, const IdealHNF& J) {
    if (I.zero) return J;
    if (J.zero) return I;
    return hnf_from_columns({{I.a, Int(0)}, {I.b, I.d}, {J.a, Int(0)}, {J.b, J.d}});
}

inline IdealHNF ideal_product(const QuadOrder& o, const IdealHNF& I, const IdealHNF& J) {
    if (I.zero || J.zero) return IdealHNF::zero_ideal();
    OrderElt gi1(I.a, Int(0)), gi2(I.b, I.d);
    OrderElt gj1(J.a, Int(0)), gj2(J.b, J.d);
    std::vector<std::pair<Int, Int>> cols;
    OrderElt w(Int(0), Int(1));
    for (const auto& u : {gi1, gi2})
        for (const auto& v : {gj1, gj2}) {
            OrderElt g = elt_mul(o, u, v);
            cols.emplace_back(g.x, g.y);
            OrderElt wg = elt_mul(o, w, g);
            cols.emplace_back(wg.x, wg.y);
        }
    return hnf_from_columns(std::move(cols));
}

inline bool ideal_contains(const IdealHNF& I, const OrderElt& e) {
    if (I.zero) return e.is_zero();
    if (e.y % I.d != 0) return false;
    Int n = e.y / I.d;
    return (e.x - n * I.b) % I.a == 0;
}

inline bool ideal_is_omega_stable(const QuadOrder& o, const IdealHNF& I) {
    if (I.zero) return true;
    OrderElt w(Int(0), Int(1));
    OrderElt g1(I.a, Int(0)), g2(I.b, I.d);
    return ideal_contains(I, elt_mul(o, w, g1)) && ideal_contains(I, elt_mul(o, w, g2));
}

// ---------------------------------------------------------------------------
// prime tags and residue fields

enum class PrimeKind { Split, Inert, Ramified };

struct PrimeIdealTag {
    long p = 0;
    int degree = 1;             // 1 for split/ramified, 2 for inert
    PrimeKind kind = PrimeKind::Split;
    long root = -1;             // root of the minimal polynomial of w mod p (degree 1)
    bool regular = true;        // p does not divide the conductor
    bool operator==(const PrimeIdealTag&) const = default;
};

inline std::vector<long> omega_roots_mod_p(const QuadOrder& o, long p) {
    long c = mod_reduce(o.omega_norm_term(), p);
    long dm = ((o.disc % p) + p) % p;
    std::vector<long> roots;
    for (long t = 0; t < p; ++t) {
        long v = static_cast<long>(
            ((static_cast<__int128>(t) * t - static_cast<__int128>(dm) * t + c) % p + p) % p);
        if (v == 0) roots.push_back(t);
    }
    return roots;
}

// Factor p in the order.  Split tags are ordered by root: p' smaller, p'' larger.
inline std::vector<PrimeIdealTag> split_prime(const QuadOrder& o, long p) {
    if (!is_prime(p)) throw std::invalid_argument("split_prime: p must be prime");
    if (o.conductor % p == 0)
        throw std::domain_error("split_prime: p divides the conductor (irregular prime " +
                                std::to_string(p) + " for disc " + std::to_string(o.disc) + ")");
    auto roots = omega_roots_mod_p(o, p);
    std::vector<PrimeIdealTag> out;
    if (roots.empty()) {
        out.push_back({p, 2, PrimeKind::Inert, -1, true});
    } else if (roots.size() == 2) {
        out.push_back({p, 1, PrimeKind::Split, roots[0], true});
        out.push_back({p, 1, PrimeKind::Split, roots[1], true});
    } else {
        out.push_back({p, 1, PrimeKind::Ramified, roots[0], true});
    }
    return out;
}

inline IdealHNF tag_ideal(const QuadOrder& o, const PrimeIdealTag& t) {
    if (t.degree == 2) {
        IdealHNF I;
        I.a = t.p;
        I.b = 0;
        I.d = t.p;
        return I;  // the principal ideal (p)
    }
    // lattice spanned by p and (w - root): HNF [p, p - root mod p ... ]
    return ideal_from_generators(o, {OrderElt(Int(t.p), Int(0)), OrderElt(Int(-t.root), Int(1))});
}

// residue field element: degree 1 -> c0 in F_p; degree 2 -> c0 + c1*wbar in F_{p^2}
struct ResidueFieldElt {
    long p = 0;
    int degree = 1;
    long c0 = 0, c1 = 0;
    bool operator==(const ResidueFieldElt&) const = default;
    bool is_zero() const { return c0 == 0 && c1 == 0; }
};

inline ResidueFieldElt reduce_mod(const QuadOrder& o, const OrderElt& a, const PrimeIdealTag& t) {
    long p = t.p;
    if (t.degree == 1) {
        long x = mod_reduce(a.x, p), y = mod_reduce(a.y, p);
        long v = static_cast<long>((x + static_cast<__int128>(y) * t.root) % p);
        return {p, 1, v, 0};
    }
    return {p, 2, mod_reduce(a.x, p), mod_reduce(a.y, p)};
}

inline ResidueFieldElt rf_from_int(const QuadOrder&, const PrimeIdealTag& t, long v) {
    long c = ((v % t.p) + t.p) % t.p;
    return {t.p, t.degree, c, 0};
}

inline ResidueFieldElt rf_add(const ResidueFieldElt& a, const ResidueFieldElt& b) {
    return {a.p, a.degree, (a.c0 + b.c0) % a.p, (a.c1 + b.c1) % a.p};
}

inline ResidueFieldElt rf_sub(const ResidueFieldElt& a, const ResidueFieldElt& b) {
    return {a.p, a.degree, ((a.c0 - b.c0) % a.p + a.p) % a.p, ((a.c1 - b.c1) % a.p + a.p) % a.p};
}

inline ResidueFieldElt rf_mul(const QuadOrder& o, const ResidueFieldElt& a,
                              const ResidueFieldElt& b) {
    long p = a.p;
    if (a.degree == 1)
        return {p, 1, static_cast<long>((static_cast<__int128>(a.c0) * b.c0) % p), 0};
    // wbar^2 = disc*wbar - c
    long dm = ((o.disc % p) + p) % p;
    long c = mod_reduce(o.omega_norm_term(), p);
    __int128 t2 = static_cast<__int128>(a.c1) * b.c1 % p;
    __int128 c0 = (static_cast<__int128>(a.c0) * b.c0 - t2 * c) % p;
    __int128 c1 =
        (static_cast<__int128>(a.c0) * b.c1 + static_cast<__int128>(a.c1) * b.c0 + t2 * dm) % p;
    return {p, 2, static_cast<long>((c0 % p + p) % p), static_cast<long>((c1 % p + p) % p)};
}

inline ResidueFieldElt rf_pow(const QuadOrder& o, ResidueFieldElt a, long e) {
    ResidueFieldElt r{a.p, a.degree, 1, 0};
    while (e > 0) {
        if (e & 1) r = rf_mul(o, r, a);
        a = rf_mul(o, a, a);
        e >>= 1;
    }
    return r;
}

inline long rf_card(const ResidueFieldElt& a) {
    return a.degree == 1 ? a.p : a.p * a.p;
}

inline ResidueFieldElt rf_inv(const QuadOrder& o, const ResidueFieldElt& a) {
    if (a.is_zero()) throw std::domain_error("rf_inv: zero");
    return rf_pow(o, a, rf_card(a) - 2);
}

// ---------------------------------------------------------------------------
// Frobenius resultant: res_T(T^2 - a T + n, T^m - 1) = n^m - s_m + 1 with the
// Lucas sequence s_0 = 2, s_1 = a, s_k = a s_{k-1} - n s_{k-2}.
inline OrderElt frobenius_resultant(const QuadOrder& o, const OrderElt& a, const Int& n, long m) {
    if (m < 1) throw std::invalid_argument("frobenius_resultant: m >= 1 required");
    OrderElt s_prev(Int(2), Int(0));
    OrderElt s_cur = a;
    for (long k = 2; k <= m; ++k) {
        OrderElt s_next = elt_sub(elt_mul(o, a, s_cur), elt_scale(n, s_prev));
        s_prev = s_cur;
        s_cur = s_next;
    }
    Int nm = int_pow(n, static_cast<unsigned long>(m));
    return elt_add(elt_sub(OrderElt(nm, Int(0)), s_cur), OrderElt(Int(1), Int(0)));
}

// Prime-ideal support of an ideal: the tags over rational primes dividing the
// norm whose prime ideal contains I.
inline std::vector<PrimeIdealTag> ideal_prime_support(const QuadOrder& o, const IdealHNF& I) {
    if (I.zero) throw std::domain_error("ideal_prime_support: zero ideal");
    std::vector<PrimeIdealTag> out;
    Int nrm = ideal_norm(I);
    if (nrm == 1) return out;
    if (!nrm.fits_slong_p())
        throw std::overflow_error("ideal_prime_support: norm too large to factor");
    auto fac = factorize(nrm.get_si());
    OrderElt g1(I.a, Int(0)), g2(I.b, I.d);
    for (auto [p, e] : fac) {
        for (const auto& t : split_prime(o, p)) {
            IdealHNF P = tag_ideal(o, t);
            if (ideal_contains(P, g1) && ideal_contains(P, g2)) out.push_back(t);
        }
    }
    return out;
}

inline std::string tag_name(const PrimeIdealTag& t) {
    std::string base = std::to_string(t.p);
    switch (t.kind) {
        case PrimeKind::Inert:
            return base + "i";
        case PrimeKind::Ramified:
            return base + "r";
        case PrimeKind::Split:
            return base + (t.root >= 0 ? "s" + std::to_string(t.root) : "s");
    }
    return base;
}

}  // namespace bsdkit
