// Local Euler factors of the symmetric-square L-function of a real-quadratic
// newform: the imprimitive factors entering the Petersson-norm formula, the
// primitive ones, the correction quotients C_ell, and the norm evaluator.
//
// Conventions.  For ell coprime to N both local factors equal
//   (1 - ell T)((1 + ell T)^2 - a_ell^2 T),
// and for ell | N the imprimitive factor degenerates to 1 - a_ell^2 T
// (so 1 - T when ell || N and 1 when ell^2 | N).  The primitive factor at
// ell^2 | N is read off the minimal quadratic twist f~ through its level
// valuation v = v_ell(level(f~)):
//   v = 0: sym2_good(a_ell(f~), ell)        "twist-trivial"
//   v = 1: 1 - T                            "twist-mult"
//   v = 2: 1 + s*ell*T, s = -1 iff the local image is abelian
//                                           "twist-level2-(non)abelian"
//   v >= 3: 1                               "wild"
// C_ell is the quotient primitive(ell^-2) / imprimitive(ell^-2); it lies in
// the coefficient field K (a rational number unless a_ell(f~) is irrational).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsdkit/newform_store.hpp"
#include "bsdkit/quad_order.hpp"
#include "bsdkit/real.hpp"

namespace bsdkit {

// ---------------------------------------------------------------------------
// polynomials in T with coefficients in the order (c[0] + c[1] T + ...)

struct Sym2Poly {
    std::vector<OrderElt> c;

    friend bool operator==(const Sym2Poly& a, const Sym2Poly& b) { return a.c == b.c; }
};

inline Sym2Poly poly_const_one() { return {{OrderElt(Int(1), Int(0))}}; }

// 1 + c1 T with integer c1
inline Sym2Poly poly_linear(const Int& c1) {
    return {{OrderElt(Int(1), Int(0)), OrderElt(c1, Int(0))}};
}

// ---------------------------------------------------------------------------
// exact elements num/den of the coefficient field K

struct FieldRat {
    OrderElt num;
    Int den = 1;
};

inline FieldRat fr_normalize(FieldRat a) {
    if (a.den == 0) throw std::invalid_argument("FieldRat: zero denominator");
    if (a.den < 0) {
        a.den = -a.den;
        a.num = elt_neg(a.num);
    }
    Int g = gcd(gcd(abs(a.num.x), abs(a.num.y)), a.den);
    if (g > 1) {
        a.num.x /= g;
        a.num.y /= g;
        a.den /= g;
    }
    return a;
}

inline FieldRat fr_from_rat(const Rat& q) {
    return fr_normalize({OrderElt(Int(q.get_num()), Int(0)), Int(q.get_den())});
}

inline FieldRat fr_from_int(long n) { return {OrderElt(Int(n), Int(0)), Int(1)}; }

inline bool fr_is_rational(const FieldRat& a) { return a.num.y == 0; }

inline Rat fr_to_rat(const FieldRat& a) {
    if (!fr_is_rational(a)) throw std::domain_error("FieldRat: value is irrational");
    Rat q(a.num.x, a.den);
    q.canonicalize();
    return q;
}

inline bool fr_equal(const FieldRat& a, const FieldRat& b) {
    FieldRat x = fr_normalize(a), y = fr_normalize(b);
    return x.num == y.num && x.den == y.den;
}

inline FieldRat fr_mul(const QuadOrder& o, const FieldRat& a, const FieldRat& b) {
    return fr_normalize({elt_mul(o, a.num, b.num), a.den * b.den});
}

inline FieldRat fr_inv(const QuadOrder& o, const FieldRat& a) {
    Int n = elt_norm(o, a.num);
    if (n == 0) throw std::domain_error("FieldRat: division by zero");
    return fr_normalize({elt_scale(a.den, elt_conj(o, a.num)), n});
}

inline FieldRat fr_div(const QuadOrder& o, const FieldRat& a, const FieldRat& b) {
    return fr_mul(o, a, fr_inv(o, b));
}

// value of P at T = ell^-2, as an element of K
inline FieldRat poly_eval_inv_ell2(const QuadOrder& o, const Sym2Poly& p, long ell) {
    if (p.c.empty()) return fr_from_int(0);
    long deg = static_cast<long>(p.c.size()) - 1;
    Int ell2 = Int(ell) * ell;
    OrderElt acc(Int(0), Int(0));
    Int pw = 1;  // ell^{2(deg - i)} built from the top coefficient down
    for (long i = deg; i >= 0; --i) {
        acc = elt_add(acc, elt_scale(pw, p.c[i]));
        pw *= ell2;
    }
    Int den = 1;
    for (long i = 0; i < deg; ++i) den *= ell2;
    return fr_normalize({acc, den});
}

// embed num/den into R through sqrt(disc) -> embedding_sign * sqrt(disc)
inline Real fr_embed(const QuadOrder& o, const FieldRat& a, int embedding_sign,
                     long digits = 60) {
    Real sq = real_sqrt(Real::of(o.disc, digits));
    if (embedding_sign < 0) sq = -sq;
    Real omega = (Real::of(o.disc, digits) + sq) / Real::of(2, digits);
    return (Real::of(a.num.x, digits) + Real::of(a.num.y, digits) * omega) /
           Real::of(a.den, digits);
}

// ---------------------------------------------------------------------------
// Euler factor reports

enum class Sym2Case {
    Good,
    Multiplicative,
    TwistTrivial,
    TwistMult,
    TwistLevel2Abelian,
    TwistLevel2Nonabelian,
    Wild,
};

inline std::string sym2_case_name(Sym2Case c) {
    switch (c) {
        case Sym2Case::Good: return "good";
        case Sym2Case::Multiplicative: return "multiplicative";
        case Sym2Case::TwistTrivial: return "twist-trivial";
        case Sym2Case::TwistMult: return "twist-mult";
        case Sym2Case::TwistLevel2Abelian: return "twist-level2-abelian";
        case Sym2Case::TwistLevel2Nonabelian: return "twist-level2-nonabelian";
        case Sym2Case::Wild: return "wild";
    }
    return "?";
}

enum class Provenance { Given, Assumed };

// conductor exponent of the symmetric square at ell, possibly an interval
// (lo < hi only in the wild case)
struct ExponentRange {
    long lo = 0, hi = 0;
    bool exact() const { return lo == hi; }
    friend bool operator==(const ExponentRange& a, const ExponentRange& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

struct EulerFactorReport {
    long ell = 0;
    Sym2Poly imprimitive_poly;
    Sym2Poly primitive_poly;
    FieldRat C_ell;
    Sym2Case kase = Sym2Case::Good;
    ExponentRange conductor_exponent;
    // provenance of the case-(3) sign / wild conductor exponent; when
    // Assumed, C_alternatives holds every compatible C_ell (chosen one first)
    Provenance provenance = Provenance::Given;
    std::vector<FieldRat> C_alternatives;
};

// (1 - ell T)((1 + ell T)^2 - a^2 T)
//   = 1 + (ell - a^2) T + ell (a^2 - ell) T^2 - ell^3 T^3
inline Sym2Poly sym2_good(const QuadOrder& o, const OrderElt& a, long ell) {
    OrderElt a2 = elt_mul(o, a, a);
    Sym2Poly p;
    p.c.push_back(OrderElt(Int(1), Int(0)));
    p.c.push_back(elt_sub(OrderElt(Int(ell), Int(0)), a2));
    p.c.push_back(elt_scale(Int(ell), elt_sub(a2, OrderElt(Int(ell), Int(0)))));
    p.c.push_back(OrderElt(-Int(ell) * ell * ell, Int(0)));
    return p;
}

namespace detail {

inline long valuation(long n, long ell) {
    long v = 0;
    while (n % ell == 0) {
        n /= ell;
        ++v;
    }
    return v;
}

}  // namespace detail

inline EulerFactorReport sym2_bad(const NewformRecord& f, long ell,
                                  const TwistData* twist = nullptr) {
    if (f.level % ell != 0)
        throw std::invalid_argument("sym2_bad: ell does not divide the level");
    QuadOrder o = f.order();
    long v = detail::valuation(f.level, ell);
    EulerFactorReport rep;
    rep.ell = ell;
    if (v == 1) {
        // a_ell = +-1, so the imprimitive factor 1 - a^2 T is 1 - T and the
        // primitive one agrees with it
        rep.imprimitive_poly = poly_linear(Int(-1));
        rep.primitive_poly = poly_linear(Int(-1));
        rep.C_ell = fr_from_int(1);
        rep.kase = Sym2Case::Multiplicative;
        rep.conductor_exponent = {2, 2};
        return rep;
    }
    if (twist == nullptr) {
        auto it = f.twists.find(ell);
        if (it == f.twists.end())
            throw std::invalid_argument("sym2_bad: missing twist data at ell = " +
                                        std::to_string(ell) + " with ell^2 | N");
        twist = &it->second;
    }
    if (twist->ell != ell)
        throw std::invalid_argument("sym2_bad: twist data is for a different prime");
    rep.imprimitive_poly = poly_const_one();
    long vt = twist->v_twist_level;
    Int L(ell);
    if (vt == 0) {
        rep.primitive_poly = sym2_good(o, twist->a_twist, ell);
        // (ell - 1)((ell + 1)^2 - a~^2) / ell^3
        OrderElt a2 = elt_mul(o, twist->a_twist, twist->a_twist);
        OrderElt num = elt_scale(L - 1, elt_sub(OrderElt((L + 1) * (L + 1), Int(0)), a2));
        rep.C_ell = fr_normalize({num, L * L * L});
        rep.kase = Sym2Case::TwistTrivial;
        rep.conductor_exponent = {0, 0};
    } else if (vt == 1) {
        rep.primitive_poly = poly_linear(Int(-1));
        rep.C_ell = fr_from_rat(Rat(L * L - 1, L * L));
        rep.kase = Sym2Case::TwistMult;
        rep.conductor_exponent = {2, 2};
    } else if (vt == 2) {
        // 1 + s*ell*T with s = -1 iff the local image is abelian; when the
        // sign is not supplied we take the abelian branch and flag it
        int s = twist->abelian_sign.value_or(-1);
        rep.primitive_poly = poly_linear(Int(s) * L);
        rep.C_ell = fr_from_rat(Rat(L + s, L));
        rep.kase = s < 0 ? Sym2Case::TwistLevel2Abelian : Sym2Case::TwistLevel2Nonabelian;
        rep.conductor_exponent = {2, 2};
        if (!twist->abelian_sign) {
            rep.provenance = Provenance::Assumed;
            rep.C_alternatives = {rep.C_ell, fr_from_rat(Rat(L - s, L))};
        }
    } else {
        rep.primitive_poly = poly_const_one();
        rep.C_ell = fr_from_int(1);
        rep.kase = Sym2Case::Wild;
        rep.conductor_exponent = {4, 2 * vt - 1};
        rep.provenance = Provenance::Assumed;
    }
    return rep;
}

// report at any prime; good primes get the common degree-3 factor on both
// sides and C_ell = 1
inline EulerFactorReport sym2_report(const NewformRecord& f, long ell) {
    if (f.level % ell == 0) return sym2_bad(f, ell);
    EulerFactorReport rep;
    rep.ell = ell;
    QuadOrder o = f.order();
    Sym2Poly p = sym2_good(o, get_ap(f, ell), ell);
    rep.imprimitive_poly = p;
    rep.primitive_poly = p;
    rep.C_ell = fr_from_int(1);
    rep.kase = Sym2Case::Good;
    rep.conductor_exponent = {0, 0};
    return rep;
}

// the defining quotient primitive(ell^-2) / imprimitive(ell^-2), recomputed
// from the stored polynomials (used as a cross-check on every branch)
inline FieldRat sym2_c_from_polys(const QuadOrder& o, const EulerFactorReport& rep) {
    return fr_div(o, poly_eval_inv_ell2(o, rep.primitive_poly, rep.ell),
                  poly_eval_inv_ell2(o, rep.imprimitive_poly, rep.ell));
}

// ---------------------------------------------------------------------------
// Petersson norm ||f^sigma||^2 = N / (8 pi^3) * prod C_ell * L(Sym^2 f^sigma, 2)

inline Real petersson_norm(long N, const std::vector<Real>& c_factors, const Real& L,
                           long digits = 60) {
    if (N <= 0) throw std::invalid_argument("petersson_norm: level must be positive");
    for (const Real& c : c_factors)
        if (c.sign() <= 0)
            throw std::invalid_argument("petersson_norm: nonpositive correction factor");
    if (L.sign() < 0)
        throw std::invalid_argument("petersson_norm: negative L-value");
    Real out = Real::of(N, digits) * L;
    Real pi = Real::pi(digits);
    out = out / (Real::of(8, digits) * pi * pi * pi);
    for (const Real& c : c_factors) out = out * c;
    return out;
}

}  // namespace bsdkit
