// Invariants of conjugacy classes in PGL2 over finite fields (u = tr^2/det
// and the discriminant symbol Delta), detection of projective elements of
// small order, and the menu of maximal subgroups relevant for a prime tag.
#pragma once

#include <optional>
#include <set>
#include <stdexcept>

#include "bsdkit/quad_order.hpp"

namespace bsdkit {

enum class SubgroupType { R, L, Ns, Nns, S4, A5, A4 };

inline const char* subgroup_name(SubgroupType t) {
    switch (t) {
        case SubgroupType::R: return "R";
        case SubgroupType::L: return "L";
        case SubgroupType::Ns: return "Ns";
        case SubgroupType::Nns: return "Nns";
        case SubgroupType::S4: return "S4";
        case SubgroupType::A5: return "A5";
        case SubgroupType::A4: return "A4";
    }
    return "?";
}

struct FrobInvariants {
    ResidueFieldElt u;          // a_ell^2 / ell in the residue field
    std::optional<int> delta;   // Legendre symbol of a^2 - 4*ell; absent when p = 2
    bool a_nonzero_mod_p = false;
};

// Legendre symbol of a residue-field element: z^((q-1)/2), as -1/0/1.
inline int rf_legendre(const QuadOrder& o, const ResidueFieldElt& z) {
    if (z.p == 2) throw std::domain_error("rf_legendre: undefined in characteristic 2");
    if (z.is_zero()) return 0;
    long q = rf_card(z);
    ResidueFieldElt r = rf_pow(o, z, (q - 1) / 2);
    return (r.c0 == 1 && r.c1 == 0) ? 1 : -1;
}

inline FrobInvariants frob_invariants(const QuadOrder& o, const OrderElt& a, long ell,
                                      const PrimeIdealTag& tag) {
    if (!tag.regular) throw std::domain_error("frob_invariants: irregular tag");
    if (ell % tag.p == 0)
        throw std::domain_error("frob_invariants: ell congruent to 0 mod p");
    ResidueFieldElt ab = reduce_mod(o, a, tag);
    ResidueFieldElt lb = rf_from_int(o, tag, ell);
    FrobInvariants out;
    out.u = rf_mul(o, rf_mul(o, ab, ab), rf_inv(o, lb));
    out.a_nonzero_mod_p = !ab.is_zero();
    if (tag.p != 2) {
        OrderElt disc_elt = elt_sub(elt_mul(o, a, a), OrderElt(Int(4) * ell, Int(0)));
        out.delta = rf_legendre(o, reduce_mod(o, disc_elt, tag));
    }
    return out;
}

enum class ProjOrderClass { Unipotent, Ord2, Ord3, Ord4, Ord5, Other };

struct ProjOrderResult {
    ProjOrderClass cls = ProjOrderClass::Other;
    bool caveat = false;  // a characteristic hypothesis of the detection rule failed
};

inline ProjOrderResult order_from_u(const QuadOrder& o, const ResidueFieldElt& u) {
    long p = u.p;
    auto scalar = [&](long v) { return rf_from_int(o, PrimeIdealTag{p, u.degree}, v); };
    auto eq = [&](long v) {
        ResidueFieldElt s = scalar(v);
        return u.c0 == s.c0 && u.c1 == s.c1;
    };
    if (eq(4)) return {ProjOrderClass::Unipotent, p == 2};  // in char 2, 4 = 0 = u(ord 2)
    if (eq(0)) return {ProjOrderClass::Ord2, false};        // p = 2 falls into the case above
    if (eq(1)) return p != 3 ? ProjOrderResult{ProjOrderClass::Ord3, false}
                             : ProjOrderResult{ProjOrderClass::Other, true};
    if (eq(2)) return {ProjOrderClass::Ord4, false};        // p = 2: 2 = 0, handled above
    ResidueFieldElt q5 = rf_add(rf_sub(rf_mul(o, u, u), rf_mul(o, scalar(3), u)), scalar(1));
    if (q5.is_zero())
        return p != 5 ? ProjOrderResult{ProjOrderClass::Ord5, false}
                      : ProjOrderResult{ProjOrderClass::Other, true};
    return {ProjOrderClass::Other, false};
}

// Initial candidate set of maximal-subgroup types for the image at a tag
// (steps 1-4 of the fixed-prime image algorithm).  A4 appears only for the
// residue field F_3.  The tiny-field coincidences are handled separately by
// subgroup_covers below.
inline std::set<SubgroupType> max_subgroup_menu(const PrimeIdealTag& tag, long N) {
    if (!tag.regular) throw std::domain_error("max_subgroup_menu: irregular tag");
    long p = tag.p;
    std::set<SubgroupType> S{SubgroupType::R, SubgroupType::L, SubgroupType::Ns,
                             SubgroupType::Nns, SubgroupType::S4, SubgroupType::A5};
    if (tag.degree == 1) {
        S.erase(SubgroupType::L);
        S.erase(SubgroupType::A5);
        if (p == 2 || p == 3) {
            S.erase(SubgroupType::Ns);
            S.erase(SubgroupType::S4);
        }
        if (p == 3) S.insert(SubgroupType::A4);  // PGL2(F_3) = S_4 has A_4 maximal
    } else {
        if (p == 2) {
            S.erase(SubgroupType::Ns);
            S.erase(SubgroupType::S4);
            S.erase(SubgroupType::A5);
        }
        if (p == 3) {
            S.erase(SubgroupType::Ns);
            S.erase(SubgroupType::Nns);
            S.erase(SubgroupType::S4);
        }
        if (p >= 5 && N % (p * p) != 0) S.erase(SubgroupType::Nns);
        long r10 = p % 10;
        if (r10 != 3 && r10 != 7) S.erase(SubgroupType::A5);
    }
    long r8 = p % 8;
    if (r8 != 3 && r8 != 5) S.erase(SubgroupType::S4);
    return S;
}

// Whether a subgroup type reported elsewhere (e.g. in published tables) is
// covered by a candidate set, taking the small-field coincidences into
// account: over F_4 the sub-line stabilizer and the normalizer of a split
// Cartan coincide; over F_9 split-Cartan normalizers sit inside A5-type
// subgroups, nonsplit-Cartan normalizers inside sub-line stabilizers, and
// A4 sits inside A5.
inline bool subgroup_covers(const std::set<SubgroupType>& candidates, SubgroupType wanted,
                            long p, int degree) {
    if (candidates.count(wanted)) return true;
    long q = degree == 2 ? p * p : p;
    if (q == 4) {
        if (wanted == SubgroupType::L && candidates.count(SubgroupType::Ns)) return true;
        if (wanted == SubgroupType::Ns && candidates.count(SubgroupType::L)) return true;
    }
    if (q == 9) {
        if (wanted == SubgroupType::Ns && candidates.count(SubgroupType::A5)) return true;
        if (wanted == SubgroupType::Nns && candidates.count(SubgroupType::L)) return true;
        if (wanted == SubgroupType::A4 && candidates.count(SubgroupType::A5)) return true;
    }
    return false;
}

}  // namespace bsdkit
