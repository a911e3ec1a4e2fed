// The five image-classification algorithms: per-prime-ideal candidate sets
// of maximal subgroup types, the Dieulefait irreducibility bound, the
// reducible-splitting refinement, sub-line exclusion, non-CM certification,
// and the superset of non-maximal primes, plus table assembly.
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bsdkit/gl2_taxonomy.hpp"
#include "bsdkit/newform_store.hpp"

namespace bsdkit {

// strict ordering so prime tags can key maps/sets
struct TagLess {
    bool operator()(const PrimeIdealTag& a, const PrimeIdealTag& b) const {
        if (a.p != b.p) return a.p < b.p;
        if (a.degree != b.degree) return a.degree < b.degree;
        return a.root < b.root;
    }
};

using TagSet = std::set<PrimeIdealTag, TagLess>;

inline long valuation(long N, long p) {
    long v = 0;
    while (N % p == 0) {
        N /= p;
        ++v;
    }
    return v;
}

inline std::vector<PrimeIdealTag> all_tags_over(const QuadOrder& o, long p) {
    return split_prime(o, p);
}

// ---------------------------------------------------------------------------
// image_for_fixed_prime

struct FixedPrimeResult {
    std::set<SubgroupType> candidates;
    std::map<SubgroupType, long> witness;  // first ell whose invariants removed the type
};

inline FixedPrimeResult image_for_fixed_prime(const NewformRecord& f, const PrimeIdealTag& tag,
                                              long B) {
    QuadOrder o = f.order();
    long p = tag.p;
    long N = f.level;
    std::set<SubgroupType> S = max_subgroup_menu(tag, N);
    // det(rho) is the mod-p cyclotomic character, which is surjective onto
    // F_p^x, so the image is never inside PSL_2; this rules out A4 for q = 3
    S.erase(SubgroupType::A4);
    FixedPrimeResult out;
    auto remove = [&](SubgroupType t, long ell) {
        if (S.erase(t)) out.witness[t] = ell;
    };
    ResidueFieldElt zero = rf_from_int(o, tag, 0);
    ResidueFieldElt one = rf_from_int(o, tag, 1);
    ResidueFieldElt two = rf_from_int(o, tag, 2);
    ResidueFieldElt four = rf_from_int(o, tag, 4);
    for (long ell : primes_upto(B)) {
        if (S.empty()) break;
        if (N % ell == 0 || ell == p) continue;
        FrobInvariants fi = frob_invariants(o, get_ap(f, ell), ell, tag);
        const ResidueFieldElt& u = fi.u;
        bool u_small = (u == zero || u == one || u == two || u == four);
        if (!u_small) remove(SubgroupType::S4, ell);
        ResidueFieldElt golden = rf_add(
            rf_sub(rf_mul(o, u, u), rf_mul(o, rf_from_int(o, tag, 3), u)), one);
        if (!(u == zero || u == one || u == four) && !golden.is_zero())
            remove(SubgroupType::A5, ell);
        if (tag.degree == 2 && u.c1 != 0) remove(SubgroupType::L, ell);
        if (p == 2 && tag.degree == 1 && u == one) remove(SubgroupType::R, ell);
        if (p == 2 && tag.degree == 2) {
            remove(SubgroupType::R, ell);
            if (u == one) remove(SubgroupType::Nns, ell);
        }
        if (p != 2 && fi.delta == -1) {
            remove(SubgroupType::R, ell);
            remove(SubgroupType::L, ell);
            if (!(u == zero)) remove(SubgroupType::Ns, ell);
        }
        if (p != 2 && fi.delta == 1 && !(u == zero)) remove(SubgroupType::Nns, ell);
    }
    out.candidates = std::move(S);
    return out;
}

// ---------------------------------------------------------------------------
// Dieulefait irreducibility

struct DieulefaitResult {
    TagSet S;
    bool failure = false;
    Int ideal_norm_value = 0;  // norm of the accumulated ideal (0 on failure)
};

inline DieulefaitResult dieulefait_irreducibility(const NewformRecord& f, long B) {
    QuadOrder o = f.order();
    long N = f.level;
    long d_max = 1;
    for (auto [p, e] : factorize(N))
        for (long i = 0; i < e / 2; ++i) d_max *= p;
    IdealHNF I = IdealHNF::zero_ideal();
    for (long ell : primes_upto(B)) {
        if (N % ell == 0) continue;
        long m = 1;
        if (d_max > 1) {
            long r = ell % d_max, acc = r;
            m = 1;
            while (acc != 1) {
                acc = (acc * r) % d_max;
                ++m;
            }
        }
        OrderElt res = frobenius_resultant(o, get_ap(f, ell), Int(ell), m);
        I = ideal_sum(I, ideal_principal(o, elt_scale(Int(ell), res)));
        if (!I.zero && ideal_norm(I) == 1) break;
    }
    DieulefaitResult out;
    if (I.zero) {
        out.failure = true;
        return out;
    }
    out.ideal_norm_value = ideal_norm(I);
    if (ideal_norm(I) != 1)
        for (const auto& t : ideal_prime_support(o, I)) out.S.insert(t);
    for (auto [p, e] : factorize(N))
        if (e >= 2)
            for (const auto& t : all_tags_over(o, p)) out.S.insert(t);
    return out;
}

// ---------------------------------------------------------------------------
// characters of (Z/d)^x with values in a residue field

struct UnitGroupDecomp {
    long d = 1;
    std::vector<long> gens;    // generators of (Z/d)^x via CRT lifts
    std::vector<long> orders;  // their orders
    std::map<long, std::vector<long>> dlog;  // unit -> exponent vector
};

inline long crt_lift(long r, long m, long d) {
    // the unit mod d that is r mod m and 1 mod d/m (gcd(m, d/m) = 1)
    long m2 = d / m;
    for (long x = 1; x < d; ++x)
        if (x % m == ((r % m) + m) % m && x % m2 == 1 % m2) return x;
    throw std::logic_error("crt_lift failed");
}

inline UnitGroupDecomp unit_group(long d) {
    UnitGroupDecomp G;
    G.d = d;
    for (auto [p, e] : factorize(d)) {
        long pk = 1;
        for (int i = 0; i < e; ++i) pk *= p;
        if (p == 2) {
            if (e == 1) continue;
            G.gens.push_back(crt_lift(pk - 1, pk, d));  // -1, order 2
            G.orders.push_back(2);
            if (e >= 3) {
                G.gens.push_back(crt_lift(5, pk, d));
                G.orders.push_back(pk / 4);
            }
        } else {
            // smallest primitive root mod p^k
            long phi = pk / p * (p - 1);
            auto pf = factorize(phi);
            long g = 0;
            for (long c = 2; c < pk; ++c) {
                if (c % p == 0) continue;
                bool prim = true;
                for (auto [q, _] : pf)
                    if (mod_pow(c, phi / q, pk) == 1) {
                        prim = false;
                        break;
                    }
                if (prim) {
                    g = c;
                    break;
                }
            }
            G.gens.push_back(crt_lift(g, pk, d));
            G.orders.push_back(phi);
        }
    }
    // enumerate the group to build discrete logs
    std::vector<long> exps(G.gens.size(), 0);
    while (true) {
        long v = 1;
        for (size_t i = 0; i < G.gens.size(); ++i)
            v = static_cast<long>((static_cast<__int128>(v) * mod_pow(G.gens[i], exps[i], d)) % d);
        G.dlog.emplace(v, exps);
        size_t i = 0;
        for (; i < exps.size(); ++i) {
            if (++exps[i] < G.orders[i]) break;
            exps[i] = 0;
        }
        if (i == exps.size()) break;
        if (G.gens.empty()) break;
    }
    return G;
}

// A character of (Z/d)^x with values in the multiplicative group of a
// residue field, given by the images of the decomposition generators.
struct ModChar {
    long d = 1;
    std::vector<ResidueFieldElt> gen_images;
    std::map<long, ResidueFieldElt> table;  // value at each unit mod d

    bool is_trivial() const {
        for (const auto& [r, v] : table)
            if (!(v.c0 == 1 && v.c1 == 0)) return false;
        return true;
    }
    bool is_quadratic() const {  // order dividing 2, values +-1
        for (const auto& [r, v] : table)
            if (v.c1 != 0 || (v.c0 != 1 && v.c0 != v.p - 1)) return false;
        return true;
    }
    // matches the Kronecker character of fundamental discriminant Dp?
    bool matches_kronecker(long Dp) const {
        for (const auto& [r, v] : table) {
            int k = kronecker(Dp, r);
            long want = k == 1 ? 1 : (v.p - 1);
            if (v.c1 != 0 || v.c0 != want) return false;
        }
        return true;
    }
    ResidueFieldElt value(const QuadOrder& o, long n) const {
        if (d == 1) return table.begin()->second;  // the trivial character
        long r = ((n % d) + d) % d;
        auto it = table.find(r);
        if (it == table.end()) throw std::domain_error("character value at non-unit");
        return it->second;
    }
};

// generator of F_q^x for the residue field of a tag
inline ResidueFieldElt rf_generator(const QuadOrder& o, const PrimeIdealTag& tag) {
    long q = tag.degree == 2 ? tag.p * tag.p : tag.p;
    auto qf = factorize(q - 1);
    for (long c0 = 0; c0 < tag.p; ++c0)
        for (long c1 = (tag.degree == 2 ? 0 : 0); c1 < (tag.degree == 2 ? tag.p : 1); ++c1) {
            ResidueFieldElt z{tag.p, tag.degree, c0, c1};
            if (z.is_zero()) continue;
            bool prim = true;
            for (auto [r, _] : qf) {
                ResidueFieldElt w = rf_pow(o, z, (q - 1) / r);
                if (w.c0 == 1 && w.c1 == 0) {
                    prim = false;
                    break;
                }
            }
            if (prim) return z;
        }
    throw std::logic_error("rf_generator: no generator found");
}

// all characters of (Z/d)^x with values in the residue field of tag
inline std::vector<ModChar> characters_mod(const QuadOrder& o, long d, const PrimeIdealTag& tag) {
    UnitGroupDecomp G = unit_group(d);
    long q = tag.degree == 2 ? tag.p * tag.p : tag.p;
    ResidueFieldElt w = rf_generator(o, tag);
    std::vector<long> counts;
    for (long n : G.orders) counts.push_back(int_gcd(Int(n), Int(q - 1)).get_si());
    std::vector<long> pick(G.gens.size(), 0);
    std::vector<ModChar> out;
    while (true) {
        ModChar ch;
        ch.d = d;
        for (size_t i = 0; i < G.gens.size(); ++i)
            ch.gen_images.push_back(rf_pow(o, w, (q - 1) / counts[i] * pick[i]));
        for (const auto& [r, exps] : G.dlog) {
            ResidueFieldElt v = rf_from_int(o, tag, 1);
            for (size_t i = 0; i < exps.size(); ++i)
                v = rf_mul(o, v, rf_pow(o, ch.gen_images[i], exps[i]));
            ch.table[r] = v;
        }
        out.push_back(std::move(ch));
        size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < counts[i]) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
        if (pick.empty()) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// refine_reducible

struct ReduciblePair {
    ModChar eps;
    int n = 0;  // constituents eps * chi_p^n and eps^{-1} chi_p^{1-n}
};

// Compatible (eps, n) pairs for a potentially reducible tag (requires
// p^2 not dividing N); an empty result certifies irreducibility.
inline std::vector<ReduciblePair> refine_reducible(const NewformRecord& f,
                                                   const PrimeIdealTag& tag, long B) {
    QuadOrder o = f.order();
    long p = tag.p;
    long N = f.level;
    if (valuation(N, p) >= 2)
        throw std::domain_error("refine_reducible: requires p^2 not dividing N");
    std::vector<ReduciblePair> pairs;
    for (long d = 1; d * d <= N; ++d) {
        if (N % (d * d) != 0 || d % p == 0) continue;
        for (auto& ch : characters_mod(o, d, tag))
            for (int n : {0, 1}) pairs.push_back({ch, n});
    }
    for (long ell : primes_upto(B)) {
        if (pairs.empty()) break;
        if (N % ell == 0 || ell == p) continue;
        ResidueFieldElt ab = reduce_mod(o, get_ap(f, ell), tag);
        ResidueFieldElt lb = rf_from_int(o, tag, ell);
        std::vector<ReduciblePair> keep;
        for (auto& pr : pairs) {
            long r = ell % pr.eps.d;
            if (pr.eps.d > 1 && int_gcd(Int(r), Int(pr.eps.d)) != 1) {
                keep.push_back(pr);  // ell ramified in eps: no test possible here
                continue;
            }
            ResidueFieldElt e = pr.eps.value(o, ell);
            ResidueFieldElt t1 = rf_mul(o, e, rf_pow(o, lb, pr.n));
            ResidueFieldElt t2 = rf_mul(o, rf_inv(o, e), rf_pow(o, lb, 1 - pr.n));
            if (rf_add(t1, t2) == ab) keep.push_back(pr);
        }
        pairs = std::move(keep);
    }
    return pairs;
}

// For tags with p^2 | N the splitting has the shape chi_p^a + chi_p^{1-a}
// (exponents mod p - 1); scan all a and keep the compatible ones.
inline std::vector<long> refine_cyclotomic_pairs(const NewformRecord& f,
                                                 const PrimeIdealTag& tag, long B) {
    QuadOrder o = f.order();
    long p = tag.p;
    long N = f.level;
    std::vector<long> cands;
    for (long a = 0; a <= p - 2; ++a) cands.push_back(a);
    for (long ell : primes_upto(B)) {
        if (cands.empty()) break;
        if (N % ell == 0 || ell == p) continue;
        ResidueFieldElt ab = reduce_mod(o, get_ap(f, ell), tag);
        ResidueFieldElt lb = rf_from_int(o, tag, ell);
        std::vector<long> keep;
        for (long a : cands) {
            long b = ((1 - a) % (p - 1) + (p - 1)) % (p - 1);
            if (rf_add(rf_pow(o, lb, a), rf_pow(o, lb, b)) == ab) keep.push_back(a);
        }
        cands = std::move(keep);
    }
    return cands;
}

// ---------------------------------------------------------------------------
// exclude_subline

struct SublineResult {
    TagSet S;
    bool failure = false;
    Int R = 0;
};

inline SublineResult exclude_subline(const NewformRecord& f, long B) {
    QuadOrder o = f.order();
    long N = f.level;
    Int R = 0;
    for (long ell : primes_upto(B)) {
        if (N % ell == 0) continue;
        const OrderElt& a = get_ap(f, ell);
        // (a^2 - (a^sigma)^2)/sqrt(disc) = y * trace(a)
        Int term = Int(ell) * a.y * elt_trace(o, a);
        R = int_gcd(R, term);
        if (R == 1) break;
    }
    SublineResult out;
    out.R = R;
    if (R == 0) {
        out.failure = true;
        return out;
    }
    if (R > 1 && R.fits_slong_p())
        for (auto [p, e] : factorize(R.get_si()))
            for (const auto& t : all_tags_over(o, p))
                if (t.degree == 2) out.S.insert(t);
    return out;
}

// ---------------------------------------------------------------------------
// non_cm

inline bool is_fundamental_disc(long D) {
    if (D == 1) return true;
    auto squarefree = [](long n) {
        if (n < 0) n = -n;
        for (auto [p, e] : factorize(n))
            if (e >= 2) return false;
        return true;
    };
    long m = ((D % 4) + 4) % 4;
    if (m == 1) return squarefree(D);
    if (m == 0) {
        long q = D / 4;
        long qm = ((q % 4) + 4) % 4;
        return (qm == 2 || qm == 3) && squarefree(q);
    }
    return false;
}

struct NonCmResult {
    bool non_cm = false;
    long failing_delta = 0;  // the Delta with no witness when non_cm is false
};

inline NonCmResult non_cm(const NewformRecord& f, long B) {
    long N = f.level;
    for (long delta = 1; delta * delta <= N; ++delta) {
        if (N % (delta * delta) != 0) continue;
        if (!is_fundamental_disc(-delta)) continue;  // no imaginary quadratic field
        bool witness = false;
        for (long ell : primes_upto(B)) {
            if (kronecker(-delta, ell) != -1) continue;
            if (!get_ap(f, ell).is_zero()) {
                witness = true;
                break;
            }
        }
        if (!witness) return {false, delta};
    }
    return {true, 0};
}

// ---------------------------------------------------------------------------
// superset_nonmax

struct SupersetResult {
    TagSet S;
    bool failure = false;
    std::string failure_reason;
};

inline std::vector<long> quad_char_discs_of_conductor(long d) {
    // fundamental discriminants D' with |D'| = d (the quadratic characters
    // of conductor d are exactly the Kronecker symbols of these)
    std::vector<long> out;
    for (long Dp : {d, -d})
        if (Dp != 1 && is_fundamental_disc(Dp)) out.push_back(Dp);
    return out;
}

inline SupersetResult superset_nonmax(const NewformRecord& f, long B) {
    QuadOrder o = f.order();
    long N = f.level;
    SupersetResult out;
    if (!non_cm(f, B).non_cm) {
        out.failure = true;
        out.failure_reason = "CM could not be excluded";
        return out;
    }
    for (long p : {2L, 3L, 5L})
        for (const auto& t : all_tags_over(o, p)) out.S.insert(t);
    for (auto [p, e] : factorize(N))
        if (e >= 2)
            for (const auto& t : all_tags_over(o, p)) out.S.insert(t);
    DieulefaitResult dr = dieulefait_irreducibility(f, B);
    if (dr.failure) {
        out.failure = true;
        out.failure_reason = "Dieulefait accumulation stayed zero";
        return out;
    }
    for (const auto& t : dr.S) out.S.insert(t);
    SublineResult sr = exclude_subline(f, B);
    if (sr.failure) {
        out.failure = true;
        out.failure_reason = "sub-line gcd stayed zero";
        return out;
    }
    for (const auto& t : sr.S) out.S.insert(t);
    // possible conductors of the dihedral character
    std::vector<long> D;
    for (long d = 1; d * d <= N; ++d)
        if (N % (d * d) == 0 && d % 2 == 1) D.push_back(d);
    if (N % 4 == 0) {
        std::vector<long> more;
        for (long d : D) {
            more.push_back(4 * d);
            more.push_back(8 * d);
        }
        D.insert(D.end(), more.begin(), more.end());
    }
    for (long d : D) {
        for (long Dp : quad_char_discs_of_conductor(d)) {
            IdealHNF I = IdealHNF::zero_ideal();
            for (long ell : primes_upto(B)) {
                if (N % ell == 0 || kronecker(Dp, ell) != -1) continue;
                I = ideal_sum(I, ideal_principal(o, elt_scale(Int(ell), get_ap(f, ell))));
                if (!I.zero && ideal_norm(I) == 1) break;
            }
            if (I.zero) {
                out.failure = true;
                out.failure_reason =
                    "no nonzero accumulation for character of conductor " + std::to_string(d);
                return out;
            }
            if (ideal_norm(I) != 1)
                for (const auto& t : ideal_prime_support(o, I)) out.S.insert(t);
        }
    }
    // final refinement: drop tags with empty candidate sets
    TagSet refined;
    for (const auto& t : out.S)
        if (!image_for_fixed_prime(f, t, B).candidates.empty()) refined.insert(t);
    out.S = std::move(refined);
    return out;
}

// ---------------------------------------------------------------------------
// table assembly

struct SplittingDesc {
    enum class Kind { TrivialChi, QuadPair, CyclotomicPair, Other };
    Kind kind = Kind::Other;
    long d = 1;         // conductor of eps (TrivialChi: 1)
    long quad_disc = 0; // QuadPair: the fundamental discriminant of eps
    long a = 0, b = 0;  // CyclotomicPair: exponents {a, 1-a} mod (p-1), a <= b

    bool operator==(const SplittingDesc&) const = default;
    bool operator<(const SplittingDesc& o) const {
        return std::tie(kind, d, quad_disc, a, b) <
               std::tie(o.kind, o.d, o.quad_disc, o.a, o.b);
    }
};

struct ReducibleEntry {
    PrimeIdealTag tag;
    std::vector<SplittingDesc> splittings;
};

struct NonmaxEntry {
    PrimeIdealTag tag;
    std::set<SubgroupType> candidates;  // without R
};

struct TableRow {
    std::string label;
    long level = 0;
    long disc = 0;
    std::vector<ReducibleEntry> reducible;
    std::vector<NonmaxEntry> nonmax;
    bool failure = false;
    std::string failure_reason;
};

inline std::vector<SplittingDesc> splitting_descs(const NewformRecord& f,
                                                  const PrimeIdealTag& tag, long B) {
    QuadOrder o = f.order();
    long p = tag.p;
    std::set<SplittingDesc> out;
    if (valuation(f.level, p) >= 2) {
        for (long a : refine_cyclotomic_pairs(f, tag, B)) {
            long b = ((1 - a) % (p - 1) + (p - 1)) % (p - 1);
            SplittingDesc s;
            s.kind = SplittingDesc::Kind::CyclotomicPair;
            s.a = std::min(a, b);
            s.b = std::max(a, b);
            if ((s.a == 0 && s.b == 1) || (p == 2)) {
                s.kind = SplittingDesc::Kind::TrivialChi;
                s.d = 1;
                s.a = s.b = 0;
            }
            out.insert(s);
        }
    } else {
        for (const auto& pr : refine_reducible(f, tag, B)) {
            SplittingDesc s;
            s.d = pr.eps.d;
            if (pr.eps.is_trivial()) {
                s.kind = SplittingDesc::Kind::TrivialChi;
                s.d = 1;
            } else if (pr.eps.is_quadratic()) {
                s.kind = SplittingDesc::Kind::QuadPair;
                for (long Dp : quad_char_discs_of_conductor(pr.eps.d))
                    if (pr.eps.matches_kronecker(Dp)) s.quad_disc = Dp;
                if (s.quad_disc == 0) s.kind = SplittingDesc::Kind::Other;
            }
            out.insert(s);
        }
    }
    return {out.begin(), out.end()};
}

inline TableRow classify_row(const NewformRecord& f, long B) {
    TableRow row;
    row.label = f.label;
    row.level = f.level;
    row.disc = f.order_disc;
    SupersetResult sup = superset_nonmax(f, B);
    if (sup.failure) {
        row.failure = true;
        row.failure_reason = sup.failure_reason;
        return row;
    }
    for (const auto& tag : sup.S) {
        FixedPrimeResult fp = image_for_fixed_prime(f, tag, B);
        std::set<SubgroupType> cand = fp.candidates;
        if (cand.empty()) continue;
        bool listed_reducible = false;
        if (cand.count(SubgroupType::R)) {
            auto sp = splitting_descs(f, tag, B);
            if (sp.empty()) {
                cand.erase(SubgroupType::R);  // refinement certified irreducibility
            } else {
                row.reducible.push_back({tag, sp});
                listed_reducible = true;
            }
        }
        std::set<SubgroupType> other = cand;
        other.erase(SubgroupType::R);
        if (!other.empty() && !listed_reducible) row.nonmax.push_back({tag, other});
    }
    return row;
}

inline std::vector<TableRow> classify_table(const std::vector<NewformRecord>& fixtures, long B) {
    std::vector<TableRow> rows;
    for (const auto& f : fixtures) rows.push_back(classify_row(f, B));
    return rows;
}

}  // namespace bsdkit
