// Heegner discriminant enumeration, Heegner-form class representatives,
// period sums with certified truncation tails, and the Gross--Zagier height
// evaluators (per embedding and for the full endomorphism-span pairing).
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsdkit/newform_store.hpp"
#include "bsdkit/quad_order.hpp"
#include "bsdkit/real.hpp"

namespace bsdkit {

// ---------------------------------------------------------------------------
// discriminants

namespace detail {

inline bool squarefree(long n) {
    for (long d = 2; d * d <= n; ++d)
        if (n % (d * d) == 0) return false;
    return true;
}

}  // namespace detail

// negative odd fundamental discriminant (odd fundamental <=> squarefree and
// congruent to 1 mod 4)
inline bool is_odd_fundamental_neg(long D) {
    if (D >= 0 || D % 2 == 0) return false;
    long m = ((D % 4) + 4) % 4;
    return m == 1 && detail::squarefree(-D);
}

// the first `count` odd fundamental D < 0 with D != -3, gcd(D, N) = 1 and
// (D | p) = 1 for every prime p | N (candidate Heegner discriminants; the
// nonvanishing of L'(f/K, 1) is checked externally)
inline std::vector<long> heegner_discriminants(long N, int count) {
    if (N < 1) throw std::invalid_argument("heegner_discriminants: N must be positive");
    std::vector<long> support;
    {
        long n = N;
        for (long p = 2; p * p <= n; ++p)
            if (n % p == 0) {
                support.push_back(p);
                while (n % p == 0) n /= p;
            }
        if (n > 1) support.push_back(n);
    }
    std::vector<long> out;
    for (long D = -7; static_cast<int>(out.size()) < count; D -= 4) {
        if (!is_odd_fundamental_neg(D)) continue;
        if (std::gcd(-D, N) != 1) continue;
        bool split = true;
        for (long p : support)
            if (kronecker(D, p) != 1) {
                split = false;
                break;
            }
        if (split) out.push_back(D);
    }
    return out;
}

// ---------------------------------------------------------------------------
// binary quadratic forms

struct HeegnerForm {
    long A = 0, B = 0, C = 0;  // B^2 - 4AC = D, A > 0, N | A

    friend bool operator==(const HeegnerForm& a, const HeegnerForm& b) {
        return a.A == b.A && a.B == b.B && a.C == b.C;
    }
};

// Gauss reduction of a positive definite form (a, b, c); the reduced
// representative (-a < b <= a <= c, with b >= 0 when a == c or b == -a)
// is the unique one in its SL_2(Z) class
inline HeegnerForm reduce_form(long a, long b, long c) {
    long D = b * b - 4 * a * c;
    if (a <= 0 || D >= 0)
        throw std::invalid_argument("reduce_form: form not positive definite");
    while (true) {
        // translate: bring b into (-a, a], adjusting c to keep the
        // discriminant (b -> b - 2ka, c -> c - kb + k^2 a)
        if (b > a || b <= -a) {
            long r = ((b % (2 * a)) + 2 * a) % (2 * a);  // in [0, 2a)
            if (r > a) r -= 2 * a;                       // in (-a, a]
            long k = (b - r) / (2 * a);
            c = c - k * b + k * k * a;
            b = r;
        }
        if (a > c) {
            std::swap(a, c);
            b = -b;
            continue;
        }
        if (a == c && b < 0) {
            b = -b;
            continue;
        }
        break;
    }
    if (b * b - 4 * a * c != D)
        throw std::logic_error("reduce_form: discriminant drifted");
    return {a, b, c};
}

// number of SL_2(Z) classes of primitive positive definite forms of
// discriminant D, by direct enumeration of reduced forms
inline long class_number_brute(long D) {
    if (D >= 0 || (((D % 4) + 4) % 4 != 0 && ((D % 4) + 4) % 4 != 1))
        throw std::invalid_argument("class_number_brute: not a negative discriminant");
    long h = 0;
    for (long b = (D % 2 == 0) ? 0 : 1; 3 * b * b <= -D; b += 2) {
        long m4 = b * b - D;
        if (m4 % 4 != 0) continue;
        long m = m4 / 4;  // = a * c
        for (long a = std::max(b, 1L); a * a <= m; ++a) {
            if (m % a != 0) continue;
            long c = m / a;
            if (std::gcd(std::gcd(a, b), c) != 1) continue;
            // reduced: -a < b <= a <= c; b >= 0 forced here, count the
            // (a, -b, c) class separately unless it is equivalent
            h += (b == 0 || b == a || a == c) ? 1 : 2;
        }
    }
    return h;
}

inline bool is_heegner_discriminant(long D, long N) {
    if (N < 1) throw std::invalid_argument("is_heegner_discriminant: N must be positive");
    if (!is_odd_fundamental_neg(D) || D == -3) return false;
    if (std::gcd(-D, N) != 1) return false;
    long n = N;
    for (long p = 2; p <= n; ++p) {
        if (n % p != 0) continue;
        if (kronecker(D, p) != 1) return false;
        while (n % p == 0) n /= p;
    }
    return true;
}

// one representative per ideal class with N | A and a common residue
// B mod 2N (the least nonnegative square root of D mod 4N); per class the
// representative minimizes A (so tau = (-B + sqrt D)/(2A) has maximal
// imaginary part), ties broken by minimal |B| with positive B preferred
inline std::vector<HeegnerForm> heegner_forms(long D, long N) {
    if (!is_heegner_discriminant(D, N))
        throw std::invalid_argument("heegner_forms: invalid (D, N) pair");
    long h = class_number_brute(D);
    long B0 = -1;
    for (long b = 0; b < 2 * N; ++b)
        if (((b * b - D) % (4 * N) + 4 * N) % (4 * N) == 0) {
            B0 = b;
            break;
        }
    if (B0 < 0)
        throw std::invalid_argument("heegner_forms: D is not a square mod 4N");
    std::map<std::tuple<long, long, long>, HeegnerForm> classes;
    for (long a = 1; static_cast<long>(classes.size()) < h; ++a) {
        if (a > 100000L * (h + 1))
            throw std::runtime_error("heegner_forms: search bound exceeded");
        long A = N * a;
        // candidates B = B0 + 2Nk with -A < B <= A, ordered by |B| then sign
        std::vector<long> bs;
        for (long B = B0; B <= A; B += 2 * N) bs.push_back(B);
        for (long B = B0 - 2 * N; B > -A; B -= 2 * N) bs.push_back(B);
        std::sort(bs.begin(), bs.end(), [](long x, long y) {
            return std::abs(x) != std::abs(y) ? std::abs(x) < std::abs(y) : x > y;
        });
        for (long B : bs) {
            long num = B * B - D;
            if (num % (4 * A) != 0) continue;
            long C = num / (4 * A);
            if (std::gcd(std::gcd(A, B), C) != 1) continue;
            HeegnerForm r = reduce_form(A, B, C);
            auto key = std::make_tuple(r.A, r.B, r.C);
            if (classes.find(key) == classes.end()) classes[key] = {A, B, C};
        }
    }
    std::vector<HeegnerForm> out;
    for (const auto& [key, f] : classes) out.push_back(f);
    std::sort(out.begin(), out.end(), [](const HeegnerForm& x, const HeegnerForm& y) {
        return x.A != y.A ? x.A < y.A : x.B < y.B;
    });
    return out;
}

// root of A tau^2 + B tau + C with positive imaginary part
inline Complex form_root(const HeegnerForm& f, long D, long digits = 60) {
    Real re = Real::of(-f.B, digits) / Real::of(2 * f.A, digits);
    Real im = real_sqrt(Real::of(-D, digits)) / Real::of(2 * f.A, digits);
    return {re, im};
}

// ---------------------------------------------------------------------------
// period sums P(tau) = sum_{n >= 1} a_n / n e^{2 pi i tau n}

// certified bound on |sum_{n > M}| from |a_n| <= sqrt(3) n:
// sum_{n > M} sqrt(3) r^n = sqrt(3) r^{M+1} / (1 - r), r = e^{-2 pi Im tau}
inline Real period_tail_bound(long M, const Real& im_tau, long digits = 60) {
    Real r = real_exp(-(Real::of(2, digits) * Real::pi(digits) * im_tau));
    return real_sqrt(Real::of(3, digits)) * real_pow_si(r, M + 1) /
           (Real::of(1, digits) - r);
}

// least M with certified tail below eps
inline long period_truncation_point(const Real& im_tau, const Real& eps,
                                    long digits = 60) {
    if (im_tau.sign() <= 0)
        throw std::invalid_argument("period sum requires Im tau > 0");
    if (eps.sign() <= 0) throw std::invalid_argument("tolerance must be positive");
    // solve sqrt(3) r^{M+1} / (1-r) < eps for M, then step to be safe
    Real r = real_exp(-(Real::of(2, digits) * Real::pi(digits) * im_tau));
    Real need = eps * (Real::of(1, digits) - r) / real_sqrt(Real::of(3, digits));
    long M = static_cast<long>(real_log(need).to_double() / real_log(r).to_double());
    if (M < 1) M = 1;
    while (period_tail_bound(M, im_tau, digits) >= eps) ++M;
    while (M > 1 && period_tail_bound(M - 1, im_tau, digits) < eps) --M;
    return M;
}

// sum over supplied coefficients a[0] = a_1, ..., a[M-1] = a_M
inline Complex period_sum_coeffs(const std::vector<Complex>& a, const Complex& tau,
                                 long digits = 60) {
    Real two_pi = Real::of(2, digits) * Real::pi(digits);
    // q = e^{2 pi i tau}
    Complex q = cplx_exp({-(two_pi * tau.im), two_pi * tau.re});
    Complex qn({Real::of(1, digits), Real::of(0, digits)});
    Complex acc(digits);
    for (std::size_t i = 0; i < a.size(); ++i) {
        qn = cplx_mul(qn, q);
        acc = cplx_add(acc, cplx_scale(Real::of(1, digits) / Real::of(i + 1, digits),
                                       cplx_mul(a[i], qn)));
    }
    return acc;
}

// period sum for one real embedding of the newform, with certified error
// below eps; throws when the fixture's coefficients cannot reach the
// required truncation point
inline Complex period_sum(const NewformRecord& f, int embedding_sign,
                          const Complex& tau, const Real& eps, long digits = 60) {
    long M = period_truncation_point(tau.im, eps, digits);
    for (long p = 2; p <= M; ++p) {
        if (!is_prime(p)) continue;
        if (f.eigenvalues.find(p) == f.eigenvalues.end())
            throw std::out_of_range("period_sum: insufficient coefficients (need a_n to n = " +
                                    std::to_string(M) + ")");
    }
    QuadOrder o = f.order();
    Real sq = real_sqrt(Real::of(o.disc, digits));
    if (embedding_sign < 0) sq = -sq;
    Real omega = (Real::of(o.disc, digits) + sq) / Real::of(2, digits);
    std::vector<Complex> a;
    a.reserve(M);
    for (long n = 1; n <= M; ++n) {
        OrderElt an = hecke_an(f, n);
        a.push_back({Real::of(an.x, digits) + Real::of(an.y, digits) * omega,
                     Real::of(0, digits)});
    }
    return period_sum_coeffs(a, tau, digits);
}

// ---------------------------------------------------------------------------
// Gross--Zagier heights

struct HeightInputs {
    long D = 0;    // odd fundamental Heegner discriminant, < -3
    long u_K = 1;  // #O_K^x / Z^x (1 for D < -4)
    long N = 0;
    Rat C_product = 1;   // prod_{ell^2 | N} C_ell
    Real alpha[2];       // real embeddings of alpha (isogeny comparison factor)
    Real Lq[2];          // L'(f^sigma/K, 1) / L(Sym^2 f^sigma, 2), per embedding
};

inline HeightInputs height_inputs_from_json(const Json& j, long N, long order_disc,
                                            long digits = 60) {
    HeightInputs h;
    h.D = j.at("D").get<long>();
    h.u_K = j.at("u_K").get<long>();
    h.N = j.contains("N") ? j.at("N").get<long>() : N;
    const auto& cp = j.at("C_prod");
    h.C_product = Rat(Int(cp.at(0).get<long>()), Int(cp.at(1).get<long>()));
    h.C_product.canonicalize();
    const auto& al = j.at("alpha");
    OrderElt alpha(Int(al.at(0).get<long>()), Int(al.at(1).get<long>()));
    for (int s = 0; s < 2; ++s) {
        Real sq = real_sqrt(Real::of(order_disc, digits));
        if (s == 1) sq = -sq;
        Real omega = (Real::of(order_disc, digits) + sq) / Real::of(2, digits);
        h.alpha[s] = Real::of(alpha.x, digits) + Real::of(alpha.y, digits) * omega;
        const auto& lv = j.at("Lq").at(s);
        // accept both JSON numbers and decimal strings (strings preserve
        // more digits than a double round-trip)
        h.Lq[s] = Real::parse(lv.is_string() ? lv.get<std::string>() : lv.dump(), digits);
    }
    if (h.D >= -4 || !is_odd_fundamental_neg(h.D))
        throw std::invalid_argument("height inputs: D must be odd fundamental < -4");
    return h;
}

// u_K^2 sqrt(-D) pi / (2 N prod C_ell)
inline Real gz_prefactor(const HeightInputs& h, long digits = 60) {
    return Real::of(h.u_K * h.u_K, digits) * real_sqrt(Real::of(-h.D, digits)) *
           Real::pi(digits) /
           (Real::of(2 * h.N, digits) * Real::of(h.C_product, digits));
}

// height of the sigma-component of y_K^f (no alpha factor)
inline Real gz_height_sigma(const HeightInputs& h, int sigma, long digits = 60) {
    if (sigma != 0 && sigma != 1) throw std::invalid_argument("sigma must be 0 or 1");
    return gz_prefactor(h, digits) * h.Lq[sigma];
}

// height of y_{K,pi} on J: prefactor * sum_sigma alpha^sigma Lq_sigma
inline Real gz_height_total(const HeightInputs& h, long digits = 60) {
    return gz_prefactor(h, digits) * (h.alpha[0] * h.Lq[0] + h.alpha[1] * h.Lq[1]);
}

// I_{K,pi} = #J(K)_tors * sqrt(Reg_{O y} / Reg_{J(K)}), rounded; the
// residual must stay within tol or the inputs are rejected
inline long heegner_index_from_regulators(long torsion_K, const Real& reg_sub,
                                          const Real& reg_full, const Real& tol) {
    if (torsion_K < 1)
        throw std::invalid_argument("heegner index: torsion must be positive");
    if (reg_sub.sign() <= 0 || reg_full.sign() <= 0)
        throw std::invalid_argument("heegner index: regulators must be positive");
    Real v = Real::of(torsion_K) * real_sqrt(reg_sub / reg_full);
    Int n = v.round();
    if (real_abs(v - Real::of(n)) >= tol)
        throw std::runtime_error("heegner index: residual exceeds tolerance");
    return n.get_si();
}

// Gram matrix of the height pairing on O y_{K,pi} for the basis (b1, b2):
// M[i][j] = sum_sigma alpha^sigma b_i^sigma b_j^sigma h_sigma
struct HeightGram {
    Real m[2][2];
    bool positive_definite = false;

    Real det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

inline HeightGram height_gram(const Real alpha[2], const Real basis[2][2],
                              const Real heights[2]) {
    HeightGram g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Real acc = Real::of(0);
            for (int s = 0; s < 2; ++s)
                acc = acc + alpha[s] * basis[i][s] * basis[j][s] * heights[s];
            g.m[i][j] = acc;
        }
    g.positive_definite = g.m[0][0].sign() > 0 && g.det().sign() > 0;
    return g;
}

}  // namespace bsdkit
