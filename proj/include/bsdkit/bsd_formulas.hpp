// Integer-lattice computations for real points and periods of isogenous
// abelian varieties, denominator-bounded rational reconstruction, the exact
// analytic-Sha formulas (rank 0, over a Heegner field K, rank 1), twisted
// period matrices, and the p-adic multiplier eps_p.
#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bsdkit/intutil.hpp"
#include "bsdkit/newform_store.hpp"
#include "bsdkit/quad_order.hpp"
#include "bsdkit/real.hpp"

namespace bsdkit {

// ---------------------------------------------------------------------------
// dense matrices (row-major)

using IMat = std::vector<std::vector<Int>>;
using QMat = std::vector<std::vector<Rat>>;
using CMat = std::vector<std::vector<Complex>>;

inline Rat rat_of(const Int& num, const Int& den) {
    if (den == 0) throw std::invalid_argument("rat_of: zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline size_t imat_rows(const IMat& a) { return a.size(); }
inline size_t imat_cols(const IMat& a) { return a.empty() ? 0 : a[0].size(); }

inline IMat imat_zero(size_t r, size_t c) {
    return IMat(r, std::vector<Int>(c, Int(0)));
}

inline IMat imat_identity(size_t n) {
    IMat m = imat_zero(n, n);
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline IMat imat_neg(const IMat& a) {
    IMat out = a;
    for (auto& row : out)
        for (auto& v : row) v = -v;
    return out;
}

inline IMat imat_add(const IMat& a, const IMat& b) {
    if (imat_rows(a) != imat_rows(b) || imat_cols(a) != imat_cols(b))
        throw std::invalid_argument("imat_add: shape mismatch");
    IMat out = a;
    for (size_t i = 0; i < imat_rows(a); ++i)
        for (size_t j = 0; j < imat_cols(a); ++j) out[i][j] += b[i][j];
    return out;
}

inline IMat imat_mul(const IMat& a, const IMat& b) {
    if (imat_cols(a) != imat_rows(b)) throw std::invalid_argument("imat_mul: shape mismatch");
    IMat out = imat_zero(imat_rows(a), imat_cols(b));
    for (size_t i = 0; i < imat_rows(a); ++i)
        for (size_t k = 0; k < imat_cols(a); ++k) {
            if (a[i][k] == 0) continue;
            for (size_t j = 0; j < imat_cols(b); ++j) out[i][j] += a[i][k] * b[k][j];
        }
    return out;
}

inline bool imat_eq(const IMat& a, const IMat& b) { return a == b; }

inline bool imat_is_involution(const IMat& a) {
    if (imat_rows(a) != imat_cols(a)) return false;
    return imat_eq(imat_mul(a, a), imat_identity(imat_rows(a)));
}

// exact determinant by fraction-free (Bareiss) elimination
inline Int imat_det(const IMat& a) {
    size_t n = imat_rows(a);
    if (n != imat_cols(a)) throw std::invalid_argument("imat_det: non-square");
    if (n == 0) return 1;
    IMat m = a;
    Int prev = 1;
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            size_t piv = k;
            while (piv < n && m[piv][k] == 0) ++piv;
            if (piv == n) return 0;
            std::swap(m[k], m[piv]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

// ---------------------------------------------------------------------------
// column-style Hermite reduction with transformation
//
// Returns (H, U, rank) with A*U = H, U unimodular, the first `rank` columns
// of H nonzero in echelon position and all later columns identically zero.
// Pivoting is deterministic: the candidate entry of minimal absolute value,
// first such column on ties.

struct HermiteCols {
    IMat h;
    IMat u;
    size_t rank = 0;
};

inline HermiteCols hermite_columns(const IMat& a) {
    size_t r = imat_rows(a), c = imat_cols(a);
    HermiteCols out{a, imat_identity(c), 0};
    IMat& h = out.h;
    IMat& u = out.u;
    auto swap_cols = [&](size_t i, size_t j) {
        if (i == j) return;
        for (size_t t = 0; t < r; ++t) std::swap(h[t][i], h[t][j]);
        for (size_t t = 0; t < c; ++t) std::swap(u[t][i], u[t][j]);
    };
    auto addmul_col = [&](size_t dst, size_t src, const Int& q) {
        for (size_t t = 0; t < r; ++t) h[t][dst] += q * h[t][src];
        for (size_t t = 0; t < c; ++t) u[t][dst] += q * u[t][src];
    };
    auto negate_col = [&](size_t j) {
        for (size_t t = 0; t < r; ++t) h[t][j] = -h[t][j];
        for (size_t t = 0; t < c; ++t) u[t][j] = -u[t][j];
    };
    size_t piv = 0;
    for (size_t row = 0; row < r && piv < c; ++row) {
        for (;;) {
            size_t best = c;
            for (size_t j = piv; j < c; ++j) {
                if (h[row][j] == 0) continue;
                if (best == c || abs(h[row][j]) < abs(h[row][best])) best = j;
            }
            if (best == c) break;  // row clear among free columns
            swap_cols(piv, best);
            bool clean = true;
            for (size_t j = piv + 1; j < c; ++j) {
                if (h[row][j] == 0) continue;
                Int q;
                // round-to-nearest quotient keeps entries small
                Int num = h[row][j], den = h[row][piv];
                Int rmd;
                mpz_fdiv_qr(q.get_mpz_t(), rmd.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
                if (2 * rmd > abs(den)) q += (den > 0 ? 1 : -1);
                addmul_col(j, piv, -q);
                if (h[row][j] != 0) clean = false;
            }
            if (clean) break;
        }
        if (piv < c && h[row][piv] != 0) {
            if (h[row][piv] < 0) negate_col(piv);
            ++piv;
        }
    }
    out.rank = piv;
    return out;
}

// basis of the integer kernel of a (columns of the result, one per kernel
// generator; shape cols(a) x nullity)
inline IMat kernel_lattice(const IMat& a) {
    HermiteCols hc = hermite_columns(a);
    size_t c = imat_cols(a);
    size_t k = c - hc.rank;
    IMat out = imat_zero(c, k);
    for (size_t i = 0; i < c; ++i)
        for (size_t j = 0; j < k; ++j) out[i][j] = hc.u[i][hc.rank + j];
    return out;
}

// ---------------------------------------------------------------------------
// Smith normal form (diagonal only, used for quotient-group orders)

inline std::vector<Int> smith_diagonal(IMat m) {
    size_t r = imat_rows(m), c = imat_cols(m);
    std::vector<Int> out;
    size_t t = 0;
    while (t < r && t < c) {
        // locate minimal-abs nonzero entry in the trailing block
        size_t bi = r, bj = c;
        for (size_t i = t; i < r; ++i)
            for (size_t j = t; j < c; ++j) {
                if (m[i][j] == 0) continue;
                if (bi == r || abs(m[i][j]) < abs(m[bi][bj])) {
                    bi = i;
                    bj = j;
                }
            }
        if (bi == r) break;  // trailing block zero
        std::swap(m[t], m[bi]);
        for (size_t i = t; i < r; ++i) std::swap(m[i][t], m[i][bj]);
        bool dirty = false;
        for (size_t i = t + 1; i < r; ++i) {
            if (m[i][t] == 0) continue;
            Int q = m[i][t] / m[t][t];
            for (size_t j = t; j < c; ++j) m[i][j] -= q * m[t][j];
            if (m[i][t] != 0) dirty = true;
        }
        for (size_t j = t + 1; j < c; ++j) {
            if (m[t][j] == 0) continue;
            Int q = m[t][j] / m[t][t];
            for (size_t i = t; i < r; ++i) m[i][j] -= q * m[i][t];
            if (m[t][j] != 0) dirty = true;
        }
        if (dirty) continue;  // re-pick a pivot for this block
        out.push_back(abs(m[t][t]));
        ++t;
    }
    while (t < r && t < c) {
        out.push_back(0);
        ++t;
    }
    return out;
}

// ---------------------------------------------------------------------------
// rational linear solves

// solve basis * X = rhs with basis of full column rank; throws if the system
// is inconsistent or the basis is rank-deficient
inline QMat solve_in_basis(const IMat& basis, const IMat& rhs) {
    size_t n = imat_rows(basis), r = imat_cols(basis), k = imat_cols(rhs);
    if (imat_rows(rhs) != n) throw std::invalid_argument("solve_in_basis: shape mismatch");
    QMat aug(n, std::vector<Rat>(r + k, Rat(0)));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < r; ++j) aug[i][j] = Rat(basis[i][j]);
        for (size_t j = 0; j < k; ++j) aug[i][r + j] = Rat(rhs[i][j]);
    }
    size_t row = 0;
    std::vector<size_t> pivot_row(r, n);
    for (size_t col = 0; col < r && row < n; ++col) {
        size_t piv = row;
        while (piv < n && aug[piv][col] == 0) ++piv;
        if (piv == n) continue;
        std::swap(aug[row], aug[piv]);
        Rat inv = 1 / aug[row][col];
        for (size_t j = col; j < r + k; ++j) aug[row][j] *= inv;
        for (size_t i = 0; i < n; ++i) {
            if (i == row || aug[i][col] == 0) continue;
            Rat f = aug[i][col];
            for (size_t j = col; j < r + k; ++j) aug[i][j] -= f * aug[row][j];
        }
        pivot_row[col] = row;
        ++row;
    }
    for (size_t col = 0; col < r; ++col)
        if (pivot_row[col] == n) throw std::invalid_argument("solve_in_basis: rank-deficient basis");
    for (size_t i = row; i < n; ++i)
        for (size_t j = 0; j < k; ++j)
            if (aug[i][r + j] != 0)
                throw std::invalid_argument("solve_in_basis: inconsistent system");
    QMat x(r, std::vector<Rat>(k, Rat(0)));
    for (size_t col = 0; col < r; ++col)
        for (size_t j = 0; j < k; ++j) x[col][j] = aug[pivot_row[col]][r + j];
    return x;
}

// inverse of a unimodular integer matrix (det must be +-1)
inline IMat imat_inverse_unimodular(const IMat& a) {
    Int d = imat_det(a);
    if (d != 1 && d != -1) throw std::invalid_argument("imat_inverse_unimodular: det not +-1");
    QMat x = solve_in_basis(a, imat_identity(imat_rows(a)));
    IMat out = imat_zero(imat_rows(a), imat_rows(a));
    for (size_t i = 0; i < imat_rows(a); ++i)
        for (size_t j = 0; j < imat_rows(a); ++j) {
            if (x[i][j].get_den() != 1)
                throw std::logic_error("imat_inverse_unimodular: non-integral inverse");
            out[i][j] = x[i][j].get_num();
        }
    return out;
}

// order of span(basis)/span(gens) where the generator columns lie in the
// span of the basis columns; throws if the quotient is infinite
inline Int finite_quotient_size(const IMat& basis, const IMat& gens) {
    size_t r = imat_cols(basis);
    if (r == 0) return 1;  // trivial ambient group
    QMat coords = solve_in_basis(basis, gens);
    IMat c = imat_zero(r, imat_cols(gens));
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < imat_cols(gens); ++j) {
            if (coords[i][j].get_den() != 1)
                throw std::invalid_argument("finite_quotient_size: generators not in the lattice");
            c[i][j] = coords[i][j].get_num();
        }
    std::vector<Int> diag = smith_diagonal(c);
    Int size = 1;
    for (size_t i = 0; i < r; ++i) {
        if (i >= diag.size() || diag[i] == 0)
            throw std::invalid_argument("finite_quotient_size: infinite quotient");
        size *= diag[i];
    }
    return size;
}

// ---------------------------------------------------------------------------
// real points of an abelian variety from its conjugation action on homology

// number of F_2-fixed points of an integer involution, #(Z^n/2Z^n)^<iota>
inline Int f2_fixed_count(const IMat& iota) {
    size_t n = imat_rows(iota);
    // rank over F_2 of iota - I (== iota + I mod 2)
    std::vector<std::vector<int>> m(n, std::vector<int>(n, 0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            long e = mod_reduce(iota[i][j], 2);
            m[i][j] = static_cast<int>((e + (i == j ? 1 : 0)) % 2);
        }
    size_t rank = 0;
    for (size_t col = 0; col < n && rank < n; ++col) {
        size_t piv = rank;
        while (piv < n && m[piv][col] == 0) ++piv;
        if (piv == n) continue;
        std::swap(m[rank], m[piv]);
        for (size_t i = 0; i < n; ++i) {
            if (i == rank || m[i][col] == 0) continue;
            for (size_t j = col; j < n; ++j) m[i][j] ^= m[rank][j];
        }
        ++rank;
    }
    return int_pow(Int(2), static_cast<unsigned long>(n - rank));
}

// #pi_0(A(R)) = # ker(I + M_tau | Z^n) / (I - M_tau) Z^n
inline Int pi0_size(const IMat& m_tau) {
    if (!imat_is_involution(m_tau)) throw std::invalid_argument("pi0_size: not an involution");
    IMat id = imat_identity(imat_rows(m_tau));
    IMat k = kernel_lattice(imat_add(id, m_tau));
    if (imat_cols(k) == 0) return 1;
    return finite_quotient_size(k, imat_add(id, imat_neg(m_tau)));
}

// order of the iota-fixed subgroup of the finite group Z^n / L Z^n
inline Int fixed_subgroup_size(const IMat& lat, const IMat& iota) {
    size_t n = imat_rows(lat);
    Int det_l = abs(imat_det(lat));
    if (det_l == 0) throw std::invalid_argument("fixed_subgroup_size: singular lattice");
    // P = { x : (iota - I) x in L Z^n }, via the kernel of [iota - I | -L]
    IMat stacked = imat_zero(n, 2 * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            stacked[i][j] = iota[i][j] - (i == j ? 1 : 0);
            stacked[i][n + j] = -lat[i][j];
        }
    IMat ker = kernel_lattice(stacked);
    IMat p = imat_zero(n, imat_cols(ker));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < imat_cols(ker); ++j) p[i][j] = ker[i][j];
    HermiteCols hc = hermite_columns(p);
    if (hc.rank != n) throw std::logic_error("fixed_subgroup_size: preimage lattice degenerate");
    IMat pbasis = imat_zero(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) pbasis[i][j] = hc.h[i][j];
    Int det_p = abs(imat_det(pbasis));
    if (det_l % det_p != 0) throw std::logic_error("fixed_subgroup_size: index not integral");
    return det_l / det_p;
}

// ---------------------------------------------------------------------------
// isogeny data

struct IsogenyMatrices {
    IMat m_pi;        // 2g x 2g action on homology
    IMat m_tau_src;   // conjugation on source homology
    IMat m_tau_dst;   // conjugation on target homology
    QMat alpha_pi;    // g x g action on cotangent spaces
    long g = 0;
};

inline void validate_isogeny(const IsogenyMatrices& m) {
    size_t n = 2 * static_cast<size_t>(m.g);
    if (m.g <= 0) throw std::invalid_argument("IsogenyMatrices: g must be positive");
    if (imat_rows(m.m_pi) != n || imat_cols(m.m_pi) != n)
        throw std::invalid_argument("IsogenyMatrices: M_pi must be 2g x 2g");
    if (!imat_is_involution(m.m_tau_src) || imat_rows(m.m_tau_src) != n)
        throw std::invalid_argument("IsogenyMatrices: M_tau_src not a 2g x 2g involution");
    if (!imat_is_involution(m.m_tau_dst) || imat_rows(m.m_tau_dst) != n)
        throw std::invalid_argument("IsogenyMatrices: M_tau_dst not a 2g x 2g involution");
    if (!m.alpha_pi.empty() &&
        (m.alpha_pi.size() != static_cast<size_t>(m.g) ||
         m.alpha_pi[0].size() != static_cast<size_t>(m.g)))
        throw std::invalid_argument("IsogenyMatrices: alpha_pi must be g x g");
}

struct KerCokerReal {
    Int ker_size;    // # real points of ker(pi)
    Int coker_size;  // # coker(pi_R)
    Int pi0_src;     // # pi_0(A(R))
    Int pi0_dst;     // # pi_0(B(R))
};

// real kernel/cokernel of an isogeny from its homology data; pass
// twist = true to compute for the quadratic twists (conjugation negated)
inline KerCokerReal ker_coker_real(const IsogenyMatrices& m, bool twist = false) {
    validate_isogeny(m);
    if (imat_det(m.m_pi) == 0) throw std::invalid_argument("ker_coker_real: singular M_pi");
    IMat tau_src = twist ? imat_neg(m.m_tau_src) : m.m_tau_src;
    IMat tau_dst = twist ? imat_neg(m.m_tau_dst) : m.m_tau_dst;
    size_t n = imat_rows(m.m_pi);
    IMat id = imat_identity(n);
    KerCokerReal out;
    // ker(pi) ~ Z^2g / M_pi Z^2g in target coordinates; conjugation acts
    // there through M_tau_dst (compatible with M_tau_src via M_pi)
    out.ker_size = fixed_subgroup_size(m.m_pi, tau_dst);
    out.pi0_src = pi0_size(tau_src);
    out.pi0_dst = pi0_size(tau_dst);
    // coker(pi_R) = ker(I + tau | Z^2g) / ((I - tau) Z^2g + ker(I + tau | M_pi Z^2g))
    IMat k = kernel_lattice(imat_add(id, tau_dst));
    if (imat_cols(k) == 0) {
        out.coker_size = 1;
        return out;
    }
    IMat sub_in_image = imat_mul(m.m_pi, kernel_lattice(imat_mul(imat_add(id, tau_dst), m.m_pi)));
    IMat minus = imat_add(id, imat_neg(tau_dst));
    IMat gens = imat_zero(n, imat_cols(minus) + imat_cols(sub_in_image));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < imat_cols(minus); ++j) gens[i][j] = minus[i][j];
        for (size_t j = 0; j < imat_cols(sub_in_image); ++j)
            gens[i][imat_cols(minus) + j] = sub_in_image[i][j];
    }
    out.coker_size = finite_quotient_size(k, gens);
    return out;
}

// Omega_B / Omega_A for the isogeny pi with cotangent index c_pi
inline Rat period_ratio(const IsogenyMatrices& m, const Int& c_pi) {
    KerCokerReal kc = ker_coker_real(m);
    return rat_of(kc.coker_size * c_pi, kc.ker_size);
}

// ---------------------------------------------------------------------------
// periods from a big period matrix

inline Complex cplx_det(CMat m) {
    size_t n = m.size();
    if (n == 0) return {Real::of(1L), Real::of(0L)};
    long digits = m[0][0].re.digits();
    Complex det{Real::of(1L, digits), Real::of(0L, digits)};
    int sign = 1;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t i = col; i < n; ++i)
            if (cplx_abs(m[i][col]) > cplx_abs(m[piv][col])) piv = i;
        if (cplx_abs(m[piv][col]).is_zero()) return {Real::of(0L, digits), Real::of(0L, digits)};
        if (piv != col) {
            std::swap(m[piv], m[col]);
            sign = -sign;
        }
        det = cplx_mul(det, m[col][col]);
        for (size_t i = col + 1; i < n; ++i) {
            Complex f = cplx_div(m[i][col], m[col][col]);
            for (size_t j = col; j < n; ++j) m[i][j] = cplx_sub(m[i][j], cplx_mul(f, m[col][j]));
        }
    }
    if (sign < 0) det = {-det.re, -det.im};
    return det;
}

inline Real rmat_det_abs(std::vector<std::vector<Real>> m) {
    size_t n = m.size();
    if (n == 0) return Real::of(1L);
    long digits = m[0][0].digits();
    Real det = Real::of(1L, digits);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t i = col; i < n; ++i)
            if (real_abs(m[i][col]) > real_abs(m[piv][col])) piv = i;
        if (real_abs(m[piv][col]).is_zero()) return Real::of(0L, digits);
        if (piv != col) std::swap(m[piv], m[col]);
        det = det * m[col][col];
        for (size_t i = col + 1; i < n; ++i) {
            Real f = m[i][col] / m[col][col];
            for (size_t j = col; j < n; ++j) m[i][j] = m[i][j] - f * m[col][j];
        }
    }
    return real_abs(det);
}

// real period: column-reduce (M_tau + I) to (Mtilde | 0) by a unimodular
// matrix and return C * |det(Pi * Mtilde)|
inline Real omega_from_pi(const CMat& pi, const IMat& m_tau, const Rat& c_factor) {
    size_t g = pi.size();
    size_t n = imat_rows(m_tau);
    if (g == 0 || pi[0].size() != n || n != 2 * g)
        throw std::invalid_argument("omega_from_pi: Pi must be g x 2g matching M_tau");
    HermiteCols hc = hermite_columns(imat_add(m_tau, imat_identity(n)));
    if (hc.rank != g) throw std::invalid_argument("omega_from_pi: (M_tau + I) has rank != g");
    long digits = pi[0][0].re.digits();
    CMat prod(g, std::vector<Complex>(g, Complex(digits)));
    for (size_t i = 0; i < g; ++i)
        for (size_t j = 0; j < g; ++j) {
            Complex acc(digits);
            for (size_t k = 0; k < n; ++k)
                acc = cplx_add(acc, cplx_scale(Real::of(hc.h[k][j], digits), pi[i][k]));
            prod[i][j] = acc;
        }
    return Real::of(c_factor, digits) * cplx_abs(cplx_det(prod));
}

// big period matrix of the quadratic twist by K: entrywise division by
// sqrt(D_K) (principal branch)
inline CMat twist_period(const CMat& pi, long d_k) {
    if (d_k == 0) throw std::invalid_argument("twist_period: D_K = 0");
    if (pi.empty()) return pi;
    long digits = pi[0][0].re.digits();
    Real root = real_sqrt(Real::of(std::labs(d_k), digits));
    Complex sqrt_d = d_k > 0 ? Complex{root, Real::of(0L, digits)}
                             : Complex{Real::of(0L, digits), root};
    CMat out = pi;
    for (auto& row : out)
        for (auto& z : row) z = cplx_div(z, sqrt_d);
    return out;
}

// ---------------------------------------------------------------------------
// abelian groups with involution: (G : G_1 + G_2) = #(G/2G)^<iota>

struct InvolutionIndexReport {
    Int lattice_index;  // (Z^r : (I + iota) Z^r + (I - iota) Z^r)
    Int f2_fixed;       // # fixed points of iota on (Z/2)^r
    bool agree = false;
};

inline InvolutionIndexReport involution_index(long g_rank, const IMat& iota) {
    if (g_rank <= 0 || imat_rows(iota) != static_cast<size_t>(g_rank))
        throw std::invalid_argument("involution_index: rank mismatch");
    if (!imat_is_involution(iota)) throw std::invalid_argument("involution_index: not an involution");
    size_t n = static_cast<size_t>(g_rank);
    IMat id = imat_identity(n);
    IMat plus = imat_add(id, iota);
    IMat minus = imat_add(id, imat_neg(iota));
    IMat gens = imat_zero(n, 2 * n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            gens[i][j] = plus[i][j];
            gens[i][n + j] = minus[i][j];
        }
    InvolutionIndexReport out;
    out.lattice_index = finite_quotient_size(id, gens);
    out.f2_fixed = f2_fixed_count(iota);
    out.agree = out.lattice_index == out.f2_fixed;
    return out;
}

// ---------------------------------------------------------------------------
// omega quotient: Omega_A * Omega_{A^K} * sqrt|D_K|^g / Omega_{A/K}

struct OmegaQuotientReport {
    Real lhs;   // period quotient, numeric
    Int rhs1;   // #A(R)[2] / 2^g via F_2-fixed points
    Int rhs2;   // #pi_0(A(R)) via integer normal forms
};

inline OmegaQuotientReport omega_quotient_check(const CMat& pi, const IMat& m_tau, long d_k,
                                                long g) {
    if (d_k >= 0 || d_k % 2 == 0)
        throw std::invalid_argument("omega_quotient_check: D_K must be negative and odd");
    if (pi.size() != static_cast<size_t>(g) || imat_rows(m_tau) != 2 * static_cast<size_t>(g))
        throw std::invalid_argument("omega_quotient_check: shape mismatch");
    long digits = pi[0][0].re.digits();
    size_t n = 2 * static_cast<size_t>(g);
    // Omega_{A/K} = 2^g * covolume of the full period lattice in C^g = R^2g
    std::vector<std::vector<Real>> lat(n, std::vector<Real>(n, Real(digits)));
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < static_cast<size_t>(g); ++i) {
            lat[2 * i][j] = pi[i][j].re;
            lat[2 * i + 1][j] = pi[i][j].im;
        }
    Real covol = rmat_det_abs(lat);
    if (covol.is_zero()) throw std::invalid_argument("omega_quotient_check: degenerate lattice");
    Real omega_ak = Real::of(int_pow(Int(2), static_cast<unsigned long>(g)), digits) * covol;
    Real omega_a = omega_from_pi(pi, m_tau, Rat(1));
    Real omega_twist = omega_from_pi(twist_period(pi, d_k), imat_neg(m_tau), Rat(1));
    Real root_disc = real_pow_si(real_sqrt(Real::of(-d_k, digits)), g);
    OmegaQuotientReport out{omega_a * omega_twist * root_disc / omega_ak, Int(0), Int(0)};
    Int two_g = int_pow(Int(2), static_cast<unsigned long>(g));
    Int fixed = f2_fixed_count(m_tau);
    if (fixed % two_g != 0)
        throw std::logic_error("omega_quotient_check: #A(R)[2] not divisible by 2^g");
    out.rhs1 = fixed / two_g;
    out.rhs2 = pi0_size(m_tau);
    return out;
}

// ---------------------------------------------------------------------------
// rational reconstruction with a known denominator bound

inline Rat rational_reconstruct(const Real& x, const Int& denom_bound, const Real& tol) {
    if (denom_bound <= 0) throw std::invalid_argument("rational_reconstruct: bound must be positive");
    long digits = x.digits();
    Real scaled = x * Real::of(denom_bound, digits);
    Int m = scaled.round();
    Real residual = real_abs(scaled - Real::of(m, digits));
    if (!(residual < tol * Real::of(denom_bound, digits)))
        throw std::runtime_error("rational_reconstruct: residual too large (insufficient precision)");
    return rat_of(m, denom_bound);
}

// ---------------------------------------------------------------------------
// analytic order of Sha

enum class ShaFormula { Rank0, OverK, Rank1 };

inline const char* sha_formula_name(ShaFormula f) {
    switch (f) {
        case ShaFormula::Rank0: return "rank0";
        case ShaFormula::OverK: return "overK";
        case ShaFormula::Rank1: return "rank1";
    }
    return "?";
}

struct ShaAnCertificate {
    Rat value;
    ShaFormula formula = ShaFormula::Rank0;
    // echoed inputs; slots not used by the chosen formula stay at defaults
    Rat l_ratio = 0;
    long torsion = 1;
    Rat tam = 1;
    Int heegner_index = 0;   // I_{K,pi}
    Rat disc_ratio = 1;      // disc Z[f] / disc End(J)
    Rat cf_cpi = 1;
    long u_k = 1;
    Int index_k_q = 0;       // (J(K) : J(Q))
    long real_two_torsion = 0;
    long g = 0;
};

// opaque slot for canonical periods Omega_f^{+-}; not consumed by any
// formula here, kept so invariant bundles can carry the values through
struct OpaquePeriodSlot {
    std::optional<std::string> omega_plus;
    std::optional<std::string> omega_minus;
    bool used = false;
};

inline bool rat_is_square(const Rat& q, Rat& root) {
    if (q < 0) return false;
    Int rn, rd;
    if (!perfect_square_root(q.get_num(), rn)) return false;
    if (!perfect_square_root(q.get_den(), rd)) return false;
    root = rat_of(rn, rd);
    return true;
}

// L-rank 0: (L(J/Q,1)/Omega_J) * torsion^2 / Tam
inline ShaAnCertificate sha_an_rank0(const Rat& l_ratio, long torsion, const Rat& tam) {
    if (l_ratio < 0) throw std::invalid_argument("sha_an_rank0: negative L-ratio");
    if (torsion <= 0 || tam <= 0) throw std::invalid_argument("sha_an_rank0: invalid torsion/Tam");
    ShaAnCertificate cert;
    cert.formula = ShaFormula::Rank0;
    cert.l_ratio = l_ratio;
    cert.torsion = torsion;
    cert.tam = tam;
    cert.value = l_ratio * Rat(Int(torsion) * torsion) / tam;
    cert.value.canonicalize();
    return cert;
}

// over the Heegner field K:
// (1/(c_f c_pi)^2) * (disc Z[f]/disc O) * (I / (Tam * u_K^g))^2
inline ShaAnCertificate sha_an_overK(const Rat& cf_cpi, const Int& disc_f, const Int& disc_o,
                                     const Int& heegner_index, const Int& tam, long u_k, long g) {
    if (cf_cpi <= 0) throw std::invalid_argument("sha_an_overK: c_f c_pi must be positive");
    if (disc_o == 0 || tam <= 0 || u_k <= 0 || g <= 0)
        throw std::invalid_argument("sha_an_overK: invalid inputs");
    Rat ratio = rat_of(disc_f, disc_o);
    Rat ratio_root;
    if (!rat_is_square(ratio, ratio_root))
        throw std::domain_error("sha_an_overK: disc ratio is not a square");
    ShaAnCertificate cert;
    cert.formula = ShaFormula::OverK;
    cert.disc_ratio = ratio;
    cert.cf_cpi = cf_cpi;
    cert.heegner_index = heegner_index;
    cert.tam = Rat(tam);
    cert.u_k = u_k;
    cert.g = g;
    Rat frac = rat_of(heegner_index, tam * int_pow(Int(u_k), static_cast<unsigned long>(g)));
    cert.value = ratio * frac * frac / (cf_cpi * cf_cpi);
    cert.value.canonicalize();
    Rat root;
    if (!rat_is_square(cert.value, root))
        throw std::logic_error("sha_an_overK: value failed the square check");
    return cert;
}

// L-rank 1 over Q:
// (disc ratio) * 4^g / (#J(R)[2] * Tam) * (I / (index * u_K^g))^2 / twist L-ratio
inline ShaAnCertificate sha_an_rank1(const Int& disc_f, const Int& disc_o, long g,
                                     long real_two_torsion, const Int& tam,
                                     const Int& heegner_index, const Int& index_k_q, long u_k,
                                     const Rat& twist_l_ratio) {
    if (twist_l_ratio <= 0)
        throw std::invalid_argument("sha_an_rank1: zero twist L-ratio (wrong Heegner field)");
    if (disc_o == 0 || g <= 0 || real_two_torsion <= 0 || tam <= 0 || index_k_q <= 0 || u_k <= 0)
        throw std::invalid_argument("sha_an_rank1: invalid inputs");
    ShaAnCertificate cert;
    cert.formula = ShaFormula::Rank1;
    cert.disc_ratio = rat_of(disc_f, disc_o);
    cert.g = g;
    cert.real_two_torsion = real_two_torsion;
    cert.tam = Rat(tam);
    cert.heegner_index = heegner_index;
    cert.index_k_q = index_k_q;
    cert.u_k = u_k;
    cert.l_ratio = twist_l_ratio;
    Rat frac = rat_of(heegner_index, index_k_q * int_pow(Int(u_k), static_cast<unsigned long>(g)));
    cert.value = cert.disc_ratio *
                 rat_of(int_pow(Int(4), static_cast<unsigned long>(g)),
                        Int(real_two_torsion) * tam) *
                 frac * frac / twist_l_ratio;
    cert.value.canonicalize();
    return cert;
}

inline Json serialize_rat(const Rat& q) { return Json::array({q.get_num().get_str(), q.get_den().get_str()}); }

inline Json serialize_sha_certificate(const ShaAnCertificate& cert) {
    Json j;
    j["schema"] = kSchemaTag;
    j["formula"] = sha_formula_name(cert.formula);
    j["value"] = serialize_rat(cert.value);
    Json in;
    in["L_ratio"] = serialize_rat(cert.l_ratio);
    in["torsion"] = cert.torsion;
    in["tamagawa"] = serialize_rat(cert.tam);
    in["heegner_index"] = cert.heegner_index.get_str();
    in["disc_ratio"] = serialize_rat(cert.disc_ratio);
    in["cf_cpi"] = serialize_rat(cert.cf_cpi);
    in["u_K"] = cert.u_k;
    in["index_K_Q"] = cert.index_k_q.get_str();
    in["real_two_torsion"] = cert.real_two_torsion;
    in["g"] = cert.g;
    j["inputs"] = in;
    return j;
}

// ---------------------------------------------------------------------------
// Tamagawa numbers of the twist

// prod_{p | D_K} c_p(J^K/Q) given the twist Tamagawa numbers at the primes
// dividing D_K (c_p = #J(F_p)[2] for odd p | D_K)
inline Rat tam_quotient(const CurveRecord& curve, const std::map<long, long>& twist_tam_at_dk) {
    Rat out(1);
    for (auto [p, c] : twist_tam_at_dk) {
        if (curve.tamagawa.count(p))
            throw std::invalid_argument("tam_quotient: prime " + std::to_string(p) +
                                        " divides both D_K and the level");
        if (c <= 0) throw std::invalid_argument("tam_quotient: nonpositive Tamagawa number");
        out *= Rat(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// p-adic multiplier eps_p = Norm(1 - alpha^{-1})^2

struct UnitRootReport {
    OrderElt alpha;      // unit root mod p^precision (y == 0 in the split case)
    Int modulus;         // p^precision
    Int eps;             // representative of eps_p in [0, p^precision)
    long eps_valuation;  // v_p(eps); meaningless when extra_zero is set
    bool extra_zero;     // alpha == 1 (a_p = 1 at a bad prime), eps_p = 0
};

namespace detail {

inline Int mod_p(const Int& v, const Int& m) {
    Int r = v % m;
    if (r < 0) r += m;
    return r;
}

// arithmetic in (Z/p^m)[w], w^2 = disc*w - c, via OrderElt coordinates
inline OrderElt padic_mul(const QuadOrder& o, const OrderElt& a, const OrderElt& b, const Int& m) {
    OrderElt r = elt_mul(o, a, b);
    return {mod_p(r.x, m), mod_p(r.y, m)};
}

inline OrderElt padic_inv(const QuadOrder& o, const OrderElt& a, long p, const Int& m) {
    Int n = mod_p(elt_norm(o, a), m);
    if (int_gcd(n, Int(p)) != 1) throw std::domain_error("padic_inv: not a unit");
    Int ninv;
    if (mpz_invert(ninv.get_mpz_t(), n.get_mpz_t(), m.get_mpz_t()) == 0)
        throw std::logic_error("padic_inv: modular inverse failed");
    OrderElt conj = elt_conj(o, a);
    return {mod_p(conj.x * ninv, m), mod_p(conj.y * ninv, m)};
}

inline long int_valuation(Int v, long p, long cap) {
    if (v == 0) return cap;
    long out = 0;
    while (out < cap && v % p == 0) {
        v /= p;
        ++out;
    }
    return out;
}

}  // namespace detail

// alpha = Hensel-lifted unit root of T^2 - a_p T + p in the completion of
// Z[w] at the prime over p; eps_p = Norm(1 - alpha^{-1})^2 with its exact
// valuation. For split p a root of the minimal polynomial of w mod p must
// be chosen (split_root); p | N means multiplicative reduction, alpha = a_p.
inline UnitRootReport unit_root_multiplier(const QuadOrder& o, const OrderElt& a_p, long p,
                                           bool p_divides_n = false, long precision = 30,
                                           std::optional<long> split_root = std::nullopt) {
    if (p < 2 || !is_prime(p)) throw std::invalid_argument("unit_root_multiplier: bad prime");
    if (precision < 2) throw std::invalid_argument("unit_root_multiplier: precision too small");
    Int modulus = int_pow(Int(p), static_cast<unsigned long>(precision));
    UnitRootReport out{OrderElt(), modulus, Int(0), 0, false};

    if (p_divides_n) {
        // multiplicative reduction: the Euler factor is linear, alpha = a_p
        if (a_p.y != 0 || (a_p.x != 1 && a_p.x != -1))
            throw std::invalid_argument("unit_root_multiplier: bad-prime a_p must be +-1");
        out.alpha = {detail::mod_p(a_p.x, modulus), Int(0)};
        if (a_p.x == 1) {
            out.extra_zero = true;
            out.eps = 0;
            out.eps_valuation = precision;
            return out;
        }
        // alpha = -1: 1 - alpha^{-1} = 2; the norm to Z_p squares it unless
        // the completion at the chosen prime is Q_p itself (split p)
        bool split = !omega_roots_mod_p(o, p).empty() && detail::mod_p(Int(o.disc), Int(p)) != 0;
        Int norm2 = split ? Int(2) : Int(4);
        out.eps = detail::mod_p(norm2 * norm2, modulus);
        out.eps_valuation = detail::int_valuation(out.eps, p, precision);
        return out;
    }

    auto roots = omega_roots_mod_p(o, p);
    if (roots.empty()) {
        // inert: work in the unramified quadratic extension (Z/p^m)[w]
        if (detail::mod_p(elt_norm(o, a_p), Int(p)) == 0)
            throw std::domain_error("unit_root_multiplier: non-ordinary a_p");
        OrderElt alpha{detail::mod_p(a_p.x, modulus), detail::mod_p(a_p.y, modulus)};
        for (int iter = 0; iter < 64; ++iter) {
            // f(alpha) = alpha^2 - a_p*alpha + p
            OrderElt f = elt_add(elt_sub(elt_mul(o, alpha, alpha), elt_mul(o, a_p, alpha)),
                                 OrderElt(Int(p), Int(0)));
            f = {detail::mod_p(f.x, modulus), detail::mod_p(f.y, modulus)};
            if (f.is_zero()) break;
            OrderElt fp = elt_sub(elt_scale(Int(2), alpha), a_p);
            OrderElt step = detail::padic_mul(o, f, detail::padic_inv(o, fp, p, modulus), modulus);
            alpha = {detail::mod_p(alpha.x - step.x, modulus), detail::mod_p(alpha.y - step.y, modulus)};
        }
        out.alpha = alpha;
        OrderElt one{Int(1), Int(0)};
        OrderElt u = elt_sub(one, detail::padic_inv(o, alpha, p, modulus));
        u = {detail::mod_p(u.x, modulus), detail::mod_p(u.y, modulus)};
        Int nrm = detail::mod_p(elt_norm(o, u), modulus);
        out.eps = detail::mod_p(nrm * nrm, modulus);
        out.eps_valuation = detail::int_valuation(out.eps, p, precision);
        return out;
    }

    // split (or ramified): embed via a Hensel-lifted root of the w-polynomial
    if (detail::mod_p(Int(o.disc), Int(p)) == 0)
        throw std::invalid_argument("unit_root_multiplier: p ramified in the order");
    if (!split_root)
        throw std::invalid_argument("unit_root_multiplier: split p needs a chosen root of w mod p");
    if (std::find(roots.begin(), roots.end(), *split_root) == roots.end())
        throw std::invalid_argument("unit_root_multiplier: chosen residue is not a root");
    Int r(*split_root);
    Int c = o.omega_norm_term();
    for (int iter = 0; iter < 64; ++iter) {
        Int g = detail::mod_p(r * r - o.disc * r + c, modulus);
        if (g == 0) break;
        Int gp = detail::mod_p(2 * r - o.disc, modulus);
        Int gpinv;
        mpz_invert(gpinv.get_mpz_t(), gp.get_mpz_t(), modulus.get_mpz_t());
        r = detail::mod_p(r - g * gpinv, modulus);
    }
    Int a = detail::mod_p(a_p.x + a_p.y * r, modulus);
    if (a % p == 0) throw std::domain_error("unit_root_multiplier: non-ordinary a_p");
    Int alpha = detail::mod_p(a, modulus);
    for (int iter = 0; iter < 64; ++iter) {
        Int f = detail::mod_p(alpha * alpha - a * alpha + p, modulus);
        if (f == 0) break;
        Int fp = detail::mod_p(2 * alpha - a, modulus);
        Int fpinv;
        mpz_invert(fpinv.get_mpz_t(), fp.get_mpz_t(), modulus.get_mpz_t());
        alpha = detail::mod_p(alpha - f * fpinv, modulus);
    }
    out.alpha = {alpha, Int(0)};
    Int ainv;
    mpz_invert(ainv.get_mpz_t(), alpha.get_mpz_t(), modulus.get_mpz_t());
    Int u = detail::mod_p(Int(1) - ainv, modulus);
    // residue field is Z/p here, so the norm is the identity
    out.eps = detail::mod_p(u * u, modulus);
    out.eps_valuation = detail::int_valuation(out.eps, p, precision);
    return out;
}

// N(alpha) == d_f * deg(pi)
inline bool norm_alpha_check(const QuadOrder& o, const Int& d_f, const Int& deg_pi,
                             const OrderElt& alpha) {
    return elt_norm(o, alpha) == d_f * deg_pi;
}

}  // namespace bsdkit
