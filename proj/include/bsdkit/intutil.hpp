// Small integer-arithmetic helpers shared across the library.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

namespace bsdkit {

using Int = mpz_class;
using Rat = mpq_class;

inline std::vector<long> primes_upto(long n) {
    std::vector<long> out;
    if (n < 2) return out;
    std::vector<bool> sieve(static_cast<size_t>(n) + 1, true);
    for (long p = 2; p <= n; ++p) {
        if (!sieve[static_cast<size_t>(p)]) continue;
        out.push_back(p);
        for (long q = p * p; q <= n; q += p) sieve[static_cast<size_t>(q)] = false;
    }
    return out;
}

inline std::map<long, int> factorize(long n) {
    if (n == 0) throw std::invalid_argument("factorize(0)");
    if (n < 0) n = -n;
    std::map<long, int> out;
    for (long p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        while (n % p == 0) {
            ++out[p];
            n /= p;
        }
    }
    if (n > 1) ++out[n];
    return out;
}

inline bool is_prime(long n) {
    if (n < 2) return false;
    for (long p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

// Kronecker symbol (a|n), full generality including n <= 0.
inline int kronecker(long a, long n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int sign = 1;
    if (n < 0) {
        n = -n;
        if (a < 0) sign = -sign;
    }
    int v = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++v;
    }
    if (v % 2 == 1) {
        long am = ((a % 8) + 8) % 8;
        if (am % 2 == 0) return 0;
        if (am == 3 || am == 5) sign = -sign;
    }
    a %= n;
    if (a < 0) a += n;
    // now Jacobi symbol (a|n) with n odd positive
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            long nm = n % 8;
            if (nm == 3 || nm == 5) sign = -sign;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) sign = -sign;
        a %= n;
    }
    return n == 1 ? sign : 0;
}

inline long mod_pow(long base, long exp, long mod) {
    long r = 1 % mod;
    base %= mod;
    if (base < 0) base += mod;
    while (exp > 0) {
        if (exp & 1) r = static_cast<long>((static_cast<__int128>(r) * base) % mod);
        base = static_cast<long>((static_cast<__int128>(base) * base) % mod);
        exp >>= 1;
    }
    return r;
}

inline long mod_inv(long a, long p) {
    a %= p;
    if (a < 0) a += p;
    long g = p, x = 0, x1 = 1, a1 = a;
    while (a1 != 0) {
        long q = g / a1;
        long t = g - q * a1;
        g = a1;
        a1 = t;
        t = x - q * x1;
        x = x1;
        x1 = t;
    }
    if (g != 1) throw std::domain_error("mod_inv: not invertible");
    x %= p;
    if (x < 0) x += p;
    return x;
}

inline long mod_reduce(const Int& v, long p) {
    Int r = v % p;
    long out = r.get_si();
    if (out < 0) out += p;
    return out;
}

inline Int int_pow(Int base, unsigned long e) {
    Int out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

inline Int int_gcd(const Int& a, const Int& b) {
    Int out;
    mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return out;
}

// Largest n with n^2 == v, for perfect-square v; returns false otherwise.
inline bool perfect_square_root(const Int& v, Int& root) {
    if (v < 0) return false;
    mpz_sqrt(root.get_mpz_t(), v.get_mpz_t());
    return root * root == v;
}

}  // namespace bsdkit
