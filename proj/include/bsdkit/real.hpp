// Thin RAII wrapper around MPFR reals plus a rectangular complex type,
// sized in decimal digits (default 60) and rounded to nearest.
#pragma once

#include <mpfr.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "bsdkit/intutil.hpp"

namespace bsdkit {

inline mpfr_prec_t bits_for_digits(long digits) {
    // log2(10) = 3.3219...; add guard bits
    return static_cast<mpfr_prec_t>(digits * 3.3219280948873623 + 16);
}

class Real {
  public:
    explicit Real(long digits = 60) : digits_(digits) {
        mpfr_init2(v_, bits_for_digits(digits));
        mpfr_set_zero(v_, 1);
    }
    Real(const Real& o) : digits_(o.digits_) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept : digits_(o.digits_) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
            digits_ = o.digits_;
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        mpfr_swap(v_, o.v_);
        std::swap(digits_, o.digits_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    long digits() const { return digits_; }
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

    static Real of(long n, long digits = 60) {
        Real r(digits);
        mpfr_set_si(r.v_, n, MPFR_RNDN);
        return r;
    }
    static Real of(const Int& n, long digits = 60) {
        Real r(digits);
        mpfr_set_z(r.v_, n.get_mpz_t(), MPFR_RNDN);
        return r;
    }
    static Real of(const Rat& q, long digits = 60) {
        Real r(digits);
        mpfr_set_q(r.v_, q.get_mpq_t(), MPFR_RNDN);
        return r;
    }
    static Real parse(const std::string& s, long digits = 60) {
        Real r(digits);
        if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0)
            throw std::invalid_argument("Real::parse: bad literal " + s);
        return r;
    }
    static Real pi(long digits = 60) {
        Real r(digits);
        mpfr_const_pi(r.v_, MPFR_RNDN);
        return r;
    }

    friend Real operator+(const Real& a, const Real& b) {
        Real r(std::max(a.digits_, b.digits_));
        mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator-(const Real& a, const Real& b) {
        Real r(std::max(a.digits_, b.digits_));
        mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator*(const Real& a, const Real& b) {
        Real r(std::max(a.digits_, b.digits_));
        mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator/(const Real& a, const Real& b) {
        Real r(std::max(a.digits_, b.digits_));
        mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    Real operator-() const {
        Real r(digits_);
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }

    friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) == 0; }

    bool is_zero() const { return mpfr_zero_p(v_); }
    int sign() const { return mpfr_sgn(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    std::string str(long out_digits = 0) const {
        if (out_digits <= 0) out_digits = digits_;
        char* s = nullptr;
        mpfr_asprintf(&s, "%.*Rg", static_cast<int>(out_digits), v_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }
    // nearest integer
    Int round() const {
        mpz_class z;
        mpfr_t t;
        mpfr_init2(t, mpfr_get_prec(v_));
        mpfr_round(t, v_);
        mpfr_get_z(z.get_mpz_t(), t, MPFR_RNDN);
        mpfr_clear(t);
        return z;
    }

  private:
    mpfr_t v_;
    long digits_;
};

inline Real real_abs(const Real& a) {
    Real r(a.digits());
    mpfr_abs(r.get(), a.get(), MPFR_RNDN);
    return r;
}
inline Real real_sqrt(const Real& a) {
    Real r(a.digits());
    mpfr_sqrt(r.get(), a.get(), MPFR_RNDN);
    return r;
}
inline Real real_exp(const Real& a) {
    Real r(a.digits());
    mpfr_exp(r.get(), a.get(), MPFR_RNDN);
    return r;
}
inline Real real_log(const Real& a) {
    Real r(a.digits());
    mpfr_log(r.get(), a.get(), MPFR_RNDN);
    return r;
}
inline Real real_sin(const Real& a) {
    Real r(a.digits());
    mpfr_sin(r.get(), a.get(), MPFR_RNDN);
    return r;
}
inline Real real_cos(const Real& a) {
    Real r(a.digits());
    mpfr_cos(r.get(), a.get(), MPFR_RNDN);
    return r;
}
inline Real real_atan2(const Real& y, const Real& x) {
    Real r(std::max(y.digits(), x.digits()));
    mpfr_atan2(r.get(), y.get(), x.get(), MPFR_RNDN);
    return r;
}
inline Real real_pow_si(const Real& a, long e) {
    Real r(a.digits());
    mpfr_pow_si(r.get(), a.get(), e, MPFR_RNDN);
    return r;
}

// rectangular complex numbers over Real
struct Complex {
    Real re, im;

    explicit Complex(long digits = 60) : re(digits), im(digits) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
};

inline Complex cplx_add(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
inline Complex cplx_sub(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
inline Complex cplx_mul(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline Complex cplx_scale(const Real& s, const Complex& a) { return {s * a.re, s * a.im}; }
inline Real cplx_abs(const Complex& a) { return real_sqrt(a.re * a.re + a.im * a.im); }
inline Complex cplx_exp(const Complex& a) {
    Real m = real_exp(a.re);
    return {m * real_cos(a.im), m * real_sin(a.im)};
}
// principal branch
inline Complex cplx_log(const Complex& a) {
    return {real_log(cplx_abs(a)), real_atan2(a.im, a.re)};
}
inline Complex cplx_div(const Complex& a, const Complex& b) {
    Real n = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
}

}  // namespace bsdkit
