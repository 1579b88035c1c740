#pragma once

// Thin wrappers over the 113-bit binary128 type used for the high-precision
// constant evaluations. Only real scalars are needed at this precision; all
// complex work stays in double.

#include <quadmath.h>

#include <cstdio>
#include <stdexcept>
#include <string>

namespace latball {

using f128 = __float128;

inline const f128 PI_Q = M_PIq;

inline f128 abs_q(f128 x) { return fabsq(x); }
inline f128 sqrt_q(f128 x) { return sqrtq(x); }
inline f128 log_q(f128 x) { return logq(x); }
inline f128 exp_q(f128 x) { return expq(x); }
inline f128 pow_q(f128 x, f128 y) { return powq(x, y); }
inline f128 lgamma_q(f128 x) { return lgammaq(x); }

// x^k by binary powering, k >= 0
inline f128 ipow_q(f128 x, long k) {
    if (k < 0) throw std::invalid_argument("ipow_q: negative exponent");
    f128 r = 1;
    while (k > 0) {
        if (k & 1) r *= x;
        x *= x;
        k >>= 1;
    }
    return r;
}

inline std::string to_string_q(f128 x, int digits = 33) {
    char buf[128];
    quadmath_snprintf(buf, sizeof(buf), "%.*Qe", digits, x);
    return std::string(buf);
}

}  // namespace latball
