#pragma once

// Special functions backing the transform and the main-term constant:
//   zeta_at_integer  Euler-Maclaurin zeta at integer arguments, binary128
//   clgamma          complex log-gamma, double precision, Stirling + shift
//   crgamma          complex reciprocal gamma with clean zeros at -m
//
// Euler-Maclaurin with pivot N and J correction terms:
//   zeta(s) = sum_{k<=N} k^-s + N^{1-s}/(s-1) - N^-s/2
//           + sum_{j<=J} B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
// The j-th term is ~ 2 ((s+2j)/(2 pi N))^{2j}, so N = 64, J = 15 clears the
// 113-bit target for every s >= 2 by a wide margin.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "latball/errors.hpp"
#include "latball/realq.hpp"

namespace latball {

namespace detail {

// B_2 .. B_30 as exact integer fractions
struct BernoulliFrac {
    long long num, den;
};
inline constexpr BernoulliFrac kBernoulli[] = {
    {1, 6},           {-1, 30},         {1, 42},           {-1, 30},          {5, 66},
    {-691, 2730},     {7, 6},           {-3617, 510},      {43867, 798},      {-174611, 330},
    {854513, 138},    {-236364091, 2730}, {8553103, 6},    {-23749461029, 870}, {8615841276005, 14322},
};

}  // namespace detail

inline f128 zeta_at_integer_q(int s, int precisionBits) {
    if (s < 2) throw ManifestError("zeta_at_integer: argument >= 2 required");
    if (precisionBits < 1) throw ManifestError("zeta_at_integer: precisionBits >= 1 required");
    // pivot scales with the precision target; requests beyond the 113-bit
    // arithmetic saturate at the full-precision tier
    const long N = precisionBits <= 53 ? 24 : 64;
    const int J = precisionBits <= 53 ? 8 : 15;
    f128 sum = 0;
    for (long k = 1; k <= N; ++k) sum += 1.0Q / ipow_q((f128)k, s);
    const f128 Nq = (f128)N;
    sum += ipow_q(1.0Q / Nq, s - 1) / (f128)(s - 1);
    sum -= 0.5Q * ipow_q(1.0Q / Nq, s);
    f128 rising = (f128)s;                      // s(s+1)...(s+2j-2)
    f128 npow = ipow_q(1.0Q / Nq, s + 1);       // N^{-s-2j+1}
    f128 factorial = 2;                         // (2j)!
    for (int j = 1; j <= J; ++j) {
        if (j > 1) {
            rising *= (f128)(s + 2 * j - 3) * (f128)(s + 2 * j - 2);
            npow /= Nq * Nq;
            factorial *= (f128)(2 * j - 1) * (f128)(2 * j);
        }
        const auto& b = detail::kBernoulli[j - 1];
        sum += ((f128)b.num / (f128)b.den) / factorial * rising * npow;
    }
    return sum;
}

inline double zeta_at_integer(int s, int precisionBits = 113) { return (double)zeta_at_integer_q(s, precisionBits); }

// ---- complex log-gamma ------------------------------------------------------

namespace detail {

using cplx = std::complex<double>;

// log(sin(pi z)) stable for any imaginary part; branch harmless downstream
inline cplx log_sin_pi(cplx z) {
    if (z.imag() < 0) return std::conj(log_sin_pi(std::conj(z)));
    // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}), |e^{2 i pi z}| <= 1
    const cplx i(0.0, 1.0);
    const double pi = 3.141592653589793238462643383279502884;
    const cplx w = std::exp(2.0 * i * pi * z);
    return std::log(i * 0.5) - i * pi * z + std::log(1.0 - w);
}

inline cplx clgamma_shifted(cplx z) {
    // requires Re z >= 0.5; shift until Stirling converges fast
    cplx acc = 0.0;
    while (std::abs(z) < 16.0) {
        acc -= std::log(z);
        z += 1.0;
    }
    const double log2pi = 1.837877066409345483560659472811235279;
    const cplx zi = 1.0 / z;
    const cplx zi2 = zi * zi;
    cplx series = 0.0;
    cplx zpow = zi;
    for (int k = 1; k <= 12; ++k) {
        const auto& b = kBernoulli[k - 1];
        series += ((double)b.num / (double)b.den) / (double)(2 * k * (2 * k - 1)) * zpow;
        zpow *= zi2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * log2pi + series + acc;
}

}  // namespace detail

// principal-value-per-factor log Gamma; imaginary part may differ from the
// principal log of Gamma by a multiple of 2 pi (always exponentiated here)
inline std::complex<double> clgamma(std::complex<double> z) {
    const double pi = 3.141592653589793238462643383279502884;
    if (z.real() < 0.5) {
        // reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
        return std::log(pi) - detail::log_sin_pi(z) - detail::clgamma_shifted(1.0 - z);
    }
    return detail::clgamma_shifted(z);
}

// 1/Gamma(z); entire, exact zeros at z = 0, -1, -2, ...
inline std::complex<double> crgamma(std::complex<double> z) {
    const double pi = 3.141592653589793238462643383279502884;
    if (z.real() >= 0.5) return std::exp(-detail::clgamma_shifted(z));
    // reflection: 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi
    if (z.imag() == 0.0 && z.real() == std::floor(z.real())) return 0.0;  // pole of Gamma
    return std::exp(detail::log_sin_pi(z) + detail::clgamma_shifted(1.0 - z) - std::log(pi));
}

inline std::complex<double> cgamma(std::complex<double> z) { return std::exp(clgamma(z)); }

}  // namespace latball
