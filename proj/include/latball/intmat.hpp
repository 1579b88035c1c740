#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

#include "latball/errors.hpp"

namespace latball {

using i64 = std::int64_t;
using i128 = __int128;

// Integer matrices use 64-bit entries with 128-bit intermediates. At the
// radii this laboratory targets (entries bounded by T <= a few hundred,
// n <= 6) every determinant and Gram product fits comfortably; the Bareiss
// elimination below asserts against the one place growth could bite.
using IntMat = Eigen::Matrix<i64, Eigen::Dynamic, Eigen::Dynamic>;
using IntVec = Eigen::Matrix<i64, Eigen::Dynamic, 1>;

inline i64 frobenius_sq(const IntMat& m) {
    i128 s = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) s += (i128)m(i, j) * m(i, j);
    if (s > INT64_MAX) throw std::overflow_error("frobenius_sq: exceeds 64 bits");
    return (i64)s;
}

// Exact determinant by fraction-free (Bareiss) elimination in 128-bit
// arithmetic. Sufficient for the n x n and minor sizes used here.
inline i128 det_exact(const IntMat& m) {
    const Eigen::Index n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("det_exact: square matrix required");
    if (n == 0) return 1;
    if (n == 1) return m(0, 0);
    if (n == 2) return (i128)m(0, 0) * m(1, 1) - (i128)m(0, 1) * m(1, 0);
    Eigen::Matrix<i128, Eigen::Dynamic, Eigen::Dynamic> a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m(i, j);
    i128 prev = 1;
    int sign = 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            Eigen::Index p = k + 1;
            while (p < n && a(p, k) == 0) ++p;
            if (p == n) return 0;
            a.row(k).swap(a.row(p));
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i)
            for (Eigen::Index j = k + 1; j < n; ++j)
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

inline bool is_unimodular(const IntMat& m) { return det_exact(m) == 1; }

// floor(sqrt(x)) for x >= 0, exact; long double estimate plus correction.
inline i64 isqrt_i128(i128 x) {
    if (x < 0) throw NumericError("isqrt_i128: negative argument");
    if (x == 0) return 0;
    i64 r = (i64)sqrtl((long double)x);
    while ((i128)r * r > x) --r;
    while ((i128)(r + 1) * (r + 1) <= x) ++r;
    return r;
}

inline i64 floor_div_i128(i128 a, i128 b) {
    if (b < 0) { a = -a; b = -b; }
    i128 q = a / b, r = a % b;
    if (r < 0) --q;
    return (i64)q;
}

inline i64 ceil_div_i128(i128 a, i128 b) {
    if (b < 0) { a = -a; b = -b; }
    i128 q = a / b, r = a % b;
    if (r > 0) ++q;
    return (i64)q;
}

}  // namespace latball
