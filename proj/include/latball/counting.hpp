#pragma once

// Exact enumeration of gamma in SL_n(Z) with ||z^-1 gamma w||_F <= T.
//
// Identity base points: enumerate candidate rows r_1..r_{n-1} by pruned
// recursion on the exact remaining norm budget. For each prefix, the final
// row must satisfy r_n . v = 1 where v is the cofactor vector of the prefix
// (Laplace expansion of det along the last row). Solutions exist iff
// gcd(v) = 1; they form the affine lattice p + L with L = {x : x.v = 0} of
// rank n-1. A unimodular row reduction U v = (1,0,..,0)^T delivers both a
// particular solution p (first row of U) and a basis of L (remaining rows).
// Points of p + L inside the residual ball are counted exactly:
//   rank 1 and 2: closed forms on the integer quadratic, isqrt based
//   rank >= 3:    floating Cholesky proposes coefficient boxes (padded by
//                 one unit each side), an exact 128-bit form test decides
//
// General base points are handled as a positive definite quadratic form on
// the n^2 entry vector (Kronecker combination of (zz^T)^{-1} and ww^T) with
// a certification margin: candidates within tol*T^2 of the boundary are
// counted and reported separately, and det = 1 is checked in exact integer
// arithmetic.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "latball/errors.hpp"
#include "latball/intmat.hpp"
#include "latball/rational.hpp"

namespace latball {

enum class CountMethod { ROW_RECURSIVE, GENERIC_FORM, NAIVE };

inline std::string method_name(CountMethod m) {
    switch (m) {
        case CountMethod::ROW_RECURSIVE: return "row_recursive";
        case CountMethod::GENERIC_FORM: return "generic_form";
        case CountMethod::NAIVE: return "naive";
    }
    return "?";
}

struct BallSpec {
    int n = 2;
    Rational radiusSq;                      // exact T^2
    bool identityBase = true;
    Eigen::MatrixXd z, w;                   // used when identityBase == false
    double tol = 1e-9;                      // certification margin, general base
    double basePrecision = 1e-9;            // declared det-1 tolerance of z, w

    static BallSpec identity(int n, Rational t2, double tol = 1e-9) {
        BallSpec s;
        s.n = n;
        s.radiusSq = t2;
        s.tol = tol;
        return s;
    }
};

struct CountRecord {
    BallSpec spec;
    std::uint64_t count = 0;
    CountMethod method = CountMethod::ROW_RECURSIVE;
    std::uint64_t borderlineFlagged = 0;
    double wallTimeSeconds = 0.0;
};

inline double twisted_norm_sq(const IntMat& m, const Eigen::MatrixXd& z, const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd zzT = z * z.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(zzT);
    if (llt.info() != Eigen::Success)
        throw NumericError("twisted_norm_sq: z z^T lost positive definiteness");
    const Eigen::MatrixXd mw = m.cast<double>() * w;
    return (mw.array() * llt.solve(mw).array()).sum();
}

namespace detail {

// ---- final-row affine lattice --------------------------------------------

struct AffineLattice {
    IntMat basis;  // (n-1) x n, rows span {x : x.v = 0}
    IntVec p;      // particular solution, p.v = 1
};

// v_j = (-1)^(n+j) * minor_j of the (n-1) x n prefix, so det = r_n . v.
inline bool cofactor_vector(const IntMat& prefix, IntVec& v) {
    const Eigen::Index n = prefix.cols();
    IntMat minor(n - 1, n - 1);
    bool nonzero = false;
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index c = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k == j) continue;
            minor.col(c++) = prefix.col(k);
        }
        i128 d = det_exact(minor);
        if (((n + 1 + j) & 1) != 0) d = -d;  // (-1)^{(n) + (j+1)} with 1-based indices
        if (d > INT64_MAX || d < INT64_MIN) throw std::overflow_error("cofactor_vector: minor exceeds 64 bits");
        v[j] = (i64)d;
        nonzero |= (v[j] != 0);
    }
    return nonzero;
}

inline i64 ext_gcd(i64 a, i64 b, i64& x, i64& y) {
    if (b == 0) {
        x = (a < 0) ? -1 : 1;
        y = 0;
        return a < 0 ? -a : a;
    }
    i64 x1, y1;
    const i64 g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

// Unimodular U with U v = gcd(v) e_1. Row 1 solves, rows 2..n span the kernel.
inline std::optional<AffineLattice> solve_unit_dot(const IntVec& v) {
    const Eigen::Index n = v.size();
    IntMat u = IntMat::Identity(n, n);
    IntVec t = v;
    for (Eigen::Index i = 1; i < n; ++i) {
        if (t[i] == 0) continue;
        i64 x, y;
        const i64 g = ext_gcd(t[0], t[i], x, y);
        const i64 a = t[0] / g, b = t[i] / g;
        for (Eigen::Index j = 0; j < n; ++j) {
            const i128 r0 = (i128)x * u(0, j) + (i128)y * u(i, j);
            const i128 ri = (i128)(-b) * u(0, j) + (i128)a * u(i, j);
            if (r0 > INT64_MAX || r0 < INT64_MIN || ri > INT64_MAX || ri < INT64_MIN)
                throw std::overflow_error("solve_unit_dot: row combination exceeds 64 bits");
            u(0, j) = (i64)r0;
            u(i, j) = (i64)ri;
        }
        t[0] = g;
        t[i] = 0;
    }
    if (t[0] < 0) {  // all other components were zero, so the loop never ran
        u.row(0) = -u.row(0);
        t[0] = -t[0];
    }
    if (t[0] != 1) return std::nullopt;  // gcd(v) > 1, no completion
    AffineLattice lat;
    lat.p = u.row(0).transpose();
    lat.basis = u.bottomRows(n - 1);
    return lat;
}

// inner product in 128 bits; accepts row and column expressions alike
template <typename D1, typename D2>
inline i128 dot_i128(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) {
    i128 s = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += (i128)a(i) * (i128)b(i);
    return s;
}

inline i64 round_div_i128(i128 num, i128 den) {
    // nearest integer to num/den, den > 0
    const i128 half = den / 2;
    if (num >= 0) return (i64)((num + half) / den);
    return (i64)(-(((-num) + half) / den));
}

// Greedy pairwise size reduction followed by a nearest-plane shift of p.
// Keeps entries small so the closed-form counters stay far from overflow.
inline void reduce_lattice(AffineLattice& lat) {
    const Eigen::Index r = lat.basis.rows();
    using RowVec = Eigen::Matrix<i64, 1, Eigen::Dynamic>;
    bool changed = true;
    int guard = 0;
    while (changed && ++guard < 64) {
        changed = false;
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < r; ++j) {
                if (i == j) continue;
                const i128 bb = dot_i128(lat.basis.row(j), lat.basis.row(j));
                if (bb == 0) continue;
                const i64 q = round_div_i128(dot_i128(lat.basis.row(i), lat.basis.row(j)), bb);
                if (q == 0) continue;
                const RowVec cand = lat.basis.row(i) - q * lat.basis.row(j);
                if (dot_i128(cand, cand) < dot_i128(lat.basis.row(i), lat.basis.row(i))) {
                    lat.basis.row(i) = cand;
                    changed = true;
                }
            }
    }
    // order rows by norm so the Cholesky in the generic counter is tame
    std::vector<Eigen::Index> idx(r);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return dot_i128(lat.basis.row(a), lat.basis.row(a)) < dot_i128(lat.basis.row(b), lat.basis.row(b));
    });
    IntMat sorted(r, lat.basis.cols());
    for (Eigen::Index i = 0; i < r; ++i) sorted.row(i) = lat.basis.row(idx[i]);
    lat.basis = sorted;
    for (int sweep = 0; sweep < 4; ++sweep) {
        bool moved = false;
        for (Eigen::Index j = 0; j < r; ++j) {
            const i128 bb = dot_i128(lat.basis.row(j), lat.basis.row(j));
            if (bb == 0) continue;
            const i64 q = round_div_i128(dot_i128(lat.p, lat.basis.row(j)), bb);
            if (q != 0) {
                lat.p -= q * lat.basis.row(j).transpose();
                moved = true;
            }
        }
        if (!moved) break;
    }
}

// #{c : a c^2 + 2 b c + d <= 0}, a > 0, exact.
inline std::uint64_t count_quadratic_range(i128 a, i128 b, i128 d, i64* lo_out = nullptr, i64* hi_out = nullptr) {
    const i128 disc = b * b - a * d;
    if (disc < 0) return 0;
    const i64 s = isqrt_i128(disc);
    const i64 lo = ceil_div_i128(-b - s, a);
    const i64 hi = floor_div_i128(-b + s, a);
    if (lo_out) *lo_out = lo;
    if (hi_out) *hi_out = hi;
    return hi >= lo ? (std::uint64_t)(hi - lo + 1) : 0;
}

inline std::uint64_t count_affine_rank1(const AffineLattice& lat, i64 budget) {
    const i128 a = dot_i128(lat.basis.row(0), lat.basis.row(0));
    if (a == 0) return 0;  // degenerate prefix, pruned by caller in practice
    const i128 b = dot_i128(lat.p, lat.basis.row(0));
    const i128 d = dot_i128(lat.p, lat.p) - budget;
    return count_quadratic_range(a, b, d);
}

inline std::uint64_t count_affine_rank2(const AffineLattice& lat, i64 budget) {
    const auto b1 = lat.basis.row(0), b2 = lat.basis.row(1);
    const i128 g11 = dot_i128(b1, b1), g12 = dot_i128(b1, b2), g22 = dot_i128(b2, b2);
    const i128 w1 = dot_i128(lat.p, b1), w2 = dot_i128(lat.p, b2);
    const i128 e = dot_i128(lat.p, lat.p) - budget;
    const i128 det = g11 * g22 - g12 * g12;
    if (det <= 0) return 0;
    // Schur complement in c2 gives the exact c1 window
    i64 lo1, hi1;
    if (count_quadratic_range(det, w1 * g22 - g12 * w2, e * g22 - w2 * w2, &lo1, &hi1) == 0) return 0;
    std::uint64_t total = 0;
    for (i64 c1 = lo1; c1 <= hi1; ++c1)
        total += count_quadratic_range(g22, g12 * c1 + w2, g11 * c1 * c1 + 2 * w1 * c1 + e);
    return total;
}

// rank >= 3: float Cholesky proposes per-level windows (padded), the exact
// form decides at the leaves.
struct GenericCounter {
    Eigen::MatrixXd L;       // lower Cholesky of the Gram matrix
    Eigen::VectorXd center;  // real solution of G c = -w
    std::vector<i128> gram;  // packed Gram, row-major
    std::vector<i128> w;
    i128 e = 0;
    int r = 0;

    bool init(const AffineLattice& lat, i64 budget) {
        r = (int)lat.basis.rows();
        Eigen::MatrixXd G(r, r);
        gram.assign((std::size_t)r * r, 0);
        w.assign(r, 0);
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) {
                const i128 g = dot_i128(lat.basis.row(i), lat.basis.row(j));
                gram[(std::size_t)i * r + j] = g;
                G(i, j) = (double)g;
            }
            w[(std::size_t)i] = dot_i128(lat.p, lat.basis.row(i));
        }
        e = dot_i128(lat.p, lat.p) - budget;
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success) return false;
        L = llt.matrixL();
        Eigen::VectorXd wd(r);
        for (int i = 0; i < r; ++i) wd[i] = -(double)w[(std::size_t)i];
        center = llt.solve(wd);
        return true;
    }

    bool exact_inside(const std::vector<i64>& c) const {
        i128 q = e;
        for (int i = 0; i < r; ++i) {
            q += 2 * w[(std::size_t)i] * c[(std::size_t)i];
            for (int j = 0; j < r; ++j) q += gram[(std::size_t)i * r + j] * c[(std::size_t)i] * c[(std::size_t)j];
        }
        return q <= 0;
    }

    // radius^2 residual at level k given fixed c_k..c_{r-1} follows the
    // standard ellipsoid recursion on ||L^T (c - center)||^2.
    double residual_budget() const {
        double q = (double)e;
        for (int i = 0; i < r; ++i) {
            q += 2.0 * (double)w[(std::size_t)i] * center[i];
            for (int j = 0; j < r; ++j) q += (double)gram[(std::size_t)i * r + j] * center[i] * center[j];
        }
        // -Q(center); padded by an absolute slack so rounding never drops a
        // boundary point (the exact leaf test rejects any stowaway)
        return std::max(-q, 0.0) + 0.5;
    }

    std::uint64_t count() { return walk(r - 1, std::vector<i64>((std::size_t)r, 0), 0.0, residual_budget()); }

  private:
    std::uint64_t walk(int k, std::vector<i64> c, double used, double rad2) {
        // level k chooses c_k; the L^T row gives offset = sum_{j>k} LT(k,j) (c_j - center_j)
        double offset = 0.0;
        for (int j = k + 1; j < r; ++j) offset += L(j, k) * ((double)c[(std::size_t)j] - center[j]);
        const double pivot = L(k, k);
        const double room = rad2 - used;
        if (room < -1e-9) return 0;
        const double half = std::sqrt(std::max(room, 0.0)) / pivot;
        const double mid = center[k] - offset / pivot;
        const i64 lo = (i64)std::floor(mid - half) - 1;  // one-unit pad both sides
        const i64 hi = (i64)std::ceil(mid + half) + 1;
        std::uint64_t total = 0;
        for (i64 v = lo; v <= hi; ++v) {
            c[(std::size_t)k] = v;
            if (k == 0) {
                total += exact_inside(c) ? 1 : 0;
            } else {
                const double d = pivot * ((double)v - mid);
                total += walk(k - 1, c, used + d * d, rad2);
            }
        }
        return total;
    }
};

inline std::uint64_t count_affine(const AffineLattice& lat, i64 budget) {
    if (budget < 0) return 0;
    switch (lat.basis.rows()) {
        case 1: return count_affine_rank1(lat, budget);
        case 2: return count_affine_rank2(lat, budget);
        default: {
            GenericCounter gc;
            if (!gc.init(lat, budget)) return 0;  // degenerate basis: dependent prefix
            return gc.count();
        }
    }
}

// Enumerate (not just count) the final rows; used by enumerate_ball.
inline void each_affine_point(const AffineLattice& lat, i64 budget, const std::function<void(const IntVec&)>& emit) {
    const int r = (int)lat.basis.rows();
    if (budget < 0) return;
    if (r == 1) {
        const IntVec b1 = lat.basis.row(0).transpose();
        i64 lo, hi;
        if (count_quadratic_range(dot_i128(b1, b1), dot_i128(lat.p, b1), dot_i128(lat.p, lat.p) - budget, &lo,
                                  &hi) == 0)
            return;
        for (i64 v = lo; v <= hi; ++v) emit(lat.p + v * b1);
        return;
    }
    if (r == 2) {
        const IntVec b1 = lat.basis.row(0).transpose(), b2 = lat.basis.row(1).transpose();
        const i128 g11 = dot_i128(b1, b1), g12 = dot_i128(b1, b2), g22 = dot_i128(b2, b2);
        const i128 w1 = dot_i128(lat.p, b1), w2 = dot_i128(lat.p, b2);
        const i128 e = dot_i128(lat.p, lat.p) - budget;
        const i128 det = g11 * g22 - g12 * g12;
        if (det <= 0) return;
        i64 lo1, hi1;
        if (count_quadratic_range(det, w1 * g22 - g12 * w2, e * g22 - w2 * w2, &lo1, &hi1) == 0) return;
        for (i64 c1 = lo1; c1 <= hi1; ++c1) {
            i64 lo2, hi2;
            if (count_quadratic_range(g22, g12 * c1 + w2, g11 * c1 * c1 + 2 * w1 * c1 + e, &lo2, &hi2) == 0) continue;
            for (i64 c2 = lo2; c2 <= hi2; ++c2) emit(lat.p + c1 * b1 + c2 * b2);
        }
        return;
    }
    GenericCounter gc;
    if (!gc.init(lat, budget)) return;
    // same padded walk as GenericCounter::count, emitting instead of counting
    std::function<void(int, std::vector<i64>, double, double)> walk = [&](int k, std::vector<i64> cc, double used,
                                                                          double rad2) {
        double offset = 0.0;
        for (int j = k + 1; j < r; ++j) offset += gc.L(j, k) * ((double)cc[(std::size_t)j] - gc.center[j]);
        const double pivot = gc.L(k, k);
        const double room = rad2 - used;
        if (room < -1e-9) return;
        const double half = std::sqrt(std::max(room, 0.0)) / pivot;
        const double mid = gc.center[k] - offset / pivot;
        for (i64 v = (i64)std::floor(mid - half) - 1; v <= (i64)std::ceil(mid + half) + 1; ++v) {
            cc[(std::size_t)k] = v;
            if (k == 0) {
                if (gc.exact_inside(cc)) {
                    IntVec pt = lat.p;
                    for (int j = 0; j < r; ++j) pt += cc[(std::size_t)j] * lat.basis.row(j).transpose();
                    emit(pt);
                }
            } else {
                const double d = pivot * ((double)v - mid);
                walk(k - 1, cc, used + d * d, rad2);
            }
        }
    };
    walk(r - 1, std::vector<i64>((std::size_t)r, 0), 0.0, gc.residual_budget());
}

// ---- first-row candidates and the row recursion ---------------------------

// all rows with ||r||^2 <= budget in lexicographic order
inline std::vector<IntVec> rows_in_ball(int n, i64 budget) {
    std::vector<IntVec> out;
    if (budget < 0) return out;
    IntVec r(n);
    std::function<void(int, i64)> rec = [&](int pos, i64 rem) {
        if (pos == n) {
            out.push_back(r);
            return;
        }
        const i64 m = isqrt_i128(rem);
        for (i64 v = -m; v <= m; ++v) {
            r[pos] = v;
            rec(pos + 1, rem - v * v);
        }
    };
    rec(0, budget);
    return out;
}

// count completions of a fixed first row by recursing over rows 2..n-1 and
// closing with the affine lattice count
inline std::uint64_t count_completions(int n, const IntVec& firstRow, i64 budgetAfterFirst) {
    IntMat prefix(n - 1, n);
    prefix.row(0) = firstRow.transpose();
    std::uint64_t total = 0;
    IntVec v(n);
    std::function<void(int, i64)> rec = [&](int rowIdx, i64 rem) {
        if (rowIdx == n - 1) {
            if (!cofactor_vector(prefix, v)) return;  // dependent prefix
            auto lat = solve_unit_dot(v);
            if (!lat) return;  // gcd(v) > 1
            reduce_lattice(*lat);
            total += count_affine(*lat, rem);
            return;
        }
        IntVec row(n);
        std::function<void(int, i64)> coord = [&](int pos, i64 left) {
            if (pos == n) {
                prefix.row(rowIdx) = row.transpose();
                rec(rowIdx + 1, left);
                return;
            }
            const i64 m = isqrt_i128(left);
            for (i64 val = -m; val <= m; ++val) {
                row[pos] = val;
                coord(pos + 1, left - val * val);
            }
        };
        coord(0, rem);
    };
    rec(1, budgetAfterFirst);
    return total;
}

}  // namespace detail

// ---- public operations -----------------------------------------------------

struct SubTask {
    BallSpec spec;
    std::size_t firstRowBegin = 0;  // index range into the lexicographic first-row list
    std::size_t firstRowEnd = 0;
};

inline std::vector<SubTask> partition_workload(const BallSpec& spec, int k);

inline std::uint64_t count_subtask(const SubTask& task) {
    const BallSpec& spec = task.spec;
    const i64 budget = spec.radiusSq.floor();
    const auto rows = detail::rows_in_ball(spec.n, budget);
    std::uint64_t total = 0;
    for (std::size_t i = task.firstRowBegin; i < task.firstRowEnd && i < rows.size(); ++i) {
        const i64 rr = (i64)detail::dot_i128(rows[i], rows[i]);
        total += detail::count_completions(spec.n, rows[i], budget - rr);
    }
    return total;
}

inline CountRecord count_identity_ball(const BallSpec& spec, int workers = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    CountRecord rec;
    rec.spec = spec;
    rec.method = CountMethod::ROW_RECURSIVE;
    if (spec.n < 2) throw ManifestError("count_identity_ball: n >= 2 required");
    if (spec.radiusSq.num >= 0) {
        auto tasks = partition_workload(spec, std::max(1, workers));
        if (tasks.size() <= 1) {
            for (const auto& t : tasks) rec.count += count_subtask(t);
        } else {
            std::vector<std::uint64_t> partial(tasks.size(), 0);
            std::vector<std::thread> pool;
            pool.reserve(tasks.size());
            for (std::size_t i = 0; i < tasks.size(); ++i)
                pool.emplace_back([&, i] { partial[i] = count_subtask(tasks[i]); });
            for (auto& th : pool) th.join();
            for (auto p : partial) rec.count += p;  // fixed merge order
        }
    }
    rec.wallTimeSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

inline std::vector<SubTask> partition_workload(const BallSpec& spec, int k) {
    if (k < 1) throw ManifestError("partition_workload: k >= 1 required");
    const i64 budget = spec.radiusSq.floor();
    const auto rows = detail::rows_in_ball(spec.n, budget);
    std::vector<SubTask> tasks;
    if (rows.empty()) {
        tasks.push_back({spec, 0, 0});
        return tasks;
    }
    // weight each first row by the remaining-volume power law so ranges balance
    const double expo = 0.5 * (spec.n - 1) * (spec.n - 1);
    std::vector<double> weight(rows.size());
    double totalW = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double rem = (double)(budget - (i64)detail::dot_i128(rows[i], rows[i])) + 1.0;
        weight[i] = std::pow(rem, expo);
        totalW += weight[i];
    }
    const double per = totalW / k;
    std::size_t begin = 0;
    double acc = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        acc += weight[i];
        if (acc >= per && (int)tasks.size() < k - 1) {
            tasks.push_back({spec, begin, i + 1});
            begin = i + 1;
            acc = 0;
        }
    }
    tasks.push_back({spec, begin, rows.size()});
    return tasks;
}

inline std::vector<IntMat> enumerate_ball(const BallSpec& spec) {
    if (!spec.identityBase) throw ManifestError("enumerate_ball: identity base only");
    const i64 budget = spec.radiusSq.floor();
    std::vector<IntMat> out;
    const auto rows = detail::rows_in_ball(spec.n, budget);
    const int n = spec.n;
    for (const auto& r1 : rows) {
        const i64 rr = (i64)detail::dot_i128(r1, r1);
        IntMat prefix(n - 1, n);
        prefix.row(0) = r1.transpose();
        IntVec v(n);
        std::function<void(int, i64)> rec = [&](int rowIdx, i64 rem) {
            if (rowIdx == n - 1) {
                if (!detail::cofactor_vector(prefix, v)) return;
                auto lat = detail::solve_unit_dot(v);
                if (!lat) return;
                detail::reduce_lattice(*lat);
                std::vector<IntVec> finals;
                detail::each_affine_point(*lat, rem, [&](const IntVec& fr) { finals.push_back(fr); });
                std::sort(finals.begin(), finals.end(), [](const IntVec& a, const IntVec& b) {
                    for (Eigen::Index i = 0; i < a.size(); ++i)
                        if (a[i] != b[i]) return a[i] < b[i];
                    return false;
                });
                for (const auto& fr : finals) {
                    IntMat m(n, n);
                    m.topRows(n - 1) = prefix;
                    m.row(n - 1) = fr.transpose();
                    out.push_back(m);
                }
                return;
            }
            IntVec row(n);
            std::function<void(int, i64)> coord = [&](int pos, i64 left) {
                if (pos == n) {
                    prefix.row(rowIdx) = row.transpose();
                    rec(rowIdx + 1, left);
                    return;
                }
                const i64 m = isqrt_i128(left);
                for (i64 val = -m; val <= m; ++val) {
                    row[pos] = val;
                    coord(pos + 1, left - val * val);
                }
            };
            coord(0, rem);
        };
        rec(1, budget - rr);
    }
    return out;
}

inline CountRecord count_general_ball(const BallSpec& spec) {
    const auto t0 = std::chrono::steady_clock::now();
    if (spec.tol <= 0) throw ManifestError("count_general_ball: tol > 0 required");
    const int n = spec.n;
    const int dim = n * n;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    if (spec.identityBase) {
        A = Eigen::MatrixXd::Identity(n, n);
        B = A;
    } else {
        const Eigen::MatrixXd zzT = spec.z * spec.z.transpose();
        Eigen::LLT<Eigen::MatrixXd> llt(zzT);
        if (llt.info() != Eigen::Success) throw NumericError("count_general_ball: z z^T not positive definite");
        A = llt.solve(Eigen::MatrixXd::Identity(n, n));
        B = spec.w * spec.w.transpose();
    }
    // Q(vec M) with column-major vec: tr(w^T M^T A M w) = vec^T (B kron A) vec
    Eigen::MatrixXd Q(dim, dim);
    for (int jb = 0; jb < n; ++jb)
        for (int ib = 0; ib < n; ++ib) Q.block(ib * n, jb * n, n, n) = B(ib, jb) * A;
    Eigen::LLT<Eigen::MatrixXd> llt(Q);
    if (llt.info() != Eigen::Success) throw NumericError("count_general_ball: assembled form not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const double t2 = spec.radiusSq.to_double();
    const double margin = spec.tol * std::max(t2, 1.0);

    CountRecord rec;
    rec.spec = spec;
    rec.method = CountMethod::GENERIC_FORM;
    std::vector<i64> x((std::size_t)dim, 0);
    IntMat m(n, n);
    // standard ellipsoid walk on ||L^T x||^2 <= t2 + margin, deepest level first
    std::function<void(int, double)> walk = [&](int k, double used) {
        double offset = 0.0;
        for (int j = k + 1; j < dim; ++j) offset += L(j, k) * (double)x[(std::size_t)j];
        const double pivot = L(k, k);
        const double room = t2 + margin - used;
        if (room < 0) return;
        const double half = std::sqrt(room) / pivot;
        const double mid = -offset / pivot;
        for (i64 v = (i64)std::floor(mid - half) - 1; v <= (i64)std::ceil(mid + half) + 1; ++v) {
            x[(std::size_t)k] = v;
            const double d = pivot * ((double)v - mid);
            const double nowUsed = used + d * d;
            if (k == 0) {
                if (nowUsed > t2 + margin) continue;
                for (int col = 0; col < n; ++col)
                    for (int row = 0; row < n; ++row) m(row, col) = x[(std::size_t)(col * n + row)];
                double val;
                if (spec.identityBase) {
                    val = (double)frobenius_sq(m);
                } else {
                    val = twisted_norm_sq(m, spec.z, spec.w);
                }
                if (val > t2 + margin) continue;
                if (det_exact(m) != 1) continue;
                ++rec.count;  // inside, or within the certification margin
                if (std::abs(val - t2) < margin) ++rec.borderlineFlagged;
            } else {
                walk(k - 1, nowUsed);
            }
        }
    };
    walk(dim - 1, 0.0);
    rec.wallTimeSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

// Brute oracle: every entry is bounded by T in absolute value.
inline CountRecord naive_count(const BallSpec& spec) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!spec.identityBase) throw ManifestError("naive_count: identity base only");
    const int n = spec.n;
    const i64 budget = spec.radiusSq.floor();
    const i64 m = isqrt_i128(budget);
    CountRecord rec;
    rec.spec = spec;
    rec.method = CountMethod::NAIVE;
    IntMat mat(n, n);
    std::function<void(int, i64)> rec_fill = [&](int pos, i64 rem) {
        if (rem < 0) return;
        if (pos == n * n) {
            if (det_exact(mat) == 1) ++rec.count;
            return;
        }
        for (i64 v = -m; v <= m; ++v) {
            if (v * v > rem) continue;
            mat(pos / n, pos % n) = v;
            rec_fill(pos + 1, rem - v * v);
        }
    };
    rec_fill(0, budget);
    rec.wallTimeSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace latball
