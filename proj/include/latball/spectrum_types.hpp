#pragma once

// Spectral types E(d, f): unordered multisets of blocks (d_j, f_j) with
// sum d_j = n and f_j | d_j. Each block carries a cusp-form parameter vector
// of length f_j (zero when f_j = 1) and an imaginary shift s_j with
// sum d_j s_j = 0; the assembled n-vector lists, per block and per cusp
// component, the ladder
//
//   mu_j[m] + s_j + (d_j/f_j - 1 - 2k)/2,   k = 0, ..., d_j/f_j - 1.
//
// The exponent profile collects everything the rank optimizations consume:
// the real-part ceiling from the Jacquet-Shalika bound, the Weyl-wall
// coincidence count, sup-norm and average sup-norm exponents, and the
// covering exponent of the parameter space.

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "latball/errors.hpp"
#include "latball/rational.hpp"
#include "latball/spectral_param.hpp"

namespace latball {

struct SpectralType {
    int n = 0;
    std::vector<std::pair<int, int>> blocks;  // (d, f), canonical descending order

    void canonicalize() { std::sort(blocks.begin(), blocks.end(), std::greater<std::pair<int, int>>()); }

    bool is_constant() const { return blocks.size() == 1 && blocks[0].first == n && blocks[0].second == 1; }
    bool is_cuspidal() const { return blocks.size() == 1 && blocks[0].first == n && blocks[0].second == n; }

    std::string tag() const {
        if (is_constant()) return "CONSTANT";
        if (is_cuspidal()) return "CUSPIDAL";
        return "";
    }

    void validate() const {
        int sum = 0;
        for (const auto& [d, f] : blocks) {
            if (d < 1 || f < 1 || f > d || d % f != 0)
                throw ManifestError("SpectralType: blocks need f | d, 1 <= f <= d");
            sum += d;
        }
        if (sum != n) throw ManifestError("SpectralType: block dimensions must sum to n");
    }
};

inline std::vector<SpectralType> enumerate_types(int n, bool includeConstant = false) {
    if (n < 2) throw ManifestError("enumerate_types: n >= 2 required");
    std::set<std::vector<std::pair<int, int>>> seen;
    std::vector<std::pair<int, int>> current;
    // partitions with non-increasing parts; every divisor choice per part
    auto divisors = [](int d) {
        std::vector<int> out;
        for (int f = 1; f <= d; ++f)
            if (d % f == 0) out.push_back(f);
        return out;
    };
    std::function<void(int, int)> rec = [&](int remaining, int maxPart) {
        if (remaining == 0) {
            auto key = current;
            std::sort(key.begin(), key.end(), std::greater<std::pair<int, int>>());
            seen.insert(key);
            return;
        }
        for (int d = std::min(remaining, maxPart); d >= 1; --d)
            for (int f : divisors(d)) {
                current.emplace_back(d, f);
                rec(remaining - d, d);
                current.pop_back();
            }
    };
    rec(n, n);
    std::vector<SpectralType> out;
    for (const auto& blocks : seen) {
        SpectralType t;
        t.n = n;
        t.blocks = blocks;
        if (!includeConstant && t.is_constant()) continue;
        out.push_back(std::move(t));
    }
    return out;
}

inline Rational re_bound(const SpectralType& t) {
    t.validate();
    Rational best(0);
    for (const auto& [d, f] : t.blocks) {
        Rational r(d / f - 1, 2);
        if (f >= 2) r = r + Rational(1, 2);
        if (r > best) best = r;
    }
    return best;
}

inline Rational coincidence_count(const SpectralType& t) {
    t.validate();
    long long s = 0;
    for (const auto& [d, f] : t.blocks) s += (long long)d * (d / f - 1);
    return Rational(s, 2);
}

inline Rational supnorm_exponent(const SpectralType& t) {
    return Rational((long long)t.n * (t.n - 1), 2) - coincidence_count(t);
}

inline Rational avg_supnorm_exponent(const SpectralType& t) {
    t.validate();
    long long s = 0;
    for (const auto& [d, f] : t.blocks) s += (long long)f * (f - 1);
    return Rational(s, 2);
}

inline int cover_exponent(const SpectralType& t) {
    t.validate();
    int s = 0;
    for (const auto& [d, f] : t.blocks) s += f;
    return s - 1;
}

struct ExponentProfile {
    Rational reMax, coincidence, supnormExp, avgSupnormExp;
    int coverExp = 0;
};

inline ExponentProfile exponent_profile(const SpectralType& t) {
    return {re_bound(t), coincidence_count(t), supnorm_exponent(t), avg_supnorm_exponent(t), cover_exponent(t)};
}

struct SpectralPoint {
    SpectralType type;
    std::vector<std::vector<cplx>> blockMu;  // per block, length f_j (empty allowed when f_j = 1)
    std::vector<cplx> blockS;                // per block, purely imaginary
    SpectralParameter assembled;
};

inline SpectralPoint instantiate(const SpectralType& t, std::vector<std::vector<cplx>> blockMu,
                                 std::vector<cplx> blockS, double tol = 1e-9) {
    t.validate();
    const std::size_t r = t.blocks.size();
    if (blockMu.size() != r || blockS.size() != r)
        throw ManifestError("instantiate: one parameter vector and one shift per block required");
    cplx weighted = 0;
    for (std::size_t j = 0; j < r; ++j) {
        const auto& [d, f] = t.blocks[j];
        if (std::abs(blockS[j].real()) > tol) throw ManifestError("instantiate: shifts must be purely imaginary");
        weighted += (double)d * blockS[j];
        if (f == 1) {
            if (!blockMu[j].empty()) {
                if (blockMu[j].size() != 1 || std::abs(blockMu[j][0]) > tol)
                    throw ManifestError("instantiate: f = 1 blocks carry no cusp parameter");
            }
        } else {
            if ((int)blockMu[j].size() != f)
                throw ManifestError("instantiate: cusp parameter length must equal f");
            cplx s = 0;
            for (const auto& z : blockMu[j]) s += z;
            if (std::abs(s) > tol) throw ManifestError("instantiate: cusp parameters must sum to zero");
        }
    }
    if (std::abs(weighted) > tol) throw ManifestError("instantiate: sum of d_j s_j must vanish");
    std::vector<cplx> entries;
    entries.reserve((std::size_t)t.n);
    for (std::size_t j = 0; j < r; ++j) {
        const auto& [d, f] = t.blocks[j];
        const int ladder = d / f;
        for (int m = 0; m < f; ++m) {
            const cplx base = (f == 1 ? cplx(0.0) : blockMu[j][(std::size_t)m]) + blockS[j];
            for (int k = 0; k < ladder; ++k) entries.push_back(base + 0.5 * (ladder - 1 - 2 * k));
        }
    }
    SpectralPoint pt;
    pt.type = t;
    pt.blockMu = std::move(blockMu);
    pt.blockS = std::move(blockS);
    pt.assembled = SpectralParameter::make(std::move(entries), std::max(tol, 1e-9));
    return pt;
}

inline double supnorm_envelope(const SpectralParameter& mu) {
    double p = 1.0;
    for (std::size_t i = 0; i < mu.mu.size(); ++i)
        for (std::size_t j = i + 1; j < mu.mu.size(); ++j) p *= 1.0 + std::abs(mu.mu[i] - mu.mu[j]);
    return p;
}

// ---- case table for the small-rank minimax ---------------------------------
//
// Each group bounds its members by T^{tExpo} delta^{dExpo}, both exponents
// affine in the worst-case cusp deviation beta in (0, 1/2] where present.
// The smoothing term T^{n(n-1)} delta enters the same minimax with the pair
// (n(n-1), +1).

struct CaseGroup {
    std::string name;
    std::vector<std::string> members;
    Rational tConst, tBeta;  // T-exponent  = tConst + tBeta * beta
    Rational dConst, dBeta;  // delta-exponent = dConst + dBeta * beta
    bool hasBeta = false;
};

struct CaseTable {
    int n = 0;
    std::vector<CaseGroup> groups;
    Rational smoothingT;  // n(n-1)
    Rational smoothingD;  // +1
};

inline CaseTable case_table(int n) {
    CaseTable table;
    table.n = n;
    table.smoothingT = Rational((long long)n * (n - 1));
    table.smoothingD = Rational(1);
    if (n == 3) {
        table.groups.push_back({"tempered", {"1a", "2a", "4"}, Rational(3), Rational(0), Rational(-2), Rational(0),
                                false});
        table.groups.push_back({"non-tempered", {"1b", "2b", "3"}, Rational(9, 2), Rational(0), Rational(-1, 2),
                                Rational(0), false});
        return table;
    }
    if (n == 4) {
        table.groups.push_back({"tempered", {"1a", "3a", "5a", "6a", "8a", "10"}, Rational(6), Rational(0),
                                Rational(-4), Rational(0), false});
        table.groups.push_back({"one non-tempered pair", {"1b", "3b", "5b", "8b", "9"}, Rational(6), Rational(4),
                                Rational(-5, 2), Rational(1, 2), true});
        table.groups.push_back({"degenerate non-tempered", {"1c", "2", "5c", "6b", "7"}, Rational(8), Rational(0),
                                Rational(-1, 2), Rational(0), false});
        table.groups.push_back({"Epstein", {"4"}, Rational(10), Rational(0), Rational(0), Rational(0), false});
        return table;
    }
    throw ManifestError("case_table: n in {3, 4} required");
}

}  // namespace latball
