#pragma once

// Main-term constant
//
//   c_n = pi^{n^2/2} / ( Gamma((n^2-n+2)/2) Gamma(n/2) zeta(2) ... zeta(n) )
//
// evaluated in binary128 through lgammaq and the Euler-Maclaurin zeta, plus
// the least-squares probe of the error exponent in N(T) - c_n T^{n(n-1)}.

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "latball/counting.hpp"
#include "latball/errors.hpp"
#include "latball/gamma_zeta.hpp"
#include "latball/realq.hpp"

namespace latball {

struct AsymptoticConstant {
    int n = 0;
    f128 value = 0;
    int precisionBits = 113;

    double to_double() const { return (double)value; }
    std::string str(int digits = 30) const { return to_string_q(value, digits); }
};

inline AsymptoticConstant main_constant(int n, int precisionBits = 113) {
    if (n < 2) throw ManifestError("main_constant: n >= 2 required");
    static std::map<std::pair<int, int>, f128> cache;
    static std::mutex mtx;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find({n, precisionBits});
        if (it != cache.end()) return {n, it->second, precisionBits};
    }
    f128 lg = (f128)(n * n) / 2 * log_q(PI_Q);
    lg -= lgamma_q((f128)(n * n - n + 2) / 2);
    lg -= lgamma_q((f128)n / 2);
    f128 value = exp_q(lg);
    for (int k = 2; k <= n; ++k) value /= zeta_at_integer_q(k, precisionBits);
    {
        std::lock_guard<std::mutex> lock(mtx);
        cache[{n, precisionBits}] = value;
    }
    return {n, value, precisionBits};
}

inline double main_term(int n, double T, int precisionBits = 113) {
    if (T < 0) throw ManifestError("main_term: T >= 0 required");
    return main_constant(n, precisionBits).to_double() * std::pow(T, n * (n - 1));
}

struct FitReport {
    int n = 0;
    int mainExponent = 0;                          // n(n-1)
    double fittedErrorExponent = 0.0;
    double residual = 0.0;                         // rms of log-log fit residuals
    std::vector<std::pair<double, std::uint64_t>> pointsUsed;  // (T, count)
    std::vector<double> excludedT;                 // zero-error points dropped
    std::vector<int> errorSigns;                   // sign of count - main term, used points
};

inline FitReport fit_error_exponent(const std::vector<CountRecord>& records, int precisionBits = 113) {
    if (records.size() < 3) throw ManifestError("fit_error_exponent: at least 3 records required");
    const int n = records[0].spec.n;
    const double cn = main_constant(n, precisionBits).to_double();
    FitReport rep;
    rep.n = n;
    rep.mainExponent = n * (n - 1);
    double prevT = 0.0;
    std::vector<double> xs, ys;
    for (const auto& r : records) {
        if (r.spec.n != n) throw ManifestError("fit_error_exponent: records mix dimensions");
        const double T = std::sqrt(r.spec.radiusSq.to_double());
        if (T <= prevT) throw ManifestError("fit_error_exponent: records must have strictly increasing T");
        prevT = T;
        const double main = cn * std::pow(T, n * (n - 1));
        const double err = (double)r.count - main;
        if (err == 0.0) {
            rep.excludedT.push_back(T);
            continue;
        }
        rep.pointsUsed.emplace_back(T, r.count);
        rep.errorSigns.push_back(err > 0 ? 1 : -1);
        xs.push_back(std::log(T));
        ys.push_back(std::log(std::abs(err)));
    }
    if (xs.size() < 3) throw ManifestError("fit_error_exponent: fewer than 3 usable (nonzero-error) points");
    const std::size_t m = xs.size();
    double xbar = 0, ybar = 0;
    for (std::size_t i = 0; i < m; ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= (double)m;
    ybar /= (double)m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    rep.fittedErrorExponent = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double pred = ybar + rep.fittedErrorExponent * (xs[i] - xbar);
        ss += (ys[i] - pred) * (ys[i] - pred);
    }
    rep.residual = std::sqrt(ss / (double)m);
    return rep;
}

}  // namespace latball
