#pragma once

// Spectral parameters mu = (mu_1, ..., mu_n), sum zero, closed under
// mu -> -conj(mu) as a multiset, with Re mu inside the convex hull of the
// Weyl orbit of rho = ((n-1)/2, (n-3)/2, ..., (1-n)/2). The hull membership
// is tested in its majorization form: descending prefix sums of Re mu are
// dominated by those of rho and the totals agree.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "latball/errors.hpp"

namespace latball {

using cplx = std::complex<double>;

inline std::vector<double> rho_vector(int n) {
    std::vector<double> r((std::size_t)n);
    for (int j = 0; j < n; ++j) r[(std::size_t)j] = 0.5 * (n - 1 - 2 * j);
    return r;
}

struct SpectralParameter {
    int n = 0;
    std::vector<cplx> mu;

    static SpectralParameter make(std::vector<cplx> values, double tol = 1e-9) {
        SpectralParameter p;
        p.n = (int)values.size();
        p.mu = std::move(values);
        p.validate(tol);
        return p;
    }

    double max_norm() const {
        double m = 0;
        for (const auto& z : mu) m = std::max(m, std::abs(z));
        return m;
    }

    double re_max_norm() const {
        double m = 0;
        for (const auto& z : mu) m = std::max(m, std::abs(z.real()));
        return m;
    }

    bool is_tempered(double tol = 1e-12) const { return re_max_norm() <= tol; }

    void validate(double tol = 1e-9) const {
        if (n < 2) throw ManifestError("SpectralParameter: n >= 2 required");
        cplx sum = 0;
        for (const auto& z : mu) sum += z;
        if (std::abs(sum) > tol * std::max(1.0, max_norm()))
            throw ManifestError("SpectralParameter: coordinates must sum to zero");
        // multiset closure under z -> -conj(z)
        std::vector<cplx> neg;
        neg.reserve(mu.size());
        for (const auto& z : mu) neg.push_back(-std::conj(z));
        auto key = [](const cplx& a, const cplx& b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        };
        std::vector<cplx> a = mu, b = neg;
        std::sort(a.begin(), a.end(), key);
        std::sort(b.begin(), b.end(), key);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - b[i]) > tol * std::max(1.0, max_norm()))
                throw ManifestError("SpectralParameter: multiset not closed under mu -> -conj(mu)");
        // majorization of Re mu by rho
        std::vector<double> re;
        re.reserve(mu.size());
        for (const auto& z : mu) re.push_back(z.real());
        std::sort(re.begin(), re.end(), std::greater<double>());
        auto rho = rho_vector(n);  // already descending
        double preRe = 0, preRho = 0;
        for (int j = 0; j < n; ++j) {
            preRe += re[(std::size_t)j];
            preRho += rho[(std::size_t)j];
            if (preRe > preRho + tol)
                throw ManifestError("SpectralParameter: Re mu escapes the rho hull (majorization fails)");
        }
        if (std::abs(preRe) > tol) throw ManifestError("SpectralParameter: Re mu total must vanish");
    }
};

inline SpectralParameter rho_parameter(int n) {
    std::vector<cplx> v;
    v.reserve((std::size_t)n);
    for (double x : rho_vector(n)) v.emplace_back(x, 0.0);
    return SpectralParameter::make(std::move(v));
}

}  // namespace latball
