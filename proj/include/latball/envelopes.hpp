#pragma once

// Bound envelopes for the transform, up to caller-fitted constants:
//
//   smoothing   (1 + delta ||mu||)^{-A}
//   general     T^{n(n-1)/2 + n ||Re mu||}
//   bounded     T^{n(n-1)/2} G(Im mu) / (1 + ||mu||)^{n(n-1)/4 + (1 + ||Re mu||)/2}
//               valid while ||mu|| <= T^{2 - kappa}
//   combined    bounded x smoothing   (transform of the convolved weight)
//
// ||.|| is the max-norm throughout. The epsilon exponents and implicit
// constants of the source bounds are absorbed into the constant factor the
// caller fits, which is how the envelopes are consumed downstream.

#include <cmath>
#include <vector>

#include "latball/errors.hpp"
#include "latball/spectral_param.hpp"
#include "latball/transform.hpp"

namespace latball {

struct EnvelopeParams {
    double T = 10.0;
    double delta = 0.1;
    double A = 2.0;
    double kappa = 0.5;

    void validate() const {
        if (T < 1.0) throw ManifestError("EnvelopeParams: T >= 1 required");
        if (!(delta > 0.0 && delta < 1.0)) throw ManifestError("EnvelopeParams: delta in (0, 1) required");
        if (A <= 0.0) throw ManifestError("EnvelopeParams: A > 0 required");
        if (kappa <= 0.0) throw ManifestError("EnvelopeParams: kappa > 0 required");
    }
};

inline double lemma2_envelope(const EnvelopeParams& params, const SpectralParameter& mu, double reBoundCap = 10.0) {
    params.validate();
    if (mu.re_max_norm() > reBoundCap)
        throw ManifestError("lemma2_envelope: ||Re mu|| exceeds the configured O(1) cap");
    return std::pow(1.0 + params.delta * mu.max_norm(), -params.A);
}

enum class EnvelopeRegime { GENERAL, BOUNDED };

inline double lemma3_envelope(int n, double T, const SpectralParameter& mu, double kappa, EnvelopeRegime regime) {
    if (mu.n != n) throw ManifestError("lemma3_envelope: dimension mismatch");
    if (T < 1.0) throw ManifestError("lemma3_envelope: T >= 1 required");
    const double half = n * (n - 1) / 2.0;
    if (regime == EnvelopeRegime::GENERAL) return std::pow(T, half + n * mu.re_max_norm());
    if (kappa <= 0.0) throw ManifestError("lemma3_envelope: kappa > 0 required");
    if (mu.max_norm() > std::pow(T, 2.0 - kappa))
        throw ManifestError("lemma3_envelope: ||mu|| exceeds T^(2-kappa) (bounded regime violated)");
    std::vector<double> im;
    im.reserve(mu.mu.size());
    for (const auto& z : mu.mu) im.push_back(z.imag());
    const double expo = half / 2.0 + 0.5 * (1.0 + mu.re_max_norm());
    return std::pow(T, half) * g_weight(im) / std::pow(1.0 + mu.max_norm(), expo);
}

inline double cor1_envelope(int n, double T, double delta, const SpectralParameter& mu, double A) {
    if (T < 1.0) throw ManifestError("cor1_envelope: T >= 1 required");
    if (!(delta < 1.0)) throw ManifestError("cor1_envelope: delta < 1 required");
    if (!(delta > std::pow(T, -2.0)))
        throw ManifestError("cor1_envelope: delta must exceed T^-2 (no admissible kappa)");
    // the largest admissible kappa with T^(kappa-2) <= delta gives the
    // bounded-regime ceiling ||mu|| <= T^(2-kappa) = 1/delta
    const double kappa = 2.0 + std::log(delta) / std::log(std::max(T, 1.0 + 1e-12));
    EnvelopeParams p;
    p.T = T;
    p.delta = delta;
    p.A = A;
    p.kappa = kappa;
    return lemma3_envelope(n, T, mu, kappa, EnvelopeRegime::BOUNDED) * lemma2_envelope(p, mu);
}

}  // namespace latball
