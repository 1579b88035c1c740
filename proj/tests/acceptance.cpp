// Acceptance gate: one timed pass/fail line per criterion, exit code equal
// to the number of failures. Each criterion is self-contained and runs
// against the public library interfaces only.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "latball/counting.hpp"
#include "latball/driver.hpp"
#include "latball/envelopes.hpp"
#include "latball/exponents.hpp"
#include "latball/main_term.hpp"
#include "latball/spectrum_types.hpp"
#include "latball/transform.hpp"

using namespace latball;
namespace fs = std::filesystem;

namespace {

const double kPi = 3.14159265358979323846;

std::string gDetail;  // failure context for the current criterion

bool expect(bool ok, const std::string& what) {
    if (!ok && gDetail.empty()) gDetail = what;
    return ok;
}

SpectralParameter tempered2(double t) {
    return SpectralParameter::make({cplx(0.0, t), cplx(0.0, -t)});
}

// criterion 1: exact small counts, certified by the independent naive scan
bool criterion1() {
    const auto f2 = count_identity_ball(BallSpec::identity(2, Rational(2)));
    const auto f4 = count_identity_ball(BallSpec::identity(2, Rational(4)));
    const auto n2 = naive_count(BallSpec::identity(2, Rational(2)));
    const auto n4 = naive_count(BallSpec::identity(2, Rational(4)));
    return expect(f2.count == 4, "count(2, T^2=2) = " + std::to_string(f2.count) + ", want 4") &
           expect(f4.count == 20, "count(2, T^2=4) = " + std::to_string(f4.count) + ", want 20") &
           expect(n2.count == 4 && n4.count == 20, "naive scan disagrees");
}

// criterion 2: rank-2 main term within 5% on T in {20,...,100}, fitted error
// exponent at most 1.6
bool criterion2() {
    std::vector<CountRecord> records;
    bool ok = true;
    for (long long T : {20, 40, 60, 80, 100}) {
        auto rec = count_identity_ball(BallSpec::identity(2, Rational(T * T)));
        const double main = 6.0 * (double)T * (double)T;
        const double relErr = std::abs((double)rec.count - main) / main;
        ok &= expect(relErr <= 0.05,
                     "T=" + std::to_string(T) + ": |N - 6T^2|/6T^2 = " + std::to_string(relErr));
        records.push_back(std::move(rec));
    }
    const FitReport rep = fit_error_exponent(records);
    ok &= expect(rep.fittedErrorExponent <= 1.6,
                 "fitted error exponent " + std::to_string(rep.fittedErrorExponent) + " > 1.6");
    return ok;
}

// criterion 3: rank-3 ratio N/(c3 T^6) near 1 with a monotone trend, and the
// constant agrees with itself across working precisions
bool criterion3() {
    const double c3 = main_constant(3).to_double();
    std::vector<double> devs;
    double lastRatio = 0;
    for (long long T : {4, 6, 8, 10}) {
        const auto rec = count_identity_ball(BallSpec::identity(3, Rational(T * T)));
        lastRatio = (double)rec.count / (c3 * std::pow((double)T, 6.0));
        devs.push_back(std::abs(lastRatio - 1.0));
    }
    bool ok = expect(std::abs(lastRatio - 1.0) <= 0.20,
                     "T=10 ratio " + std::to_string(lastRatio) + " misses 1 by more than 0.20");
    int inversions = 0;
    for (std::size_t i = 1; i < devs.size(); ++i)
        if (devs[i] > devs[i - 1] + 1e-12) ++inversions;
    ok &= expect(inversions <= 1, "trend toward 1 broken " + std::to_string(inversions) + " times");
    const double ref = main_constant(3, 113).to_double();
    for (int bits : {53, 64, 256}) {
        const double v = main_constant(3, bits).to_double();
        ok &= expect(std::abs(v - ref) / ref <= 1e-12,
                     "c_3 at " + std::to_string(bits) + " bits drifts beyond 1e-12");
    }
    return ok;
}

// criterion 4: the three transform routes agree, and the residue expansion at
// rho reproduces the hand-derived leading coefficient pi/2
bool criterion4() {
    bool ok = true;
    const double kappa2 = calibrate_direct_constant(2, 10.0, tempered2(1.0));  // one-time
    for (double t : {1.0, 5.0, 10.0}) {
        for (double T : {10.0, 100.0}) {
            const auto mu = tempered2(t);
            const cplx a = chi_transform_contour(2, T, mu).value;
            const cplx b = chi_transform_residues(2, T, mu).value;
            const cplx d = chi_transform_direct(2, T, mu).value;
            const std::string at = " at t=" + std::to_string(t) + ", T=" + std::to_string(T);
            ok &= expect(std::abs(a - b) / std::abs(a) <= 1e-6, "contour vs residues" + at);
            ok &= expect(std::abs(a - kappa2 * d) / std::abs(a) <= 1e-4, "contour vs direct" + at);
        }
    }
    const double T = 10.0;
    const double lead = (chi_transform_residues(2, T, rho_parameter(2)).value.real() + kPi) / (T * T);
    ok &= expect(std::abs(lead - kPi / 2.0) <= 1e-6,
                 "leading coefficient at rho = " + std::to_string(lead) + ", want pi/2");
    return ok;
}

// criterion 5: envelope constant stays within a factor 2 when T doubles
bool criterion5() {
    const double kappa = 0.25;  // keeps the norm-50 grid inside T^(2-kappa) at T=10
    auto fittedConstant = [&](double T) {
        double c = 0.0;
        for (double t = 0.0; t <= 50.0; t += 6.25) {
            const auto mu = tempered2(t);
            const double env = lemma3_envelope(2, T, mu, kappa, EnvelopeRegime::BOUNDED);
            const double val = std::abs(chi_transform_contour(2, T, mu).value);
            c = std::max(c, val / env);
        }
        return c;
    };
    const double c10 = fittedConstant(10.0);
    const double c20 = fittedConstant(20.0);
    const double ratio = c20 / c10;
    return expect(ratio >= 0.5 && ratio <= 2.0,
                  "C(20)/C(10) = " + std::to_string(ratio) + " outside [1/2, 2]");
}

// criterion 6: spectral type census, real-part bounds, constant instantiation
bool criterion6() {
    bool ok = expect(enumerate_types(2).size() == 2, "n=2 type count");
    ok &= expect(enumerate_types(3).size() == 4, "n=3 type count");
    ok &= expect(enumerate_types(4).size() == 10, "n=4 type count");

    SpectralType eps3;
    eps3.n = 3;
    eps3.blocks = {{2, 1}, {1, 1}};
    SpectralType eps4;
    eps4.n = 4;
    eps4.blocks = {{3, 1}, {1, 1}};
    ok &= expect(re_bound(eps3) == Rational(1, 2), "rank-3 Epstein bound");
    ok &= expect(re_bound(eps4) == Rational(1), "rank-4 Epstein bound");

    for (int n : {2, 3, 4, 5}) {
        SpectralType constant;
        constant.n = n;
        constant.blocks = {{n, 1}};
        const auto pt = instantiate(constant, {{}}, {cplx(0.0)});
        const auto rho = rho_vector(n);
        for (int j = 0; j < n; ++j)
            ok &= expect(pt.assembled.mu[(std::size_t)j] == cplx(rho[(std::size_t)j], 0.0),
                         "constant type does not assemble to rho at n=" + std::to_string(n));
    }
    return ok;
}

// criterion 7: every exponent optimization, exact where promised
bool criterion7() {
    const auto d3 = small_rank_delta(3);
    const auto d4 = small_rank_delta(4);
    bool ok = expect(d3.exact && d3.deltaGainExact == Rational(1), "delta_3 != 1");
    ok &= expect(d4.exact && d4.deltaGainExact == Rational(6, 5), "delta_4 != 6/5");

    const auto r5 = optimize_theorem1(5);
    ok &= expect(std::abs(r5.alphaStar - 5.0 / std::sqrt(77.0)) <= 1e-12, "alpha*(5) != 5/sqrt(77)");
    ok &= expect(std::abs(r5.deltaGain - 5.0 * (9.0 - std::sqrt(77.0)) / 4.0) <= 1e-9,
                 "delta_5 != 5(9 - sqrt(77))/4");
    ok &= expect(r5.discrepancy <= 1e-6, "rank-5 closed form vs grid");

    for (int n : {6, 8, 16, 32, 64, 128, 256})
        ok &= expect(optimize_theorem1(n).discrepancy <= 1e-6,
                     "rank-" + std::to_string(n) + " closed form vs grid");

    ok &= expect(std::abs(alpha0_closed(256) - (1.0 + 1.0 / std::sqrt(2.0))) <= 10.0 / 256.0,
                 "alpha_0(256) far from 1 + 1/sqrt(2)");

    for (int n = 10; n <= 64; ++n)
        ok &= expect(optimize_theorem2(n).discrepancy <= 1e-6,
                     "sup-norm closed form vs grid at n=" + std::to_string(n));
    return ok;
}

// criterion 8: literature baselines, exact
bool criterion8() {
    return expect(baselines(3).gny == Rational(1, 4), "GNY gain at n=3") &
           expect(baselines(4).gny == Rational(3, 10), "GNY gain at n=4") &
           expect(baselines(2).heuristic == Rational(2, 3), "heuristic gain at n=2");
}

// criterion 9: scans replay byte-identically for any worker count
bool criterion9() {
    static std::mt19937_64 rng(std::random_device{}());
    const fs::path tmp = fs::temp_directory_path() / ("latball-accept-" + std::to_string(rng()));
    fs::create_directories(tmp);
    auto runScan = [&](int workers, const std::string& stem) {
        ExperimentManifest m;
        m.command = Command::SCAN;
        m.n = 2;
        m.tMin = 10.0;
        m.tMax = 40.0;
        m.tSteps = 6;
        m.workers = workers;
        m.cacheDir = (tmp / "cache").string();
        m.outputPath = (tmp / stem).string();
        std::ostringstream os;
        run(m, os);
        std::ifstream f(m.outputPath + ".csv", std::ios::binary);
        std::ostringstream body;
        body << f.rdbuf();
        return os.str() + "\x1f" + body.str();
    };
    const auto cold = runScan(1, "a");
    const auto parallel = runScan(4, "b");
    const auto replay = runScan(1, "c");
    std::error_code ec;
    fs::remove_all(tmp, ec);
    return expect(parallel == cold, "4-worker rerun differs from the cold 1-worker scan") &
           expect(replay == cold, "1-worker replay differs from the cold scan");
}

}  // namespace

int main() {
    struct Criterion {
        const char* label;
        std::function<bool()> fn;
        double limitSeconds;  // 0 = no budget beyond the harness timeout
    };
    const std::vector<Criterion> list = {
        {"1: exact rank-2 counts vs naive scan", criterion1, 1.0},
        {"2: rank-2 main term and error exponent", criterion2, 60.0},
        {"3: rank-3 ratio trend and constant consistency", criterion3, 0.0},
        {"4: transform three-route agreement and pi/2 coefficient", criterion4, 0.0},
        {"5: envelope constant stable under T doubling", criterion5, 0.0},
        {"6: spectral type census and instantiation", criterion6, 0.0},
        {"7: exponent optimizations, exact and gridded", criterion7, 60.0},
        {"8: literature baseline gains", criterion8, 0.0},
        {"9: deterministic scan replay", criterion9, 0.0},
    };

    int failures = 0;
    for (const auto& c : list) {
        gDetail.clear();
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            gDetail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && c.limitSeconds > 0.0 && secs > c.limitSeconds) {
            ok = false;
            gDetail = "time budget " + std::to_string(c.limitSeconds) + " s exceeded";
        }
        if (ok) {
            std::printf("[PASS] criterion %s (%.2f s)\n", c.label, secs);
        } else {
            ++failures;
            std::printf("[FAIL] criterion %s (%.2f s)%s%s\n", c.label, secs,
                        gDetail.empty() ? "" : " -- ", gDetail.c_str());
        }
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", (int)list.size() - failures, list.size());
    return failures;
}
