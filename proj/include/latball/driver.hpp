#pragma once

// Batch driver: one manifest in, deterministic artifacts out.
//
// Exact ball counts are cached on disk keyed by an FNV-1a hash of the
// canonical ball description (dimension, exact squared radius, base point,
// tolerances; never the worker count). A cache hit replays the stored row
// byte for byte, wall-clock column included, so re-running a scan with any
// worker count reproduces the original CSV exactly. Entries carry a checksum
// line; a corrupt file is reported, never silently recomputed.

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "latball/counting.hpp"
#include "latball/envelopes.hpp"
#include "latball/errors.hpp"
#include "latball/exponents.hpp"
#include "latball/main_term.hpp"
#include "latball/spectrum_types.hpp"
#include "latball/transform.hpp"

namespace latball {

using ojson = nlohmann::ordered_json;

enum class Command { COUNT, SCAN, FIT, CONSTANT, TRANSFORM, SPECTRUM, OPTIMIZE, BASELINES };

inline Command parse_command(std::string s) {
    for (auto& c : s) c = (char)std::tolower((unsigned char)c);
    if (s == "count") return Command::COUNT;
    if (s == "scan") return Command::SCAN;
    if (s == "fit") return Command::FIT;
    if (s == "constant") return Command::CONSTANT;
    if (s == "transform") return Command::TRANSFORM;
    if (s == "spectrum") return Command::SPECTRUM;
    if (s == "optimize") return Command::OPTIMIZE;
    if (s == "baselines") return Command::BASELINES;
    throw ManifestError("unknown command '" + s + "'");
}

struct ExperimentManifest {
    Command command = Command::COUNT;
    int n = 2;
    Rational radiusSq{0};
    bool radiusSqSet = false;
    double tMin = 10.0, tMax = 100.0;
    int tSteps = 5;
    double T = 10.0;             // transform radius
    std::string method;          // COUNT: empty = automatic; TRANSFORM: contour/residues/direct/envelope
    std::vector<cplx> mu;
    int theorem = 1;
    std::string outputPath;      // artifact stem; empty = stream only
    std::string cacheDir;        // empty = $LATBALL_CACHE_DIR, then ./latball-cache
    int workers = 1;
    int precisionBits = 128;
    double tol = 1e-9;
    double delta = 0.1, A = 2.0, kappa = 0.5;  // envelope knobs
};

// ---- content-addressed count cache ------------------------------------------

namespace detail {

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

}  // namespace detail

inline std::string canonical_ball_key(const BallSpec& s) {
    std::ostringstream os;
    os << "ball-v1;n=" << s.n << ";t2=" << s.radiusSq.str() << ";base=";
    if (s.identityBase) {
        os << "identity";
    } else {
        os << "general;tol=" << std::hexfloat << s.tol << ";z=";
        for (int i = 0; i < s.z.rows(); ++i)
            for (int j = 0; j < s.z.cols(); ++j) os << s.z(i, j) << ",";
        os << ";w=";
        for (int i = 0; i < s.w.rows(); ++i)
            for (int j = 0; j < s.w.cols(); ++j) os << s.w(i, j) << ",";
    }
    return os.str();
}

struct CachedCount {
    std::string key;
    std::uint64_t count = 0;
    std::string method;
    std::uint64_t borderline = 0;
    std::string seconds;  // fixed %.6f text, replayed verbatim on cache hits
};

class CountCache {
  public:
    explicit CountCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    std::optional<CachedCount> lookup(const std::string& key) const {
        return read_entry(path_for(key), &key);
    }

    void store(const CachedCount& e) const {
        std::string body = "latball-count-cache-v1\n";
        body += "key=" + e.key + "\n";
        body += "count=" + std::to_string(e.count) + " method=" + e.method +
                " borderline=" + std::to_string(e.borderline) + " seconds=" + e.seconds + "\n";
        body += "crc=" + detail::hex16(detail::fnv1a64(body)) + "\n";
        const auto p = path_for(e.key);
        const auto tmp = p.string() + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw ManifestError("cache: cannot write " + tmp);
            f << body;
        }
        std::filesystem::rename(tmp, p);
    }

    std::vector<CachedCount> load_all() const {
        std::vector<CachedCount> out;
        if (!std::filesystem::exists(dir_)) return out;
        for (const auto& de : std::filesystem::directory_iterator(dir_)) {
            const auto name = de.path().filename().string();
            if (name.rfind("cnt_", 0) != 0 || de.path().extension() != ".txt") continue;
            if (auto e = read_entry(de.path(), nullptr)) out.push_back(std::move(*e));
        }
        return out;
    }

  private:
    std::filesystem::path dir_;

    std::filesystem::path path_for(const std::string& key) const {
        return dir_ / ("cnt_" + detail::hex16(detail::fnv1a64(key)) + ".txt");
    }

    static std::optional<CachedCount> read_entry(const std::filesystem::path& p, const std::string* expectKey) {
        std::ifstream f(p, std::ios::binary);
        if (!f) return std::nullopt;
        std::string line0, line1, line2, line3;
        if (!std::getline(f, line0) || !std::getline(f, line1) || !std::getline(f, line2) ||
            !std::getline(f, line3))
            throw ManifestError("cache corruption: truncated entry " + p.string());
        const std::string body = line0 + "\n" + line1 + "\n" + line2 + "\n";
        if (line0 != "latball-count-cache-v1" || line3 != "crc=" + detail::hex16(detail::fnv1a64(body)))
            throw ManifestError("cache corruption: checksum mismatch in " + p.string());
        if (line1.rfind("key=", 0) != 0) throw ManifestError("cache corruption: malformed entry " + p.string());
        CachedCount e;
        e.key = line1.substr(4);
        if (expectKey && e.key != *expectKey) return std::nullopt;  // hash collision: treat as a miss
        std::istringstream is(line2);
        std::string tCount, tMethod, tBorder, tSeconds;
        if (!(is >> tCount >> tMethod >> tBorder >> tSeconds) || tCount.rfind("count=", 0) != 0 ||
            tMethod.rfind("method=", 0) != 0 || tBorder.rfind("borderline=", 0) != 0 ||
            tSeconds.rfind("seconds=", 0) != 0)
            throw ManifestError("cache corruption: malformed entry " + p.string());
        e.count = std::stoull(tCount.substr(6));
        e.method = tMethod.substr(7);
        e.borderline = std::stoull(tBorder.substr(11));
        e.seconds = tSeconds.substr(8);
        return e;
    }
};

inline std::filesystem::path resolve_cache_dir(const std::string& fromManifest) {
    if (!fromManifest.empty()) return fromManifest;
    if (const char* env = std::getenv("LATBALL_CACHE_DIR"); env && *env) return env;
    return "latball-cache";
}

// compute-or-replay; a requested method only recomputes when the stored row used a different one
inline CachedCount resolve_count(const CountCache& cache, const BallSpec& spec, int internalWorkers,
                                 const std::string& requestedMethod = "") {
    const std::string key = canonical_ball_key(spec);
    if (auto hit = cache.lookup(key)) {
        if (requestedMethod.empty() || hit->method == requestedMethod) return *hit;
    }
    CountRecord rec;
    if (requestedMethod == "naive") rec = naive_count(spec);
    else if (spec.identityBase) rec = count_identity_ball(spec, internalWorkers);
    else rec = count_general_ball(spec);
    if (!requestedMethod.empty() && method_name(rec.method) != requestedMethod)
        throw ManifestError("count method '" + requestedMethod + "' not available for this base point");
    CachedCount e;
    e.key = key;
    e.count = rec.count;
    e.method = method_name(rec.method);
    e.borderline = rec.borderlineFlagged;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", rec.wallTimeSeconds);
    e.seconds = buf;
    cache.store(e);
    return e;
}

// ---- row rendering -----------------------------------------------------------

inline std::string count_csv_header() { return "n,radius_sq,count,method,borderline,seconds\n"; }

inline std::string count_csv_row(int n, const Rational& t2, const CachedCount& e) {
    return std::to_string(n) + "," + t2.str() + "," + std::to_string(e.count) + "," + e.method + "," +
           std::to_string(e.borderline) + "," + e.seconds + "\n";
}

inline ojson count_json_row(int n, const Rational& t2, const CachedCount& e) {
    ojson j;
    j["n"] = n;
    j["radius_sq"] = t2.str();
    j["count"] = e.count;
    j["method"] = e.method;
    j["borderline"] = e.borderline;
    j["seconds"] = std::stod(e.seconds);
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ManifestError("cannot write " + path);
    f << content;
}

// ---- scan grid ----------------------------------------------------------------

inline std::vector<Rational> scan_radii(double tMin, double tMax, int steps) {
    if (!(tMin > 0.0) || !(tMax >= tMin) || steps < 1)
        throw ManifestError("scan grid requires 0 < t-min <= t-max and t-steps >= 1");
    std::vector<Rational> out;
    for (int i = 0; i < steps; ++i) {
        const double f = steps == 1 ? 0.0 : (double)i / (steps - 1);
        const double T = tMin * std::pow(tMax / tMin, f);
        const long long r2 = (long long)std::llround(T * T);
        if (r2 < 1) continue;
        Rational r(r2);
        if (out.empty() || !(out.back() == r)) out.push_back(r);
    }
    if (out.empty()) throw ManifestError("scan grid is empty");
    return out;
}

// ---- mode implementations ------------------------------------------------------

namespace detail {

inline void require(bool ok, const char* msg) {
    if (!ok) throw ManifestError(msg);
}

inline std::string format_double(double v, int digits = 12) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

inline ojson mu_json(const std::vector<cplx>& mu) {
    ojson arr = ojson::array();
    for (const auto& z : mu) arr.push_back({z.real(), z.imag()});
    return arr;
}

inline void emit_count_rows(const ExperimentManifest& m, const std::vector<Rational>& radii,
                            const std::vector<CachedCount>& rows, std::ostream& out) {
    std::string csv = count_csv_header();
    std::string jsonl;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv += count_csv_row(m.n, radii[i], rows[i]);
        jsonl += count_json_row(m.n, radii[i], rows[i]).dump() + "\n";
    }
    out << csv;
    if (!m.outputPath.empty()) {
        write_text_file(m.outputPath + ".csv", csv);
        write_text_file(m.outputPath + ".jsonl", jsonl);
    }
}

inline int run_count(const ExperimentManifest& m, std::ostream& out) {
    require(m.n >= 2, "--n must be at least 2");
    require(m.radiusSqSet, "COUNT requires --radius-sq");
    require(m.radiusSq > Rational(0), "--radius-sq must be positive");
    CountCache cache(resolve_cache_dir(m.cacheDir));
    const BallSpec spec = BallSpec::identity(m.n, m.radiusSq, m.tol);
    const CachedCount row = resolve_count(cache, spec, std::max(1, m.workers), m.method);
    emit_count_rows(m, {m.radiusSq}, {row}, out);
    return 0;
}

inline int run_scan(const ExperimentManifest& m, std::ostream& out) {
    require(m.n >= 2, "--n must be at least 2");
    const std::vector<Rational> radii = scan_radii(m.tMin, m.tMax, m.tSteps);
    CountCache cache(resolve_cache_dir(m.cacheDir));
    std::vector<CachedCount> rows(radii.size());
    std::atomic<std::size_t> nextJob{0};
    std::vector<std::exception_ptr> failures(radii.size());
    auto work = [&] {
        for (;;) {
            const std::size_t i = nextJob.fetch_add(1);
            if (i >= radii.size()) return;
            try {
                rows[i] = resolve_count(cache, BallSpec::identity(m.n, radii[i], m.tol), 1, m.method);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const int k = std::max(1, m.workers);
    if (k == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve((std::size_t)k);
        for (int t = 0; t < k; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const auto& ep : failures)
        if (ep) std::rethrow_exception(ep);
    emit_count_rows(m, radii, rows, out);
    return 0;
}

inline int run_fit(const ExperimentManifest& m, std::ostream& out) {
    require(m.n >= 2, "--n must be at least 2");
    CountCache cache(resolve_cache_dir(m.cacheDir));
    const std::string prefix = "ball-v1;n=" + std::to_string(m.n) + ";t2=";
    std::vector<std::pair<Rational, CachedCount>> found;
    for (auto& e : cache.load_all()) {
        if (e.key.rfind(prefix, 0) != 0) continue;
        const auto basePos = e.key.find(";base=identity");
        if (basePos == std::string::npos || basePos + 14 != e.key.size()) continue;
        found.emplace_back(Rational::parse(e.key.substr(prefix.size(), basePos - prefix.size())), e);
    }
    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<CountRecord> records;
    records.reserve(found.size());
    for (const auto& [t2, e] : found) {
        CountRecord r;
        r.spec = BallSpec::identity(m.n, t2);
        r.count = e.count;
        records.push_back(std::move(r));
    }
    const FitReport rep = fit_error_exponent(records, m.precisionBits);
    ojson j;
    j["n"] = rep.n;
    j["main_exponent"] = rep.mainExponent;
    j["fitted_error_exponent"] = rep.fittedErrorExponent;
    j["residual"] = rep.residual;
    ojson pts = ojson::array();
    for (const auto& [T, c] : rep.pointsUsed) pts.push_back({T, c});
    j["points_used"] = pts;
    j["excluded_t"] = rep.excludedT;
    j["error_signs"] = rep.errorSigns;
    out << "fit: n=" << rep.n << " main exponent " << rep.mainExponent << ", error exponent "
        << format_double(rep.fittedErrorExponent, 6) << " (rms residual "
        << format_double(rep.residual, 3) << ", " << rep.pointsUsed.size() << " points)\n";
    if (!m.outputPath.empty()) write_text_file(m.outputPath + ".json", j.dump(2) + "\n");
    return 0;
}

inline int run_constant(const ExperimentManifest& m, std::ostream& out) {
    require(m.n >= 2, "--n must be at least 2");
    const AsymptoticConstant c = main_constant(m.n, m.precisionBits);
    out << "c_" << m.n << " = " << c.str(33) << "  (" << c.precisionBits << "-bit arithmetic)\n";
    if (!m.outputPath.empty()) {
        ojson j;
        j["n"] = c.n;
        j["precision_bits"] = c.precisionBits;
        j["value"] = c.str(33);
        write_text_file(m.outputPath + ".json", j.dump(2) + "\n");
    }
    return 0;
}

inline int run_transform(const ExperimentManifest& m, std::ostream& out) {
    require(m.n >= 2, "--n must be at least 2");
    require(!m.mu.empty(), "TRANSFORM requires --mu");
    require((int)m.mu.size() == m.n, "--mu must list exactly n coordinates");
    require(m.T > 0.0, "--t (transform radius) must be positive");
    const SpectralParameter sp = SpectralParameter::make(m.mu, std::max(m.tol, 1e-12));
    std::string method = m.method.empty() ? "contour" : m.method;
    TransformResult res;
    if (method == "contour") res = chi_transform_contour(m.n, m.T, sp);
    else if (method == "residues") res = chi_transform_residues(m.n, m.T, sp);
    else if (method == "direct") res = chi_transform_direct(m.n, m.T, sp);
    else if (method == "envelope") {
        res.value = cor1_envelope(m.n, m.T, m.delta, sp, m.A);
        res.tailBound = 0.0;
    } else {
        throw ManifestError("transform method must be contour, residues, direct, or envelope");
    }
    ojson j;
    j["n"] = m.n;
    j["T"] = m.T;
    j["mu"] = mu_json(m.mu);
    j["method"] = method;
    j["value"] = {res.value.real(), res.value.imag()};
    j["tail_bound"] = res.tailBound;
    out << j.dump() << "\n";
    if (!m.outputPath.empty()) write_text_file(m.outputPath + ".json", j.dump(2) + "\n");
    return 0;
}

inline int run_spectrum(const ExperimentManifest& m, std::ostream& out) {
    require(m.n >= 2, "--n must be at least 2");
    const auto types = enumerate_types(m.n, false);
    std::string jsonl;
    for (const auto& t : types) {
        const ExponentProfile p = exponent_profile(t);
        ojson j;
        j["n"] = t.n;
        ojson blocks = ojson::array();
        for (const auto& [d, f] : t.blocks) blocks.push_back({d, f});
        j["blocks"] = blocks;
        j["tags"] = t.tag().empty() ? ojson::array() : ojson::array({t.tag()});
        j["re_bound"] = p.reMax.str();
        j["coincidence"] = p.coincidence.str();
        j["supnorm_exp"] = p.supnormExp.str();
        j["avg_supnorm_exp"] = p.avgSupnormExp.str();
        j["cover_exp"] = p.coverExp;
        jsonl += j.dump() + "\n";
    }
    out << jsonl;
    if (!m.outputPath.empty()) write_text_file(m.outputPath + ".jsonl", jsonl);
    return 0;
}

inline int run_optimize(const ExperimentManifest& m, std::ostream& out) {
    require(m.theorem == 1 || m.theorem == 2, "--theorem must be 1 or 2");
    OptimizationResult r;
    if (m.theorem == 1) r = (m.n <= 4) ? small_rank_delta(m.n) : optimize_theorem1(m.n);
    else r = optimize_theorem2(m.n);
    ojson j;
    j["n"] = r.n;
    j["alpha_star"] = r.alphaStar;
    j["error_exponent"] = r.errorExponent;
    j["delta"] = r.deltaGain;
    j["witness"] = r.argmaxWitness;
    j["method"] = r.method;
    j["discrepancy"] = r.discrepancy;
    if (r.exact) {
        j["alpha_star_exact"] = r.alphaStarExact.str();
        j["error_exponent_exact"] = r.errorExponentExact.str();
    }
    if (r.reducedCandidateCaveat) j["reduced_candidate_caveat"] = true;
    out << j.dump() << "\n";
    if (!m.outputPath.empty()) write_text_file(m.outputPath + ".json", j.dump(2) + "\n");
    return 0;
}

inline int run_baselines(const ExperimentManifest& m, std::ostream& out) {
    require(m.n >= 2, "--n must be at least 2");
    std::string csv = "n,drs,gny,heuristic,thm1,thm2\n";
    std::string jsonl;
    for (int k = 2; k <= m.n; ++k) {
        const BaselineGains b = baselines(k);
        const bool h1 = std::isfinite(b.thm1), h2 = std::isfinite(b.thm2);
        csv += std::to_string(k) + "," + b.drs.str() + "," + b.gny.str() + "," + b.heuristic.str() + "," +
               (h1 ? format_double(b.thm1) : "") + "," + (h2 ? format_double(b.thm2) : "") + "\n";
        ojson j;
        j["n"] = k;
        j["drs"] = b.drs.str();
        j["gny"] = b.gny.str();
        j["heuristic"] = b.heuristic.str();
        j["thm1"] = h1 ? ojson(b.thm1) : ojson(nullptr);
        j["thm2"] = h2 ? ojson(b.thm2) : ojson(nullptr);
        jsonl += j.dump() + "\n";
    }
    out << csv;
    if (!m.outputPath.empty()) {
        write_text_file(m.outputPath + ".csv", csv);
        write_text_file(m.outputPath + ".jsonl", jsonl);
    }
    return 0;
}

}  // namespace detail

inline int run(const ExperimentManifest& m, std::ostream& out) {
    switch (m.command) {
        case Command::COUNT: return detail::run_count(m, out);
        case Command::SCAN: return detail::run_scan(m, out);
        case Command::FIT: return detail::run_fit(m, out);
        case Command::CONSTANT: return detail::run_constant(m, out);
        case Command::TRANSFORM: return detail::run_transform(m, out);
        case Command::SPECTRUM: return detail::run_spectrum(m, out);
        case Command::OPTIMIZE: return detail::run_optimize(m, out);
        case Command::BASELINES: return detail::run_baselines(m, out);
    }
    throw ManifestError("unhandled command");
}

}  // namespace latball
