#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "latball/driver.hpp"

using namespace latball;
namespace fs = std::filesystem;

namespace {

// self-removing scratch directory under the system temp root
struct TempDir {
    fs::path path;
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path = fs::temp_directory_path() / ("latball-test-" + std::to_string(rng()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::vector<ojson> parse_jsonl(const std::string& text) {
    std::vector<ojson> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) rows.push_back(ojson::parse(line));
    return rows;
}

}  // namespace

TEST_CASE("command names parse case-insensitively") {
    CHECK(parse_command("count") == Command::COUNT);
    CHECK(parse_command("Scan") == Command::SCAN);
    CHECK(parse_command("BASELINES") == Command::BASELINES);
    CHECK_THROWS_AS(parse_command("bogus"), ManifestError);
}

TEST_CASE("canonical cache keys name the ball, not the execution") {
    const auto spec = BallSpec::identity(2, Rational(4));
    CHECK(canonical_ball_key(spec) == "ball-v1;n=2;t2=4;base=identity");
    CHECK(canonical_ball_key(BallSpec::identity(3, Rational(9, 2))) ==
          "ball-v1;n=3;t2=9/2;base=identity");
    BallSpec gen = spec;
    gen.identityBase = false;
    gen.z = Eigen::MatrixXd::Identity(2, 2);
    gen.w = Eigen::MatrixXd::Identity(2, 2);
    CHECK(canonical_ball_key(gen) != canonical_ball_key(spec));
}

TEST_CASE("cache entries survive a store/lookup roundtrip") {
    TempDir tmp;
    CountCache cache(tmp.path);
    CachedCount e;
    e.key = "ball-v1;n=2;t2=7;base=identity";
    e.count = 42;
    e.method = "row_recursive";
    e.borderline = 1;
    e.seconds = "0.123456";
    cache.store(e);

    const auto hit = cache.lookup(e.key);
    REQUIRE(hit.has_value());
    CHECK(hit->count == 42);
    CHECK(hit->method == "row_recursive");
    CHECK(hit->borderline == 1);
    CHECK(hit->seconds == "0.123456");  // byte-replayed, never recomputed
    CHECK_FALSE(cache.lookup("ball-v1;n=2;t2=8;base=identity").has_value());
    CHECK(cache.load_all().size() == 1);
}

TEST_CASE("tampered cache entries are rejected by checksum") {
    TempDir tmp;
    CountCache cache(tmp.path);
    CachedCount e;
    e.key = "ball-v1;n=2;t2=7;base=identity";
    e.count = 42;
    e.method = "row_recursive";
    e.borderline = 0;
    e.seconds = "0.000001";
    cache.store(e);

    fs::path entry;
    for (const auto& de : fs::directory_iterator(tmp.path)) entry = de.path();
    REQUIRE(!entry.empty());

    auto text = slurp(entry.string());
    const auto pos = text.find("count=42");
    REQUIRE(pos != std::string::npos);
    text[pos + 6] = '9';  // count=92, crc now stale
    {
        std::ofstream f(entry, std::ios::binary | std::ios::trunc);
        f << text;
    }
    CHECK_THROWS_AS(cache.lookup(e.key), ManifestError);

    {
        std::ofstream f(entry, std::ios::binary | std::ios::trunc);
        f << "latball-count-cache-v1\n";  // truncated entry
    }
    CHECK_THROWS_AS(cache.lookup(e.key), ManifestError);
}

TEST_CASE("cache directory resolution favors manifest, then environment") {
    CHECK(resolve_cache_dir("explicit-dir") == fs::path("explicit-dir"));
    setenv("LATBALL_CACHE_DIR", "/tmp/latball-env-cache", 1);
    CHECK(resolve_cache_dir("") == fs::path("/tmp/latball-env-cache"));
    CHECK(resolve_cache_dir("explicit-dir") == fs::path("explicit-dir"));
    unsetenv("LATBALL_CACHE_DIR");
    CHECK(resolve_cache_dir("") == fs::path("latball-cache"));
}

TEST_CASE("scan grids are geometric, integral, and deduplicated") {
    const auto g1 = scan_radii(2.0, 2.2, 5);
    REQUIRE(g1.size() == 2);
    CHECK(g1[0] == Rational(4));
    CHECK(g1[1] == Rational(5));

    const auto g2 = scan_radii(10.0, 100.0, 3);
    REQUIRE(g2.size() == 3);
    CHECK(g2[0] == Rational(100));
    CHECK(g2[1] == Rational(1000));
    CHECK(g2[2] == Rational(10000));

    CHECK(scan_radii(7.0, 7.0, 1).size() == 1);
    CHECK_THROWS_AS(scan_radii(0.0, 5.0, 3), ManifestError);
    CHECK_THROWS_AS(scan_radii(5.0, 4.0, 3), ManifestError);
    CHECK_THROWS_AS(scan_radii(1.0, 2.0, 0), ManifestError);
    CHECK_THROWS_AS(scan_radii(0.3, 0.4, 2), ManifestError);  // every radius rounds below 1
}

TEST_CASE("COUNT emits the fixed row format and honors the method override") {
    TempDir tmp;
    ExperimentManifest m;
    m.command = Command::COUNT;
    m.n = 2;
    m.radiusSq = Rational(2);
    m.radiusSqSet = true;
    m.cacheDir = tmp.sub("cache");
    m.outputPath = tmp.sub("out");

    std::ostringstream os;
    CHECK(run(m, os) == 0);
    CHECK(os.str().rfind("n,radius_sq,count,method,borderline,seconds\n", 0) == 0);
    CHECK(os.str().find("2,2,4,row_recursive,0,") != std::string::npos);

    const auto rows = parse_jsonl(slurp(tmp.sub("out") + ".jsonl"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["n"] == 2);
    CHECK(rows[0]["radius_sq"] == "2");
    CHECK(rows[0]["count"] == 4);

    // independent method on the same ball agrees
    m.method = "naive";
    std::ostringstream os2;
    CHECK(run(m, os2) == 0);
    CHECK(os2.str().find("2,2,4,naive,0,") != std::string::npos);

    // requests without a radius or with a nonpositive one are malformed
    ExperimentManifest bad = m;
    bad.radiusSqSet = false;
    std::ostringstream sink;
    CHECK_THROWS_AS(run(bad, sink), ManifestError);
    bad.radiusSqSet = true;
    bad.radiusSq = Rational(-3);
    CHECK_THROWS_AS(run(bad, sink), ManifestError);
}

TEST_CASE("SCAN output is byte-identical across reruns and worker counts") {
    TempDir tmp;
    ExperimentManifest m;
    m.command = Command::SCAN;
    m.n = 2;
    m.tMin = 3.0;
    m.tMax = 12.0;
    m.tSteps = 4;
    m.workers = 1;
    m.cacheDir = tmp.sub("cache");
    m.outputPath = tmp.sub("a");

    std::ostringstream cold;
    CHECK(run(m, cold) == 0);
    const auto csvA = slurp(tmp.sub("a") + ".csv");
    const auto jsonlA = slurp(tmp.sub("a") + ".jsonl");

    m.workers = 3;
    m.outputPath = tmp.sub("b");
    std::ostringstream warm;
    CHECK(run(m, warm) == 0);
    CHECK(slurp(tmp.sub("b") + ".csv") == csvA);
    CHECK(slurp(tmp.sub("b") + ".jsonl") == jsonlA);
    CHECK(warm.str() == cold.str());

    m.workers = 1;
    m.outputPath = tmp.sub("c");
    std::ostringstream again;
    CHECK(run(m, again) == 0);
    CHECK(slurp(tmp.sub("c") + ".csv") == csvA);
}

TEST_CASE("FIT consumes cached scan rows and reports the error exponent") {
    TempDir tmp;
    ExperimentManifest scan;
    scan.command = Command::SCAN;
    scan.n = 2;
    scan.tMin = 20.0;
    scan.tMax = 100.0;
    scan.tSteps = 5;
    scan.cacheDir = tmp.sub("cache");
    std::ostringstream sink;
    REQUIRE(run(scan, sink) == 0);

    ExperimentManifest fit;
    fit.command = Command::FIT;
    fit.n = 2;
    fit.cacheDir = tmp.sub("cache");
    fit.outputPath = tmp.sub("fit");
    std::ostringstream os;
    CHECK(run(fit, os) == 0);
    CHECK(os.str().rfind("fit: n=2", 0) == 0);

    const auto j = ojson::parse(slurp(tmp.sub("fit") + ".json"));
    CHECK(j["n"] == 2);
    CHECK(j["main_exponent"] == 2);
    CHECK(j["points_used"].size() >= 3);
    const double slope = j["fitted_error_exponent"].get<double>();
    CHECK(std::isfinite(slope));
    CHECK(slope < 1.6);  // error term grows strictly slower than the main term

    // an empty cache cannot support a fit
    ExperimentManifest starved = fit;
    starved.cacheDir = tmp.sub("empty");
    starved.outputPath.clear();
    CHECK_THROWS_AS(run(starved, sink), ManifestError);
}

TEST_CASE("TRANSFORM renders one JSON object per request") {
    TempDir tmp;
    ExperimentManifest m;
    m.command = Command::TRANSFORM;
    m.n = 2;
    m.T = 10.0;
    m.mu = {cplx(0.0, 3.0), cplx(0.0, -3.0)};
    m.method = "envelope";
    m.delta = 0.1;
    m.A = 2.0;
    m.outputPath = tmp.sub("env");

    std::ostringstream os;
    CHECK(run(m, os) == 0);
    const auto j = ojson::parse(os.str());
    CHECK(j["method"] == "envelope");
    const double expect =
        cor1_envelope(2, 10.0, 0.1, SpectralParameter::make(m.mu), 2.0);
    CHECK(j["value"][0].get<double>() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(j["value"][1].get<double>() == 0.0);
    CHECK(j["tail_bound"] == 0.0);
    CHECK(ojson::parse(slurp(tmp.sub("env") + ".json"))["n"] == 2);

    m.method = "";  // defaults to the contour route
    std::ostringstream os2;
    CHECK(run(m, os2) == 0);
    const auto j2 = ojson::parse(os2.str());
    CHECK(j2["method"] == "contour");
    const auto ref = chi_transform_residues(2, 10.0, SpectralParameter::make(m.mu));
    CHECK(j2["value"][0].get<double>() == doctest::Approx(ref.value.real()).epsilon(1e-6));

    ExperimentManifest bad = m;
    bad.mu = {cplx(0.0, 3.0)};
    std::ostringstream sink;
    CHECK_THROWS_AS(run(bad, sink), ManifestError);
    bad.mu.clear();
    CHECK_THROWS_AS(run(bad, sink), ManifestError);
    bad = m;
    bad.method = "quadrature";
    CHECK_THROWS_AS(run(bad, sink), ManifestError);
}

TEST_CASE("SPECTRUM lists every non-constant type once") {
    ExperimentManifest m;
    m.command = Command::SPECTRUM;
    m.n = 4;
    std::ostringstream os;
    CHECK(run(m, os) == 0);
    const auto rows = parse_jsonl(os.str());
    REQUIRE(rows.size() == 10);
    int cuspidal = 0;
    for (const auto& r : rows) {
        CHECK(r["n"] == 4);
        CHECK(r["blocks"].is_array());
        if (!r["tags"].empty() && r["tags"][0] == "CUSPIDAL") {
            ++cuspidal;
            CHECK(r["re_bound"] == "1/2");
            CHECK(r["coincidence"] == "0");
            CHECK(r["supnorm_exp"] == "6");
            CHECK(r["cover_exp"] == 3);
        }
        CHECK(r["tags"] != ojson::array({"CONSTANT"}));
    }
    CHECK(cuspidal == 1);
}

TEST_CASE("OPTIMIZE reports closed forms with exact fields where available") {
    ExperimentManifest m;
    m.command = Command::OPTIMIZE;
    m.theorem = 1;
    m.n = 3;
    std::ostringstream os;
    CHECK(run(m, os) == 0);
    auto j = ojson::parse(os.str());
    CHECK(j["alpha_star_exact"] == "1");
    CHECK(j["delta"] == 1.0);
    CHECK(j["method"] == "rational-crossing");

    m.n = 5;
    std::ostringstream os5;
    CHECK(run(m, os5) == 0);
    j = ojson::parse(os5.str());
    CHECK(std::abs(j["alpha_star"].get<double>() - 5.0 / std::sqrt(77.0)) < 1e-8);
    CHECK(j["discrepancy"].get<double>() <= 1e-6);

    m.theorem = 2;
    m.n = 10;
    std::ostringstream os10;
    CHECK(run(m, os10) == 0);
    j = ojson::parse(os10.str());
    CHECK(j["alpha_star_exact"] == "5/4");
    CHECK(j["error_exponent_exact"] == "355/4");  // 10*9 - 5/4

    m.theorem = 3;
    std::ostringstream sink;
    CHECK_THROWS_AS(run(m, sink), ManifestError);
}

TEST_CASE("BASELINES tabulates gains with blanks where no bound exists") {
    TempDir tmp;
    ExperimentManifest m;
    m.command = Command::BASELINES;
    m.n = 5;
    m.outputPath = tmp.sub("base");
    std::ostringstream os;
    CHECK(run(m, os) == 0);
    CHECK(os.str().rfind("n,drs,gny,heuristic,thm1,thm2\n", 0) == 0);
    CHECK(os.str().find("2,1/3,1/3,2/3,,\n") != std::string::npos);
    CHECK(os.str().find("3,1/4,1/4,1,1,\n") != std::string::npos);

    const auto rows = parse_jsonl(slurp(tmp.sub("base") + ".jsonl"));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0]["thm1"].is_null());
    CHECK(rows[1]["thm1"].get<double>() == doctest::Approx(1.0));
    CHECK(rows[3]["thm1"].get<double>() == doctest::Approx(0.2812945157598474));
    CHECK(rows[3]["thm2"].get<double>() > 0.0);
}

TEST_CASE("command-line binary round-trips the documented examples") {
    // the harness runs from the test binary directory; the driver sits beside it
    const fs::path cli = fs::path("..") / "tools" / "latball";
    if (!fs::exists(cli)) {
        MESSAGE("driver binary not found at ", cli.string(), "; exercised via library calls instead");
        return;
    }
    TempDir tmp;
    const std::string base = cli.string();
    const std::string capture = tmp.sub("stdout.txt");

    auto runCli = [&](const std::string& args) {
        const int rc = std::system((base + " " + args + " > " + capture + " 2> /dev/null").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };

    CHECK(runCli("count --n 2 --radius-sq 2/1 --cache-dir " + tmp.sub("cache")) == 0);
    CHECK(slurp(capture).find("2,2,4,row_recursive") != std::string::npos);

    CHECK(runCli("optimize --theorem 1 --n 5") == 0);
    {
        const auto j = ojson::parse(slurp(capture));
        CHECK(std::abs(j["alpha_star"].get<double>() - 5.0 / std::sqrt(77.0)) < 1e-8);
    }

    CHECK(runCli("spectrum --n 4") == 0);
    CHECK(parse_jsonl(slurp(capture)).size() == 10);

    CHECK(runCli("transform --n 2 --t 10 --mu \"0,1;0,-1\" --method residues") == 0);
    CHECK(slurp(capture).find("\"value\"") != std::string::npos);

    // malformed manifests exit 2: missing radius, then a decimal radius
    CHECK(runCli("count --n 2") == 2);
    CHECK(runCli("count --n 2 --radius-sq 2.25") == 2);
    CHECK(runCli("transform --n 2 --t 10 --mu \"0,1;oops\"") == 2);
}
