// Command-line batch driver. Every experiment is a single subcommand run;
// exact counts are cached under --cache-dir (or $LATBALL_CACHE_DIR) and
// replayed byte-identically on repeat runs. Exit codes: 0 success,
// 2 invalid manifest, 3 numeric failure.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latball/driver.hpp"

namespace {

std::vector<latball::cplx> parse_mu(const std::string& text) {
    std::vector<latball::cplx> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        const auto comma = item.find(',');
        if (comma == std::string::npos)
            throw latball::ManifestError("--mu entries must be semicolon-separated re,im pairs");
        std::size_t p1 = 0, p2 = 0;
        const double re = std::stod(item.substr(0, comma), &p1);
        const double im = std::stod(item.substr(comma + 1), &p2);
        if (p1 != comma || p2 != item.size() - comma - 1)
            throw latball::ManifestError("--mu: malformed coordinate '" + item + "'");
        out.emplace_back(re, im);
    }
    if (out.empty()) throw latball::ManifestError("--mu must list at least one re,im pair");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice ball counting laboratory"};
    app.require_subcommand(1);

    latball::ExperimentManifest m;
    std::string radiusSqText, muText;

    auto addOut = [&](CLI::App* sub) {
        sub->add_option("--out", m.outputPath, "artifact stem; writes <stem>.csv/.jsonl/.json as applicable");
    };
    auto addCache = [&](CLI::App* sub) {
        sub->add_option("--cache-dir", m.cacheDir, "count cache directory (default $LATBALL_CACHE_DIR)");
    };

    auto* cCount = app.add_subcommand("count", "exact ball count at one squared radius");
    cCount->add_option("--n", m.n, "matrix dimension")->check(CLI::Range(2, 16));
    cCount->add_option("--radius-sq", radiusSqText, "exact squared radius, integer or p/q")->required();
    cCount->add_option("--method", m.method, "force row_recursive or naive");
    cCount->add_option("--workers", m.workers, "threads for the row recursion")->check(CLI::Range(1, 64));
    cCount->add_option("--tol", m.tol, "certification margin for non-identity bases");
    addOut(cCount);
    addCache(cCount);

    auto* cScan = app.add_subcommand("scan", "exact counts over a geometric T grid");
    cScan->add_option("--n", m.n, "matrix dimension")->check(CLI::Range(2, 16));
    cScan->add_option("--t-min", m.tMin, "smallest T");
    cScan->add_option("--t-max", m.tMax, "largest T");
    cScan->add_option("--t-steps", m.tSteps, "grid points")->check(CLI::Range(1, 10000));
    cScan->add_option("--method", m.method, "force row_recursive or naive");
    cScan->add_option("--workers", m.workers, "parallel T jobs")->check(CLI::Range(1, 64));
    cScan->add_option("--tol", m.tol, "certification margin for non-identity bases");
    addOut(cScan);
    addCache(cScan);

    auto* cFit = app.add_subcommand("fit", "fit the error exponent from cached counts");
    cFit->add_option("--n", m.n, "matrix dimension")->check(CLI::Range(2, 16));
    cFit->add_option("--precision-bits", m.precisionBits, "main-constant working precision")
        ->check(CLI::Range(24, 1024));
    addOut(cFit);
    addCache(cFit);

    auto* cConst = app.add_subcommand("constant", "main-term constant c_n");
    cConst->add_option("--n", m.n, "matrix dimension")->check(CLI::Range(2, 64));
    cConst->add_option("--precision-bits", m.precisionBits, "working precision")->check(CLI::Range(24, 1024));
    addOut(cConst);

    auto* cTrans = app.add_subcommand("transform", "spherical transform of the ball indicator");
    cTrans->add_option("--n", m.n, "matrix dimension")->check(CLI::Range(2, 16));
    cTrans->add_option("--t", m.T, "radius T");
    cTrans->add_option("--mu", muText, "spectral coordinates, semicolon-separated re,im pairs")->required();
    cTrans->add_option("--method", m.method, "contour (default), residues, direct, or envelope");
    cTrans->add_option("--delta", m.delta, "envelope smoothing width");
    cTrans->add_option("--A", m.A, "envelope decay order");
    cTrans->add_option("--tol", m.tol, "spectral parameter validation tolerance");
    addOut(cTrans);

    auto* cSpec = app.add_subcommand("spectrum", "non-constant spectral types and exponent profiles");
    cSpec->add_option("--n", m.n, "matrix dimension")->check(CLI::Range(2, 24));
    addOut(cSpec);

    auto* cOpt = app.add_subcommand("optimize", "exponent optimization for one theorem");
    cOpt->add_option("--theorem", m.theorem, "1 or 2")->required()->check(CLI::Range(1, 2));
    cOpt->add_option("--n", m.n, "matrix dimension")->check(CLI::Range(3, 100000));
    addOut(cOpt);

    auto* cBase = app.add_subcommand("baselines", "literature exponent gains up to n");
    cBase->add_option("--n", m.n, "largest dimension tabulated")->check(CLI::Range(2, 10000));
    addOut(cBase);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cCount) m.command = latball::Command::COUNT;
        else if (*cScan) m.command = latball::Command::SCAN;
        else if (*cFit) m.command = latball::Command::FIT;
        else if (*cConst) m.command = latball::Command::CONSTANT;
        else if (*cTrans) m.command = latball::Command::TRANSFORM;
        else if (*cSpec) m.command = latball::Command::SPECTRUM;
        else if (*cOpt) m.command = latball::Command::OPTIMIZE;
        else if (*cBase) m.command = latball::Command::BASELINES;
        if (!radiusSqText.empty()) {
            m.radiusSq = latball::Rational::parse(radiusSqText);
            m.radiusSqSet = true;
        }
        if (!muText.empty()) m.mu = parse_mu(muText);
        return latball::run(m, std::cout);
    } catch (const latball::ManifestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const latball::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
