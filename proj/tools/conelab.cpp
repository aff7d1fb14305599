#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conelab/beta_harmonic.hpp"
#include "conelab/cone_spectrum.hpp"
#include "conelab/errors.hpp"
#include "conelab/excess.hpp"
#include "conelab/foliation.hpp"
#include "conelab/format.hpp"
#include "conelab/verify.hpp"

using namespace conelab;

namespace {

struct Options {
    int p = 3;
    int q = 3;
    int l = 0;
    std::string out = "conelab_out";
    std::uint64_t seed = 7;
    std::string format = "json";
};

// Errors caused by the request rather than by the numerics.
bool is_domain_error(const Error& e)
{
    for (const char* n : {"InvalidArgument", "NotStrictlyStable", "OutOfDomain", "UnknownMode", "UnsupportedDimension",
                          "PreconditionViolated", "InsufficientScales", "EmptyIntersection"})
        if (e.name() == n) return true;
    return false;
}

std::string dump(const nlohmann::json& j)
{
    return j.dump(2) + "\n";
}

std::string write(const Options& o, const std::string& name, const std::string& contents)
{
    const std::string path = (std::filesystem::path(o.out) / name).string();
    write_file_atomic(path, contents);
    return path;
}

ModeRequest parse_mode(const std::string& s)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4) throw InvalidArgument("mode must be j:degree:coeff[:index], got " + s);
    try {
        ModeRequest m{std::stoi(parts[0]), std::stoi(parts[1]), std::stod(parts[2]), 0};
        if (parts.size() == 4) m.index = std::stoi(parts[3]);
        return m;
    } catch (const std::logic_error&) {
        throw InvalidArgument("mode must be j:degree:coeff[:index], got " + s);
    }
}

int sign_of(const std::string& s)
{
    if (s == "+" || s == "plus" || s == "1") return 1;
    if (s == "-" || s == "minus" || s == "-1") return -1;
    throw InvalidArgument("sign must be + or -");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical laboratory for cylindrical minimal cones and their foliations"};
    app.set_config("--config", "", "Key-value config file; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--p", o.p, "Dimension of the first sphere factor")->capture_default_str();
    app.add_option("--q", o.q, "Dimension of the second sphere factor")->capture_default_str();
    app.add_option("--l", o.l, "Number of Euclidean directions")->capture_default_str();
    app.add_option("--out", o.out, "Output directory")->envname("CONELAB_OUT")->capture_default_str();
    app.add_option("--seed", o.seed, "Seed of every randomized computation")->capture_default_str();
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    int jmax = 5;
    auto* spectrum = app.add_subcommand("spectrum", "Link spectrum and growth exponents");
    spectrum->add_option("--jmax", jmax, "Number of distinct eigenvalues")->capture_default_str();

    std::string sign = "+";
    double s_max = 1e4;
    auto* foliation = app.add_subcommand("foliation", "Leaf profile of the foliation");
    foliation->add_option("--sign", sign, "Side of the cone (+ or -)")->capture_default_str();
    foliation->add_option("--smax", s_max, "Arclength of the integrated profile")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "Tail fit of a leaf as a graph over the cone");
    fit->add_option("--sign", sign, "Side of the cone (+ or -)")->capture_default_str();
    fit->add_option("--smax", s_max, "Arclength of the integrated profile")->capture_default_str();

    double beta = 0.0;
    int beta_j = 1, q_max = 4;
    auto* beta_cmd = app.add_subcommand("beta-basis", "Orthonormal beta-harmonic polynomial basis");
    beta_cmd->add_option("--beta", beta, "Weight exponent; 0 takes beta_j of the cone");
    beta_cmd->add_option("--j", beta_j, "Spectral index supplying beta")->capture_default_str();
    beta_cmd->add_option("--qmax", q_max, "Highest degree")->capture_default_str();

    double lambda = 0.0, R = 10.0, leaf_t = 0.0;
    auto* excess_cmd = app.add_subcommand("excess", "Excess of a leaf relative to a reference leaf");
    excess_cmd->add_option("--lambda", lambda, "Parameter of the reference leaf")->capture_default_str();
    excess_cmd->add_option("--R", R, "Ball radius")->capture_default_str();
    excess_cmd->add_option("--t", leaf_t, "Parameter of the measured leaf (0 is the cone)")->capture_default_str();

    std::uint64_t trials = 100000;
    auto* annulus = app.add_subcommand("three-annulus", "Randomized discrete three-annulus implication");
    annulus->add_option("--trials", trials, "Number of random instances")->capture_default_str();

    std::vector<std::string> modes{"1:0:1", "2:0:1"};
    double R0 = 1e2, ratio = 10.0, eps = 1.0;
    int count = 5;
    auto* dichotomy = app.add_subcommand("dichotomy", "Growth and decay of the linear excess across scales");
    dichotomy->add_option("--mode", modes, "Mode j:degree:coeff[:index], repeatable")->capture_default_str();
    dichotomy->add_option("--R0", R0, "First scale")->capture_default_str();
    dichotomy->add_option("--ratio", ratio, "Scale ratio L")->capture_default_str();
    dichotomy->add_option("--count", count, "Number of scales")->capture_default_str();
    dichotomy->add_option("--eps", eps, "Doubling exponent margin")->capture_default_str();

    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "Run the verification suites");
    verify->add_option("--suite", suite, "spectrum, foliation, beta, curvature, excess or all")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const ConeSpec cone(o.p, o.q, o.l);
        const bool csv = o.format == "csv";

        if (*spectrum) {
            const SpectralTable t = spectral_table(cone, jmax);
            std::cout << write(o, csv ? "spectrum.csv" : "spectrum.json", csv ? to_csv(t) : dump(to_json(t))) << "\n";
        } else if (*foliation) {
            const ProfileCurve c = solve_profile(cone, sign_of(sign), s_max);
            const std::string stem = std::string("foliation_") + (c.sign() > 0 ? "plus" : "minus");
            std::string body;
            if (csv) {
                body = to_csv(c);
            } else {
                nlohmann::json samples = nlohmann::json::array();
                for (const ProfileSample& x : c.samples())
                    samples.push_back({{"s", x.s}, {"u", x.u}, {"v", x.v}, {"theta", x.theta}, {"residual", x.residual}});
                body = dump({{"cone", {{"p", cone.p}, {"q", cone.q}}}, {"sign", c.sign()}, {"gamma", c.gamma()},
                             {"max_residual", c.max_residual()}, {"samples", samples}});
            }
            std::cout << write(o, stem + (csv ? ".csv" : ".json"), body) << "\n";
        } else if (*fit) {
            const ProfileCurve c = solve_profile(cone, sign_of(sign), s_max);
            const SpectralTable t = spectral_table(cone, 1);
            nlohmann::json j = to_json(fit_leaf_asymptotics(c, t));
            j["gamma"] = t.gamma();
            std::cout << write(o, std::string("fit_") + (c.sign() > 0 ? "plus" : "minus") + ".json", dump(j)) << "\n";
        } else if (*beta_cmd) {
            const double b = beta > 0.0 ? beta : spectral_table(cone, beta_j).entry(beta_j).beta;
            const std::vector<BetaPoly> basis = beta_basis(b, cone.l, q_max);
            std::string body;
            if (csv) {
                std::ostringstream os;
                os << "element,degree,a,m,num,den,normalization\n";
                for (std::size_t i = 0; i < basis.size(); ++i)
                    for (const auto& [mono, c] : basis[i].raw().terms) {
                        os << i << ',' << basis[i].degree() << ',' << mono.a << ',';
                        for (std::size_t k = 0; k < mono.m.size(); ++k) os << (k ? " " : "") << mono.m[k];
                        os << ',' << boost::multiprecision::numerator(c) << ',' << boost::multiprecision::denominator(c)
                           << ',' << fmt_real(basis[i].normalization()) << '\n';
                    }
                body = os.str();
            } else {
                nlohmann::json elems = nlohmann::json::array();
                for (const BetaPoly& p : basis) elems.push_back(to_json(p));
                body = dump({{"beta", b}, {"l", cone.l}, {"q_max", q_max}, {"elements", elems}});
            }
            std::cout << write(o, csv ? "beta_basis.csv" : "beta_basis.json", body) << "\n";
        } else if (*excess_cmd) {
            const Foliation fol(cone);
            const TestSurface M = TestSurface::leaf(fol, leaf_t, R);
            const double d = trap_distance(M, lambda, Region::ball(R));
            const double E = excess(M, lambda, R);
            const nlohmann::json j{{"t", leaf_t}, {"lambda", lambda}, {"R", R}, {"gamma", fol.gamma()},
                                   {"trap_distance", d}, {"excess", E}};
            std::cout << write(o, "excess.json", dump(j)) << "\n" << "excess " << fmt_real(E) << "\n";
        } else if (*annulus) {
            std::string lines;
            std::uint64_t failures = 0, premises = 0;
            for (std::uint64_t i = 0; i < trials; ++i) {
                const ThreeAnnulusInstance x = random_three_annulus(derive_seed(o.seed, i));
                failures += !x.result.holds();
                premises += x.result.premise;
                lines += to_json(x).dump() + "\n";
            }
            write(o, "three_annulus.jsonl", lines);
            const nlohmann::json summary{{"seed", o.seed}, {"trials", trials}, {"premises", premises}, {"failures", failures}};
            std::cout << write(o, "three_annulus_summary.json", dump(summary)) << "\n" << summary.dump() << "\n";
            return failures == 0 ? 0 : 1;
        } else if (*dichotomy) {
            std::vector<ModeRequest> spec;
            for (const std::string& m : modes) spec.push_back(parse_mode(m));
            std::vector<double> radii;
            for (int i = 0; i < count; ++i) radii.push_back(R0 * std::pow(ratio, i));
            const DichotomyReport rep = dichotomy_experiment(synthesize_field(cone, spec), radii, eps);
            std::cout << write(o, csv ? "dichotomy.csv" : "dichotomy.json", csv ? to_csv(rep) : dump(to_json(rep)))
                      << "\n";
        } else if (*verify) {
            std::vector<std::string> suites;
            if (suite == "all") suites = suite_names();
            else suites.push_back(suite);
            nlohmann::json reports = nlohmann::json::array();
            std::string first;
            for (const std::string& s : suites) {
                check_names(s);
                const SuiteReport r = run_suite(s, o.seed);
                for (const CheckResult& c : r.checks)
                    std::cout << (c.passed ? "pass " : "FAIL ") << s << "." << c.name << "\n";
                if (first.empty()) first = r.first_failure();
                reports.push_back(to_json(r));
            }
            const nlohmann::json j{{"seed", o.seed}, {"suite", suite}, {"passed", first.empty()}, {"suites", reports}};
            std::cout << write(o, "verify_" + suite + ".json", dump(j)) << "\n";
            if (!first.empty()) {
                std::cerr << "failed: " << first << "\n";
                return 1;
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
        return is_domain_error(e) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
