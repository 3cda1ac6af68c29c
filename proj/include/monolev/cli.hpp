#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "convolution.hpp"
#include "io.hpp"
#include "markov.hpp"
#include "semigroup.hpp"
#include "verify.hpp"

namespace monolev {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitTolerance = 2, kExitNumerical = 3 };

namespace cli {

inline InversionGrid parse_grid(const std::string& s) {
    InversionGrid g;
    const auto a = s.find(':');
    const auto b = a == std::string::npos ? a : s.find(':', a + 1);
    require(b != std::string::npos, Errc::InvalidArgument, "grid must look like lo:hi:n, got '" + s + "'");
    try {
        std::size_t used = 0;
        g.lo = std::stod(s.substr(0, a));
        g.hi = std::stod(s.substr(a + 1, b - a - 1));
        const long long n = std::stoll(s.substr(b + 1), &used);
        require(used == s.size() - b - 1 && n >= 3, Errc::InvalidArgument, "grid needs n >= 3");
        g.n = static_cast<std::size_t>(n);
    } catch (const std::logic_error&) {
        fail(Errc::InvalidArgument, "grid must look like lo:hi:n, got '" + s + "'");
    }
    require(g.lo < g.hi, Errc::InvalidArgument, "grid needs lo < hi");
    return g;
}

inline std::string time_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

inline void emit(const std::optional<std::string>& out, const std::string& content) {
    if (out)
        write_file_atomic(*out, content);
    else
        std::cout << content;
}

inline void check_times(const std::vector<double>& times) {
    require(!times.empty(), Errc::InvalidArgument, "no times given");
    for (std::size_t i = 0; i < times.size(); ++i) {
        require(std::isfinite(times[i]) && times[i] >= 0.0, Errc::InvalidArgument, "times must be finite and >= 0");
        if (i > 0) require(times[i] >= times[i - 1], Errc::InvalidArgument, "times must be nondecreasing");
    }
}

}  // namespace cli

/// Command-line entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"Monotone convolution semigroups, transition kernels and paths"};
    app.require_subcommand(1);

    std::string pair_file, mu_file, nu_file, grid_spec, suite = "all", config_file, out_dir = ".";
    std::optional<std::string> out;
    std::vector<double> times;
    double t = 1.0, x = 0.0;
    int kmax = 4;
    std::size_t n_paths = 0;
    std::optional<std::uint64_t> seed;
    std::string route = "mixture";

    auto* evolve = app.add_subcommand("evolve", "marginal densities mu_t, one CSV per time");
    evolve->add_option("--pair", pair_file, "pair or config JSON")->required();
    evolve->add_option("--times", times, "comma-separated times")->delimiter(',')->required();
    evolve->add_option("--grid", grid_spec, "lo:hi:n (default: automatic)");
    evolve->add_option("--out-dir", out_dir, "directory for density_t<t>.csv files");

    auto* convolve = app.add_subcommand("convolve", "monotone convolution mu |> nu");
    convolve->add_option("--mu", mu_file, "measure JSON")->required();
    convolve->add_option("--nu", nu_file, "measure JSON")->required();
    convolve->add_option("--out", out, "output prefix for .json and .csv")->required();
    convolve->add_option("--route", route, "mixture or composition")->check(CLI::IsMember({"mixture", "composition"}));

    auto* kern = app.add_subcommand("kernel", "transition kernel delta_x |> mu_t");
    kern->add_option("--pair", pair_file, "pair or config JSON")->required();
    kern->add_option("--t", t, "time")->required();
    kern->add_option("--x", x, "starting point")->required();
    kern->add_option("--out", out, "CSV file (default: stdout)");

    auto* path = app.add_subcommand("path", "classical paths of the process");
    path->add_option("--pair", pair_file, "pair or config JSON")->required();
    path->add_option("--times", times, "comma-separated times")->delimiter(',')->required();
    path->add_option("--n", n_paths, "number of paths (default: config or 100000)");
    path->add_option("--seed", seed, "RNG seed (default: config or 0)");
    path->add_option("--out", out, "CSV file (default: stdout)");

    auto* mom = app.add_subcommand("moments", "contour moments against quadrature of the marginal");
    mom->add_option("--pair", pair_file, "pair or config JSON")->required();
    mom->add_option("--t", t, "time")->required();
    mom->add_option("--kmax", kmax, "highest moment order (<= 16)")->required();
    mom->add_option("--out", out, "CSV file (default: stdout)");

    auto* ver = app.add_subcommand("verify", "run the verification suites");
    std::vector<std::string> suite_names{"all"};
    for (const auto& s : verify_suites()) suite_names.push_back(s);
    ver->add_option("--suite", suite, "suite name")->check(CLI::IsMember(suite_names));
    ver->add_option("--config", config_file, "config JSON with tolerances and seed");
    ver->add_option("--seed", seed, "RNG seed");
    ver->add_option("--out", out, "JSON report file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (*evolve) {
            const RunConfig cfg = load_config(pair_file);
            cli::check_times(times);
            std::optional<InversionGrid> grid = cfg.grid;
            if (!grid_spec.empty()) grid = cli::parse_grid(grid_spec);
            std::filesystem::create_directories(out_dir);
            for (double ti : times) {
                const DiscretizedMeasure mu = ti == 0.0 ? measures::dirac(0.0)
                                              : grid    ? stieltjes_invert(CauchyEvaluator::from_flow(cfg.pair, ti), *grid)
                                                        : marginal(cfg.pair, ti);
                const auto file = std::filesystem::path(out_dir) / ("density_t" + cli::time_label(ti) + ".csv");
                write_file_atomic(file.string(), measure_csv(mu));
            }
        } else if (*convolve) {
            const auto mu = load_measure_file(mu_file), nu = load_measure_file(nu_file);
            const auto res = route == "mixture" ? mono_convolve(mu, nu) : mono_convolve_by_composition(mu, nu);
            write_file_atomic(*out + ".json", measure_to_json(res).dump(2) + "\n");
            write_file_atomic(*out + ".csv", measure_csv(res));
        } else if (*kern) {
            const RunConfig cfg = load_config(pair_file);
            require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
            cli::emit(out, measure_csv(kernel(cfg.pair, t, x)));
        } else if (*path) {
            const RunConfig cfg = load_config(pair_file);
            cli::check_times(times);
            std::mt19937_64 rng(seed ? *seed : cfg.seed);
            const std::size_t n = n_paths ? n_paths : cfg.n_paths;
            cli::emit(out, path_csv(sample_path(cfg.pair, times, n, rng)));
        } else if (*mom) {
            const RunConfig cfg = load_config(pair_file);
            require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
            require(kmax >= 0, Errc::InvalidArgument, "kmax must be >= 0");
            const auto contour = moments_via_contour(cfg.pair, t, kmax);
            const DiscretizedMeasure mu = marginal(cfg.pair, t);
            std::string csv = "k,contour,quadrature,difference\n";
            for (int k = 0; k <= kmax; ++k) {
                const double c = contour[static_cast<std::size_t>(k)], q = moment(mu, k);
                csv += std::to_string(k) + "," + detail::fmt(c) + "," + detail::fmt(q) + "," + detail::fmt(c - q) + "\n";
            }
            cli::emit(out, csv);
        } else if (*ver) {
            Tolerances tol;
            std::uint64_t s = 0;
            std::size_t paths = 100000;
            if (!config_file.empty()) {
                const RunConfig cfg = load_config(config_file);
                tol = cfg.tolerances;
                s = cfg.seed;
                paths = cfg.n_paths;
            }
            if (seed) s = *seed;
            const VerifyReport rep = run_verification(suite, tol, s, paths);
            cli::emit(out, rep.to_json().dump(2) + "\n");
            return rep.passed() ? kExitOk : kExitTolerance;
        }
    } catch (const Error& e) {
        err << e.what() << "\n";
        return is_numerical(e.code()) ? kExitNumerical : kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}

}  // namespace monolev
