// Command-line front end: run, study, constants, compare.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wpadapt/problem_config.hpp"
#include "wpadapt/wpadapt.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Common {
    std::string problem_file;
    double p = 2.0;
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
    std::string out;
    double k_exponent = 0.75;
    std::size_t reference = 0;
    std::size_t threads = 0;
};

wpadapt::HarnessOptions harness_options(const Common& common) {
    wpadapt::HarnessOptions options;
    options.k_exponent = common.k_exponent;
    if (common.reference > 0) {
        options.reference_resolution = common.reference;
    }
    if (common.threads > 0) {
        options.threads = common.threads;
    }
    return options;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            parts.push_back(item);
        }
    }
    return parts;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& item : split(text)) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || v <= 0) {
            throw wpadapt::ConfigError("invalid budget '" + item + "'");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) {
        throw wpadapt::ConfigError("empty budget list");
    }
    return out;
}

void check_common(const Common& common) {
    if (!(common.p >= 1.0)) {
        throw wpadapt::ConfigError("--p must be at least 1");
    }
    if (common.reps < 2) {
        throw wpadapt::ConfigError("--reps must be at least 2");
    }
    if (!(common.k_exponent > 2.0 / 3.0 && common.k_exponent < 1.0)) {
        throw wpadapt::ConfigError("--k-exponent must lie in (2/3, 1)");
    }
}

void emit(const Common& common, const std::string& command, const std::vector<wpadapt::StudyRow>& rows) {
    std::ostringstream text;
    text << "# wpadapt " << wpadapt::kVersion << " command=" << command << " problem=" << common.problem_file
         << " p=" << common.p << " reps=" << common.reps << " seed=" << common.seed
         << " k_exponent=" << common.k_exponent << '\n';
    wpadapt::write_csv(text, rows);
    if (common.out.empty()) {
        std::cout << text.str();
        return;
    }
    std::ofstream file(common.out);
    if (!file) {
        throw wpadapt::ConfigError("cannot write '" + common.out + "'");
    }
    file << text.str();
}

void add_common(CLI::App* cmd, Common& common, bool with_reps) {
    cmd->add_option("--problem", common.problem_file, "Problem configuration (JSON)")->required();
    cmd->add_option("--p", common.p, "Error exponent p >= 1");
    if (with_reps) {
        cmd->add_option("--reps", common.reps, "Monte Carlo replications");
        cmd->add_option("--seed", common.seed, "Base seed");
        cmd->add_option("--out", common.out, "CSV output file (default stdout)");
        cmd->add_option("--k-exponent", common.k_exponent, "Exponent of the coarse grid rule k = ceil(n^e)");
        cmd->add_option("--reference", common.reference, "Reference grid size (default max(4096, n^2))");
        cmd->add_option("--threads", common.threads, "Worker threads (default: hardware)");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive Wagner-Platen strong approximation of scalar SDEs at t = 1"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(wpadapt::kVersion));

    Common common;
    std::string scheme = "star_star";
    std::size_t n = 64;
    std::string n_list = "16,32,64,128";
    std::string scheme_list = "equi,star,star_star,fixed,milstein";
    bool use_mc = false;
    std::size_t mc_k = 256;
    std::size_t mc_reps = 10000;

    auto* run = app.add_subcommand("run", "Estimate e_p for one scheme at one budget");
    add_common(run, common, true);
    run->add_option("--scheme", scheme, "Scheme id")->required();
    run->add_option("--n", n, "Budget / grid size")->required();

    auto* study = app.add_subcommand("study", "Error over a list of budgets with rate fit");
    add_common(study, common, true);
    study->add_option("--scheme", scheme, "Scheme id")->required();
    study->add_option("--n", n_list, "Comma-separated increasing budgets");

    auto* constants = app.add_subcommand("constants", "Asymptotic constants as JSON");
    add_common(constants, common, false);
    constants->add_flag("--mc", use_mc, "Monte Carlo estimate instead of closed form");
    constants->add_option("--k", mc_k, "Grid size of the Monte Carlo weight estimate");
    constants->add_option("--reps", mc_reps, "Monte Carlo replications");
    constants->add_option("--seed", common.seed, "Base seed");

    auto* compare = app.add_subcommand("compare", "Several schemes at a matched budget on shared paths");
    add_common(compare, common, true);
    compare->add_option("--n", n, "Budget / grid size")->required();
    compare->add_option("--schemes", scheme_list, "Comma-separated scheme ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const auto problem = wpadapt::load_problem(common.problem_file);
        if (run->parsed()) {
            check_common(common);
            const auto id = wpadapt::parse_scheme_id(scheme);
            wpadapt::StudyRow row;
            row.scheme = id;
            row.n = n;
            row.e_p = wpadapt::estimate_error(id, problem, common.p, n, common.reps, common.seed,
                                              harness_options(common));
            row.n_times_e = row.e_p.mean_cost * row.e_p.e_p_hat;
            row.constant_target = wpadapt::target_constant(id, problem, common.p);
            emit(common, "run", {row});
        } else if (study->parsed()) {
            check_common(common);
            const auto id = wpadapt::parse_scheme_id(scheme);
            const auto budgets = parse_sizes(n_list);
            const auto result =
                wpadapt::convergence_study(id, problem, common.p, budgets, common.reps, common.seed,
                                           harness_options(common));
            emit(common, "study", result.rows);
            std::cerr << "slope " << result.fit.slope_raw << " guarded " << result.fit.slope_guarded
                      << (result.fit.dropped_smallest ? " (smallest n dropped)" : "") << '\n';
        } else if (constants->parsed()) {
            if (!(common.p >= 1.0)) {
                throw wpadapt::ConfigError("--p must be at least 1");
            }
            nlohmann::json out;
            wpadapt::ConstantSet set;
            if (use_mc) {
                if (mc_k < 2 || mc_reps < 2) {
                    throw wpadapt::ConfigError("--k and --reps must be at least 2");
                }
                set = wpadapt::mc_constants(wpadapt::coefficients_of(problem), common.p, mc_k, mc_reps, common.seed);
                out["se"] = {{"c_star_star", set.se_star_star},
                             {"c_star", set.se_star},
                             {"c_2", set.se_2},
                             {"c_equi", set.se_equi}};
            } else {
                const auto analytic = wpadapt::analytic_constants(problem, common.p);
                if (!analytic) {
                    throw wpadapt::ConfigError("no closed-form constants for this problem type; use --mc");
                }
                set = *analytic;
            }
            out["c_star_star"] = set.c_star_star;
            out["c_star"] = set.c_star;
            out["c_2"] = set.c_2;
            out["c_equi"] = set.c_equi;
            out["m_p"] = set.m_p;
            std::cout << out.dump(2) << '\n';
        } else if (compare->parsed()) {
            check_common(common);
            std::vector<wpadapt::SchemeId> ids;
            for (const auto& name : split(scheme_list)) {
                ids.push_back(wpadapt::parse_scheme_id(name));
            }
            if (ids.empty()) {
                throw wpadapt::ConfigError("empty scheme list");
            }
            const auto rows = wpadapt::compare_schemes(problem, common.p, n, common.reps, common.seed, ids,
                                                       harness_options(common));
            emit(common, "compare", rows);
        }
    } catch (const wpadapt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const wpadapt::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const wpadapt::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
