// Command-line front end: homogeneity tests on delimited files, Monte Carlo
// scenario grids, and numerical verification of the chi-square limit algebra.
//
// Exit codes: 0 computed, 1 verification check failed, 2 input/validation
// error, 3 solver non-convergence.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jelk/baselines.hpp"
#include "jelk/data.hpp"
#include "jelk/dataset.hpp"
#include "jelk/gini.hpp"
#include "jelk/jackknife.hpp"
#include "jelk/jel.hpp"
#include "jelk/simulate.hpp"
#include "jelk/stats.hpp"
#include "jelk/wilks.hpp"

using nlohmann::json;

namespace {

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

std::string p_display(double p) {
    if (p < 1e-15)
        return "< 1e-15";
    return fmt(p);
}

double p_machine(double p) {
    return p > 0.0 ? p : std::numeric_limits<double>::denorm_min();
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty() || !out.empty())
        out.push_back(cur);
    return out;
}

// "0.25" or "1/3"
double parse_fraction(const std::string& tok) {
    const auto slash = tok.find('/');
    try {
        size_t pos = 0;
        if (slash == std::string::npos) {
            double x = std::stod(tok, &pos);
            if (pos != tok.size())
                throw std::invalid_argument(tok);
            return x;
        }
        double num = std::stod(tok.substr(0, slash), &pos);
        if (pos != slash)
            throw std::invalid_argument(tok);
        double den = std::stod(tok.substr(slash + 1), &pos);
        if (pos != tok.size() - slash - 1 || den == 0.0)
            throw std::invalid_argument(tok);
        return num / den;
    } catch (const std::exception&) {
        throw jelk::ValidationError("cannot parse number '" + tok + "'");
    }
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("JELK_SEED");
    if (!v || !*v)
        return std::nullopt;
    char* end = nullptr;
    unsigned long long x = std::strtoull(v, &end, 10);
    if (*end != '\0')
        throw jelk::ValidationError("JELK_SEED is not an integer: " + std::string(v));
    return static_cast<std::uint64_t>(x);
}

struct TestArgs {
    std::string file;
    std::string label_col;
    std::string cols;
    std::string method = "jel";
    double alpha = 0.05;
    int permutations = 199;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_path;
    bool json_out = false;
};

int run_test(const TestArgs& a) {
    jelk::DatasetOptions opt;
    opt.label_col = a.label_col;
    if (!a.cols.empty())
        opt.cols = split_commas(a.cols);
    jelk::LoadedDataset ds = jelk::load_dataset(a.file, opt);
    jelk::PooledData pooled = jelk::build_pooled(ds.samples);
    if (!(a.alpha > 0.0 && a.alpha < 1.0))
        throw jelk::ValidationError("--alpha must be in (0,1)");

    std::uint64_t seed = a.seed;
    if (!a.seed_given) {
        if (auto e = env_seed())
            seed = *e;
    }

    std::vector<std::string> methods;
    if (a.method == "all")
        methods = {"jel", "energy", "ad", "kw"};
    else
        methods = {a.method};

    std::ostringstream human;
    human << "dataset: " << a.file << " (" << ds.n_rows << " rows, "
          << ds.feature_names.size() << " feature"
          << (ds.feature_names.size() == 1 ? "" : "s") << ":";
    for (const auto& f : ds.feature_names)
        human << ' ' << f;
    human << "; label '" << ds.label_name << "', " << pooled.k << " groups)\n";
    for (int g = 0; g < pooled.k; ++g)
        human << "  group " << pooled.samples[g].label << ": n=" << pooled.group_size[g]
              << "\n";
    human << "alpha: " << fmt(a.alpha) << "\n\n";

    json report;
    report["dataset"] = {{"path", a.file},
                         {"rows", ds.n_rows},
                         {"features", ds.feature_names},
                         {"label", ds.label_name}};
    for (int g = 0; g < pooled.k; ++g)
        report["dataset"]["groups"].push_back(
            {{"label", pooled.samples[g].label}, {"n", pooled.group_size[g]}});
    report["alpha"] = a.alpha;
    report["results"] = json::array();

    const bool need_dm =
        std::find(methods.begin(), methods.end(), "jel") != methods.end() ||
        std::find(methods.begin(), methods.end(), "energy") != methods.end();
    jelk::DistanceMatrix dm;
    if (need_dm)
        dm = jelk::pairwise_distances(pooled.points);

    Eigen::VectorXd reduced;
    if (std::find(methods.begin(), methods.end(), "ad") != methods.end() ||
        std::find(methods.begin(), methods.end(), "kw") != methods.end()) {
        reduced = pooled.dim == 1 ? Eigen::VectorXd(pooled.points.col(0))
                                  : jelk::norm_reduction(pooled.points);
        if (pooled.dim > 1)
            human << "note: rank tests use the Euclidean norm of each row (d > 1)\n\n";
    }

    int rc = 0;
    for (const auto& m : methods) {
        json entry;
        if (m == "jel") {
            entry["method"] = "JEL-S";
            try {
                jelk::PseudoValues pv = jelk::all_pseudo_values(pooled, dm);
                jelk::JelSolution sol = jelk::solve_system(pv, pooled.alpha_hat);
                if (!sol.converged)
                    throw jelk::SolverError("estimating equations did not converge");
                jelk::TestResult r;
                r.statistic = sol.neg2logR;
                r.df = pooled.k - 1;
                r.p_value = jelk::chi_square_sf(r.statistic, r.df);
                r.alpha = a.alpha;
                r.reject = r.p_value < a.alpha;
                const double max_resid = sol.residuals.cwiseAbs().maxCoeff();
                human << "JEL-S: statistic " << fmt(r.statistic) << " df " << r.df
                      << " p-value " << p_display(r.p_value) << "  ["
                      << (r.reject ? "reject" : "fail to reject") << "]\n"
                      << "  solver: converged, " << sol.iterations
                      << " evaluations, max residual " << fmt(max_resid, "%.3g")
                      << ", theta " << fmt(sol.theta) << "\n";
                entry["statistic"] = r.statistic;
                entry["df"] = r.df;
                entry["p_value"] = p_machine(r.p_value);
                entry["p_display"] = p_display(r.p_value);
                entry["reject"] = r.reject;
                entry["solver"] = {{"converged", sol.converged},
                                   {"iterations", sol.iterations},
                                   {"max_residual", max_resid},
                                   {"theta", sol.theta}};
            } catch (const jelk::SolverError& e) {
                human << "JEL-S: solver failed: " << e.what() << "\n";
                entry["error"] = e.what();
                rc = 3;
            }
        } else if (m == "energy") {
            jelk::PermutationConfig cfg;
            cfg.num_permutations = a.permutations;
            cfg.rng = jelk::RngStream(seed, 0);
            jelk::TestResult r = jelk::permutation_energy_test(pooled, dm, cfg, a.alpha);
            human << "ET: statistic " << fmt(r.statistic) << " p-value "
                  << p_display(r.p_value) << "  ["
                  << (r.reject ? "reject" : "fail to reject") << "]  ("
                  << a.permutations << " permutations, seed " << seed << ")\n";
            entry = {{"method", "ET"},
                     {"statistic", r.statistic},
                     {"p_value", p_machine(r.p_value)},
                     {"p_display", p_display(r.p_value)},
                     {"reject", r.reject},
                     {"permutations", a.permutations},
                     {"seed", seed}};
        } else if (m == "ad") {
            jelk::TestResult r =
                jelk::anderson_darling_ksample(reduced, pooled.group_of, a.alpha);
            human << "AD: statistic " << fmt(r.statistic) << " p-value "
                  << p_display(r.p_value) << "  ["
                  << (r.reject ? "reject" : "fail to reject") << "]\n";
            entry = {{"method", "AD"},
                     {"statistic", r.statistic},
                     {"p_value", p_machine(r.p_value)},
                     {"p_display", p_display(r.p_value)},
                     {"reject", r.reject}};
        } else {  // kw
            jelk::TestResult r = jelk::kruskal_wallis(reduced, pooled.group_of, a.alpha);
            human << "KW: statistic " << fmt(r.statistic) << " df " << r.df
                  << " p-value " << p_display(r.p_value) << "  ["
                  << (r.reject ? "reject" : "fail to reject") << "]\n";
            entry = {{"method", "KW"},
                     {"statistic", r.statistic},
                     {"df", r.df},
                     {"p_value", p_machine(r.p_value)},
                     {"p_display", p_display(r.p_value)},
                     {"reject", r.reject}};
        }
        report["results"].push_back(entry);
    }

    if (a.json_out)
        std::cout << report.dump(2) << "\n";
    else
        std::cout << human.str();
    if (!a.out_path.empty()) {
        std::ofstream out(a.out_path);
        if (!out)
            throw jelk::ValidationError("cannot write " + a.out_path);
        out << report.dump(2) << "\n";
        std::cerr << "wrote " << a.out_path << "\n";
    }
    return rc;
}

struct SimArgs {
    std::string config;
    std::string out_prefix = "results";
    int workers = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int reps = 0;  // 0 = keep config values
};

int run_simulate(const SimArgs& a) {
    std::vector<jelk::Scenario> scenarios = jelk::load_scenarios(a.config);
    std::optional<std::uint64_t> seed;
    if (a.seed_given)
        seed = a.seed;
    else
        seed = env_seed();
    for (auto& s : scenarios) {
        if (seed)
            s.base_seed = *seed;
        if (a.reps > 0)
            s.replications = a.reps;
    }

    const size_t total = scenarios.size();
    jelk::ResultTable table = jelk::run_grid(
        scenarios, a.workers, [total](int i, const jelk::ResultRow& row) {
            std::cerr << "[" << (i + 1) << "/" << total << "] " << row.descriptor;
            for (const auto& o : row.outcomes) {
                std::cerr << "  " << jelk::method_name(o.method) << " "
                          << fmt(o.rate, "%.4f");
                if (o.failures > 0)
                    std::cerr << " (" << o.failures << " failed)";
            }
            std::cerr << "\n";
        });

    const std::string csv_path = a.out_prefix + ".csv";
    const std::string md_path = a.out_prefix + ".md";
    std::ofstream csv(csv_path);
    if (!csv)
        throw jelk::ValidationError("cannot write " + csv_path);
    jelk::write_result_csv(table, csv);
    std::ofstream md(md_path);
    if (!md)
        throw jelk::ValidationError("cannot write " + md_path);
    jelk::write_result_markdown(table, md);
    std::cerr << "wrote " << csv_path << ", " << md_path << " ("
              << fmt(table.wall_seconds, "%.1f") << "s)\n";

    for (const auto& e : table.errors)
        std::cerr << "error: " << e << "\n";
    return table.errors.empty() ? 0 : 2;
}

struct VerifyArgs {
    int k = 0;
    std::string alpha;
    int random_trials = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

bool eigenvalues_ok(const Eigen::VectorXd& ev, int k) {
    if (static_cast<int>(ev.size()) != k + 1)
        return false;
    for (int i = 0; i < 2; ++i)
        if (std::abs(ev(i)) > 1e-8)
            return false;
    for (int i = 2; i < ev.size(); ++i)
        if (std::abs(ev(i) - 1.0) > 1e-8)
            return false;
    return true;
}

int run_verify(const VerifyArgs& a) {
    std::uint64_t seed = a.seed;
    if (!a.seed_given) {
        if (auto e = env_seed())
            seed = *e;
    }

    if (a.random_trials > 0) {
        bool all_ok = true;
        for (int t = 0; t < a.random_trials; ++t) {
            jelk::RngStream rng(seed, static_cast<std::uint64_t>(t));
            const int k = 2 + static_cast<int>(rng.next_u64() % 5);  // 2..6
            Eigen::VectorXd alpha(k);
            for (int i = 0; i < k; ++i)
                alpha(i) = rng.exponential(1.0);
            alpha /= alpha.sum();
            alpha(k - 1) = 1.0 - alpha.head(k - 1).sum();
            jelk::WilksVerification v = jelk::verify_wilks(alpha);
            const bool ok = eigenvalues_ok(v.eigenvalues, k) &&
                            std::abs(v.trace - (k - 1)) <= 1e-10 && v.identity_ok;
            all_ok = all_ok && ok;
            std::cout << "trial " << (t + 1) << " K=" << k << " trace "
                      << fmt(v.trace, "%.12g") << " " << (ok ? "PASS" : "FAIL")
                      << "\n";
        }
        std::cout << (all_ok ? "all trials passed" : "some trials FAILED") << "\n";
        return all_ok ? 0 : 1;
    }

    Eigen::VectorXd alpha;
    if (!a.alpha.empty()) {
        auto toks = split_commas(a.alpha);
        alpha.resize(static_cast<int>(toks.size()));
        for (size_t i = 0; i < toks.size(); ++i)
            alpha(static_cast<int>(i)) = parse_fraction(toks[i]);
        if (a.k > 0 && a.k != static_cast<int>(alpha.size()))
            throw jelk::ValidationError("--k disagrees with the number of --alpha entries");
    } else if (a.k > 0) {
        alpha = Eigen::VectorXd::Constant(a.k, 1.0 / a.k);
        alpha(a.k - 1) = 1.0 - alpha.head(a.k - 1).sum();
    } else {
        throw jelk::ValidationError("verify needs --alpha, --k, or --random");
    }

    const int k = static_cast<int>(alpha.size());
    jelk::WilksMatrices m = jelk::build_wilks_matrices(alpha);
    jelk::WilksVerification v = jelk::verify_wilks(alpha);
    const double identity_resid =
        (m.a_mat.transpose() * m.w0 * m.a_mat - m.a_mat).cwiseAbs().maxCoeff();

    std::cout << "alpha:";
    for (int i = 0; i < k; ++i)
        std::cout << ' ' << fmt(alpha(i));
    std::cout << "  (K=" << k << ")\n";
    std::cout << "eigenvalues of Sigma0*A:";
    for (int i = 0; i < v.eigenvalues.size(); ++i)
        std::cout << ' ' << fmt(v.eigenvalues(i), "%.9g");
    std::cout << "\ntrace: " << fmt(v.trace, "%.12g") << " (expect " << (k - 1)
              << ")\n";
    std::cout << "max |A^T W0 A - A|: " << fmt(identity_resid, "%.3g") << "\n";

    const bool eig_ok = eigenvalues_ok(v.eigenvalues, k);
    const bool trace_ok = std::abs(v.trace - (k - 1)) <= 1e-10;
    std::cout << "eigenvalue check: " << (eig_ok ? "PASS" : "FAIL")
              << " (target {0,0,1x" << (k - 1) << "} within 1e-8)\n";
    std::cout << "trace check: " << (trace_ok ? "PASS" : "FAIL") << "\n";
    std::cout << "identity check: " << (v.identity_ok ? "PASS" : "FAIL")
              << " (within 1e-10)\n";
    return (eig_ok && trace_ok && v.identity_ok) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"K-sample homogeneity tests via jackknife empirical likelihood"};
    app.require_subcommand(1);

    TestArgs ta;
    CLI::App* test_cmd =
        app.add_subcommand("test", "Run homogeneity tests on a delimited dataset");
    test_cmd->add_option("file", ta.file, "comma- or tab-delimited data file")
        ->required();
    test_cmd->add_option("--alpha", ta.alpha, "significance level (default 0.05)");
    test_cmd->add_option("--label-col", ta.label_col,
                         "label column, by name or 0-based index (default: last)");
    test_cmd->add_option("--cols", ta.cols,
                         "comma-separated feature columns (default: all non-label)");
    test_cmd->add_option("--method", ta.method, "which test(s) to run")
        ->check(CLI::IsMember({"jel", "energy", "kw", "ad", "all"}));
    test_cmd->add_option("--permutations", ta.permutations,
                         "permutation count for the energy test");
    CLI::Option* t_seed = test_cmd->add_option("--seed", ta.seed, "RNG seed");
    test_cmd->add_option("--out", ta.out_path, "write a JSON report here");
    test_cmd->add_flag("--json", ta.json_out, "print the JSON report to stdout");

    SimArgs sa;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "Run a Monte Carlo scenario grid");
    sim_cmd->add_option("config", sa.config, "scenario config file")->required();
    sim_cmd->add_option("--out", sa.out_prefix,
                        "output prefix for .csv/.md (default: results)");
    sim_cmd->add_option("--workers", sa.workers, "worker threads (default 1)");
    CLI::Option* s_seed =
        sim_cmd->add_option("--seed", sa.seed, "override every scenario seed");
    sim_cmd->add_option("--reps", sa.reps, "override replication counts");

    VerifyArgs va;
    CLI::App* ver_cmd = app.add_subcommand(
        "verify", "Check the chi-square limit algebra numerically");
    ver_cmd->add_option("--k", va.k, "number of groups (equal weights unless --alpha)");
    ver_cmd->add_option("--alpha", va.alpha,
                        "comma-separated group fractions; fractions like 1/3 allowed");
    ver_cmd->add_option("--random", va.random_trials,
                        "run N trials with random group fractions");
    CLI::Option* v_seed = ver_cmd->add_option("--seed", va.seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ta.seed_given = t_seed->count() > 0;
    sa.seed_given = s_seed->count() > 0;
    va.seed_given = v_seed->count() > 0;

    try {
        if (test_cmd->parsed())
            return run_test(ta);
        if (sim_cmd->parsed())
            return run_simulate(sa);
        if (ver_cmd->parsed())
            return run_verify(va);
    } catch (const jelk::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const jelk::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
