#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jelk/errors.hpp"

namespace jelk {

enum class Method { JelS, Et, Ad, Kw };

std::string method_name(Method m);

// One Monte Carlo experiment: draw K samples per `family`, run the selected
// methods, estimate rejection rates. Group 1 is always the reference
// (standard) distribution; `deltas` parameterizes groups 2..K.
//   normal-scale          deltas = (sd_2, ..., sd_K)
//   normal-location       deltas = (shift_2, ..., shift_K), mean = shift * 1_d
//   normal-scale-location deltas = (shift_2..shift_K, sd_2..sd_K)
//   t5-scale              deltas = (sd_2, ..., sd_K), t with 5 df
//   exp-scale             deltas = (scale_2, ..., scale_K), mean = scale
struct Scenario {
    std::string family;
    Eigen::VectorXd deltas;
    std::vector<int> sizes;
    int dim = 1;
    double alpha_level = 0.05;
    int replications = 2000;
    std::vector<Method> methods = {Method::JelS};
    std::uint64_t base_seed = 0;
    int permutations = 199;  // for the permutation energy test
    std::string name;        // optional row label
};

void validate_scenario(const Scenario& s);
std::string scenario_descriptor(const Scenario& s);

struct MethodOutcome {
    Method method = Method::JelS;
    int rejections = 0;
    int failures = 0;   // solver failures / infeasible draws, excluded from the rate
    int completed = 0;  // replications - failures
    double rate = 0.0;
    double std_error = 0.0;  // sqrt(rate * (1 - rate) / completed)
};

struct ResultRow {
    std::string descriptor;
    int replications = 0;
    std::uint64_t seed = 0;
    std::vector<MethodOutcome> outcomes;
};

struct ResultTable {
    std::vector<ResultRow> rows;  // input order, one per scenario
    std::uint64_t seed = 0;
    int replications = 0;
    double wall_seconds = 0.0;            // not written to files
    std::vector<std::string> errors;      // rows that failed, grid continued
};

// Replication r uses RngStream(base_seed, r), so results are identical for
// any worker count. Solver failures are tallied per method and excluded
// from the rate denominator.
ResultRow run_scenario(const Scenario& s, int workers = 1);

using RowCallback = std::function<void(int, const ResultRow&)>;
ResultTable run_grid(const std::vector<Scenario>& scenarios, int workers = 1,
                     const RowCallback& on_row = {});

// Line-oriented config: one key=value per line, blank line between
// scenarios, '#' starts a comment. Keys: family, deltas, sizes, dim, alpha,
// reps, methods, seed, permutations, name.
std::vector<Scenario> parse_scenarios(std::istream& in);
std::vector<Scenario> load_scenarios(const std::string& path);

void write_result_csv(const ResultTable& table, std::ostream& out);
void write_result_markdown(const ResultTable& table, std::ostream& out);

}  // namespace jelk
