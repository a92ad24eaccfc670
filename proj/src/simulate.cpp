#include "jelk/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "jelk/baselines.hpp"
#include "jelk/data.hpp"
#include "jelk/gini.hpp"
#include "jelk/jel.hpp"
#include "jelk/stats.hpp"

namespace jelk {

namespace {

const char* kFamilies[] = {"normal-scale", "normal-location", "normal-scale-location",
                           "t5-scale", "exp-scale"};

bool known_family(const std::string& f) {
    for (const char* name : kFamilies)
        if (f == name)
            return true;
    return false;
}

std::string fmt_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

std::string fmt_fixed(double x, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << x;
    return os.str();
}

Eigen::MatrixXd draw_group(const Scenario& s, int g, RngStream& rng) {
    const int n = s.sizes[g];
    const int d = s.dim;
    const int k1 = static_cast<int>(s.sizes.size()) - 1;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    if (s.family == "normal-scale") {
        double sd = g == 0 ? 1.0 : s.deltas(g - 1);
        return sample_mvnormal(mean, sd * sd, n, rng);
    }
    if (s.family == "normal-location") {
        if (g > 0)
            mean.setConstant(s.deltas(g - 1));
        return sample_mvnormal(mean, 1.0, n, rng);
    }
    if (s.family == "normal-scale-location") {
        double loc = g == 0 ? 0.0 : s.deltas(g - 1);
        double sd = g == 0 ? 1.0 : s.deltas(k1 + g - 1);
        mean.setConstant(loc);
        return sample_mvnormal(mean, sd * sd, n, rng);
    }
    if (s.family == "t5-scale") {
        double sd = g == 0 ? 1.0 : s.deltas(g - 1);
        return sample_mvt(5, sd * sd, d, n, rng);
    }
    // exp-scale: independent exponential coordinates with mean = scale
    double scale = g == 0 ? 1.0 : s.deltas(g - 1);
    return sample_mvexp(1.0 / scale, d, n, rng);
}

struct Tally {
    int rejections = 0;
    int failures = 0;
};

std::vector<Tally> run_range(const Scenario& s, int lo, int hi) {
    const int k = static_cast<int>(s.sizes.size());
    std::vector<Tally> tally(s.methods.size());
    bool need_dm = false;
    for (Method m : s.methods)
        need_dm = need_dm || m == Method::JelS || m == Method::Et;

    for (int rep = lo; rep < hi; ++rep) {
        RngStream rng(s.base_seed, static_cast<std::uint64_t>(rep));
        std::vector<Sample> samples(k);
        for (int g = 0; g < k; ++g) {
            samples[g].label = "g" + std::to_string(g + 1);
            samples[g].points = draw_group(s, g, rng);
        }
        PooledData pooled = build_pooled(samples);
        DistanceMatrix dm;
        if (need_dm)
            dm = pairwise_distances(pooled.points);

        // Rank/EDF methods get the raw values in one dimension and the
        // Euclidean norms otherwise.
        Eigen::VectorXd reduced;
        for (Method m : s.methods)
            if (m == Method::Ad || m == Method::Kw) {
                reduced = s.dim == 1 ? Eigen::VectorXd(pooled.points.col(0))
                                     : norm_reduction(pooled.points);
                break;
            }

        for (size_t mi = 0; mi < s.methods.size(); ++mi) {
            try {
                TestResult r;
                switch (s.methods[mi]) {
                    case Method::JelS:
                        r = jel_test(pooled, dm, s.alpha_level);
                        break;
                    case Method::Et: {
                        PermutationConfig cfg;
                        cfg.num_permutations = s.permutations;
                        cfg.rng = rng;  // continues the replication stream
                        r = permutation_energy_test(pooled, dm, cfg, s.alpha_level);
                        break;
                    }
                    case Method::Ad:
                        r = anderson_darling_ksample(reduced, pooled.group_of,
                                                     s.alpha_level);
                        break;
                    case Method::Kw:
                        r = kruskal_wallis(reduced, pooled.group_of, s.alpha_level);
                        break;
                }
                if (r.reject)
                    ++tally[mi].rejections;
            } catch (const SolverError&) {
                ++tally[mi].failures;
            } catch (const ValidationError&) {
                // degenerate draw (e.g. empty feasibility interval at tiny
                // sample sizes); the method has no answer for this data
                ++tally[mi].failures;
            }
        }
    }
    return tally;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_any(const std::string& s, const char* seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::strchr(seps, c)) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

[[noreturn]] void line_error(int lineno, const std::string& msg) {
    throw ValidationError("config line " + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& v, int lineno, const std::string& key) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        line_error(lineno, "invalid number '" + v + "' for key '" + key + "'");
    }
}

long parse_long(const std::string& v, int lineno, const std::string& key) {
    try {
        size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        line_error(lineno, "invalid integer '" + v + "' for key '" + key + "'");
    }
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::JelS: return "JEL-S";
        case Method::Et: return "ET";
        case Method::Ad: return "AD";
        case Method::Kw: return "KW";
    }
    return "?";
}

void validate_scenario(const Scenario& s) {
    if (!known_family(s.family)) {
        std::string known;
        for (const char* f : kFamilies)
            known += std::string(known.empty() ? "" : ", ") + f;
        throw ValidationError("scenario: unknown family '" + s.family +
                              "' (known: " + known + ")");
    }
    const int k = static_cast<int>(s.sizes.size());
    if (k < 2)
        throw ValidationError("scenario: need at least 2 group sizes");
    for (int g = 0; g < k; ++g)
        if (s.sizes[g] < 3)
            throw ValidationError("scenario: group " + std::to_string(g + 1) +
                                  " size must be >= 3");
    const int want = s.family == "normal-scale-location" ? 2 * (k - 1) : k - 1;
    if (static_cast<int>(s.deltas.size()) != want)
        throw ValidationError("scenario: family '" + s.family + "' with " +
                              std::to_string(k) + " groups needs " +
                              std::to_string(want) + " deltas, got " +
                              std::to_string(s.deltas.size()));
    if (s.family == "normal-scale" || s.family == "t5-scale" ||
        s.family == "exp-scale") {
        if ((s.deltas.array() <= 0.0).any())
            throw ValidationError("scenario: scale deltas must be positive");
    }
    if (s.family == "normal-scale-location") {
        for (int i = k - 1; i < 2 * (k - 1); ++i)
            if (!(s.deltas(i) > 0.0))
                throw ValidationError("scenario: scale deltas must be positive");
    }
    if (s.dim < 1)
        throw ValidationError("scenario: dim must be >= 1");
    if (!(s.alpha_level > 0.0 && s.alpha_level < 1.0))
        throw ValidationError("scenario: alpha must be in (0,1)");
    if (s.replications < 100)
        throw ValidationError("scenario: need at least 100 replications");
    if (s.methods.empty())
        throw ValidationError("scenario: no methods selected");
    for (Method m : s.methods)
        if (m == Method::Et && s.permutations < 19)
            throw ValidationError("scenario: need at least 19 permutations");
}

std::string scenario_descriptor(const Scenario& s) {
    if (!s.name.empty())
        return s.name;
    std::string out = s.family + " d=" + std::to_string(s.dim) + " n=";
    for (size_t i = 0; i < s.sizes.size(); ++i)
        out += (i ? "/" : "") + std::to_string(s.sizes[i]);
    out += " deltas=";
    for (int i = 0; i < s.deltas.size(); ++i)
        out += (i ? "," : "") + fmt_g(s.deltas(i));
    return out;
}

ResultRow run_scenario(const Scenario& s, int workers) {
    validate_scenario(s);
    int w = std::max(1, workers);
    w = std::min(w, s.replications);

    std::vector<std::vector<Tally>> parts(w);
    if (w == 1) {
        parts[0] = run_range(s, 0, s.replications);
    } else {
        const int chunk = (s.replications + w - 1) / w;
        std::vector<std::thread> pool;
        for (int t = 0; t < w; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(s.replications, lo + chunk);
            pool.emplace_back([&parts, &s, t, lo, hi] {
                if (lo < hi)
                    parts[t] = run_range(s, lo, hi);
                else
                    parts[t].resize(s.methods.size());
            });
        }
        for (auto& th : pool)
            th.join();
    }

    ResultRow row;
    row.descriptor = scenario_descriptor(s);
    row.replications = s.replications;
    row.seed = s.base_seed;
    for (size_t mi = 0; mi < s.methods.size(); ++mi) {
        MethodOutcome o;
        o.method = s.methods[mi];
        for (const auto& part : parts) {
            o.rejections += part[mi].rejections;
            o.failures += part[mi].failures;
        }
        o.completed = s.replications - o.failures;
        if (o.completed > 0) {
            o.rate = static_cast<double>(o.rejections) / o.completed;
            o.std_error = std::sqrt(o.rate * (1.0 - o.rate) / o.completed);
        }
        row.outcomes.push_back(o);
    }
    return row;
}

ResultTable run_grid(const std::vector<Scenario>& scenarios, int workers,
                     const RowCallback& on_row) {
    if (scenarios.empty())
        throw ValidationError("run_grid: empty scenario list");
    const auto start = std::chrono::steady_clock::now();
    ResultTable table;
    table.seed = scenarios.front().base_seed;
    table.replications = scenarios.front().replications;
    for (size_t i = 0; i < scenarios.size(); ++i) {
        ResultRow row;
        try {
            row = run_scenario(scenarios[i], workers);
        } catch (const std::exception& e) {
            row.descriptor = scenario_descriptor(scenarios[i]);
            table.errors.push_back("scenario " + std::to_string(i + 1) + " (" +
                                   row.descriptor + "): " + e.what());
        }
        table.rows.push_back(row);
        if (on_row)
            on_row(static_cast<int>(i), table.rows.back());
    }
    table.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return table;
}

std::vector<Scenario> parse_scenarios(std::istream& in) {
    std::vector<Scenario> out;
    Scenario cur;
    bool open = false;
    int first_line = 0;
    int lineno = 0;
    std::string raw;

    auto finalize = [&]() {
        if (!open)
            return;
        try {
            validate_scenario(cur);
        } catch (const ValidationError& e) {
            throw ValidationError("config: scenario starting at line " +
                                  std::to_string(first_line) + ": " + e.what());
        }
        out.push_back(cur);
        cur = Scenario{};
        open = false;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty()) {
            finalize();
            continue;
        }
        if (line[0] == '#')
            continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            line_error(lineno, "expected key=value, got '" + line + "'");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            line_error(lineno, "empty value for key '" + key + "'");
        if (!open) {
            open = true;
            first_line = lineno;
        }
        if (key == "family") {
            cur.family = lower(value);
        } else if (key == "deltas") {
            auto parts = split_any(value, ",");
            cur.deltas.resize(static_cast<int>(parts.size()));
            for (size_t i = 0; i < parts.size(); ++i)
                cur.deltas(static_cast<int>(i)) = parse_double(parts[i], lineno, key);
        } else if (key == "sizes") {
            auto parts = split_any(value, ",/");
            cur.sizes.clear();
            for (const auto& p : parts)
                cur.sizes.push_back(static_cast<int>(parse_long(p, lineno, key)));
        } else if (key == "dim") {
            cur.dim = static_cast<int>(parse_long(value, lineno, key));
        } else if (key == "alpha") {
            cur.alpha_level = parse_double(value, lineno, key);
        } else if (key == "reps" || key == "replications") {
            cur.replications = static_cast<int>(parse_long(value, lineno, key));
        } else if (key == "methods") {
            cur.methods.clear();
            for (const auto& tok : split_any(lower(value), ",")) {
                if (tok == "jel" || tok == "jel-s" || tok == "jels")
                    cur.methods.push_back(Method::JelS);
                else if (tok == "et" || tok == "energy")
                    cur.methods.push_back(Method::Et);
                else if (tok == "ad")
                    cur.methods.push_back(Method::Ad);
                else if (tok == "kw")
                    cur.methods.push_back(Method::Kw);
                else if (tok == "all")
                    cur.methods = {Method::JelS, Method::Et, Method::Ad, Method::Kw};
                else
                    line_error(lineno, "unknown method '" + tok + "'");
            }
        } else if (key == "seed") {
            cur.base_seed = static_cast<std::uint64_t>(parse_long(value, lineno, key));
        } else if (key == "permutations") {
            cur.permutations = static_cast<int>(parse_long(value, lineno, key));
        } else if (key == "name") {
            cur.name = value;
        } else {
            line_error(lineno, "unknown key '" + key + "'");
        }
    }
    finalize();
    if (out.empty())
        throw ValidationError("config: no scenarios found");
    return out;
}

std::vector<Scenario> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config file: " + path);
    return parse_scenarios(in);
}

void write_result_csv(const ResultTable& table, std::ostream& out) {
    out << "scenario,method,rate,std_error,rejections,completed,failures,"
           "replications,seed\n";
    for (const auto& row : table.rows) {
        for (const auto& o : row.outcomes) {
            out << csv_escape(row.descriptor) << ',' << method_name(o.method) << ','
                << fmt_fixed(o.rate, 6) << ',' << fmt_fixed(o.std_error, 6) << ','
                << o.rejections << ',' << o.completed << ',' << o.failures << ','
                << row.replications << ',' << row.seed << '\n';
        }
    }
}

void write_result_markdown(const ResultTable& table, std::ostream& out) {
    // Column set: union of methods across rows, in first-appearance order.
    std::vector<Method> cols;
    for (const auto& row : table.rows)
        for (const auto& o : row.outcomes)
            if (std::find(cols.begin(), cols.end(), o.method) == cols.end())
                cols.push_back(o.method);

    out << "seed: " << table.seed << "\n\n";
    out << "| scenario | reps |";
    for (Method m : cols)
        out << ' ' << method_name(m) << " |";
    out << "\n|---|---|";
    for (size_t i = 0; i < cols.size(); ++i)
        out << "---|";
    out << '\n';
    for (const auto& row : table.rows) {
        out << "| " << row.descriptor << " | " << row.replications << " |";
        for (Method m : cols) {
            const MethodOutcome* found = nullptr;
            for (const auto& o : row.outcomes)
                if (o.method == m)
                    found = &o;
            if (!found) {
                out << " - |";
            } else {
                out << ' ' << fmt_fixed(found->rate, 4) << " ± "
                    << fmt_fixed(found->std_error, 4);
                if (found->failures > 0)
                    out << " [" << found->failures << " failed]";
                out << " |";
            }
        }
        out << '\n';
    }
    if (!table.errors.empty()) {
        out << "\nErrors:\n";
        for (const auto& e : table.errors)
            out << "- " << e << '\n';
    }
}

}  // namespace jelk
