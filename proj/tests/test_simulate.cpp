#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "jelk/simulate.hpp"

using namespace jelk;

namespace {

Scenario small_scenario() {
    Scenario s;
    s.family = "normal-scale";
    s.deltas = Eigen::VectorXd::Constant(1, 1.0);
    s.sizes = {5, 5};
    s.replications = 100;
    s.methods = {Method::JelS, Method::Et, Method::Ad, Method::Kw};
    s.permutations = 19;
    s.base_seed = 12345;
    return s;
}

std::string csv_of(const ResultTable& t) {
    std::ostringstream os;
    write_result_csv(t, os);
    return os.str();
}

ResultTable table_of(const ResultRow& row, std::uint64_t seed) {
    ResultTable t;
    t.rows.push_back(row);
    t.seed = seed;
    t.replications = row.replications;
    return t;
}

}  // namespace

TEST_CASE("method names") {
    CHECK(method_name(Method::JelS) == "JEL-S");
    CHECK(method_name(Method::Et) == "ET");
    CHECK(method_name(Method::Ad) == "AD");
    CHECK(method_name(Method::Kw) == "KW");
}

TEST_CASE("scenario validation") {
    Scenario s = small_scenario();
    CHECK_NOTHROW(validate_scenario(s));

    Scenario bad = s;
    bad.family = "cauchy-scale";
    CHECK_THROWS_WITH_AS(validate_scenario(bad), doctest::Contains("unknown family"),
                         ValidationError);

    bad = s;
    bad.sizes = {50};
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);

    bad = s;
    bad.sizes = {5, 2};
    CHECK_THROWS_WITH_AS(validate_scenario(bad), doctest::Contains(">= 3"),
                         ValidationError);

    bad = s;
    bad.deltas = Eigen::VectorXd::Constant(2, 1.5);  // K=2 wants 1
    CHECK_THROWS_WITH_AS(validate_scenario(bad), doctest::Contains("deltas"),
                         ValidationError);

    bad = s;
    bad.deltas(0) = -1.0;
    CHECK_THROWS_WITH_AS(validate_scenario(bad), doctest::Contains("positive"),
                         ValidationError);

    bad = s;
    bad.family = "normal-scale-location";  // wants 2(K-1) deltas
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);
    bad.deltas = Eigen::VectorXd::Constant(2, 0.5);
    CHECK_NOTHROW(validate_scenario(bad));
    bad.deltas(1) = 0.0;  // the scale half must stay positive
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);

    bad = s;
    bad.dim = 0;
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);

    bad = s;
    bad.alpha_level = 1.0;
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);

    bad = s;
    bad.replications = 99;
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);

    bad = s;
    bad.methods.clear();
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);

    bad = s;
    bad.permutations = 10;  // Et selected in small_scenario
    CHECK_THROWS_AS(validate_scenario(bad), ValidationError);
    bad.methods = {Method::Kw};  // without Et the permutation count is moot
    CHECK_NOTHROW(validate_scenario(bad));
}

TEST_CASE("scenario descriptor") {
    Scenario s = small_scenario();
    CHECK(scenario_descriptor(s) == "normal-scale d=1 n=5/5 deltas=1");
    s.deltas = Eigen::VectorXd(1);
    s.deltas << 1.5;
    s.sizes = {40, 60};
    CHECK(scenario_descriptor(s) == "normal-scale d=1 n=40/60 deltas=1.5");
    s.name = "my row";
    CHECK(scenario_descriptor(s) == "my row");
}

TEST_CASE("config parsing covers keys, comments, and method aliases") {
    std::istringstream in(
        "# two-sample scale grid\n"
        "family = Normal-Scale\n"
        "deltas = 1.5\n"
        "sizes = 50/50\n"
        "reps = 400\n"
        "methods = jel, kw\n"
        "seed = 9\n"
        "\n"
        "family=exp-scale\n"
        "deltas=2.0\n"
        "sizes=40,60\n"
        "methods=all\n"
        "permutations=99\n"
        "alpha=0.1\n"
        "name=exp row\n");
    std::vector<Scenario> got = parse_scenarios(in);
    REQUIRE(got.size() == 2);

    CHECK(got[0].family == "normal-scale");
    CHECK(got[0].deltas.size() == 1);
    CHECK(got[0].deltas(0) == 1.5);
    CHECK(got[0].sizes == std::vector<int>{50, 50});
    CHECK(got[0].replications == 400);
    REQUIRE(got[0].methods.size() == 2);
    CHECK(got[0].methods[0] == Method::JelS);
    CHECK(got[0].methods[1] == Method::Kw);
    CHECK(got[0].base_seed == 9);
    CHECK(got[0].alpha_level == 0.05);  // default

    CHECK(got[1].family == "exp-scale");
    CHECK(got[1].sizes == std::vector<int>{40, 60});
    CHECK(got[1].methods.size() == 4);
    CHECK(got[1].permutations == 99);
    CHECK(got[1].alpha_level == 0.1);
    CHECK(got[1].name == "exp row");
    CHECK(scenario_descriptor(got[1]) == "exp row");
}

TEST_CASE("config errors carry line numbers") {
    {
        std::istringstream in("family = normal-scale\nbogus line\n");
        CHECK_THROWS_WITH_AS(parse_scenarios(in), doctest::Contains("line 2"),
                             ValidationError);
    }
    {
        std::istringstream in("family = normal-scale\ndeltas = abc\n");
        CHECK_THROWS_WITH_AS(parse_scenarios(in), doctest::Contains("line 2"),
                             ValidationError);
    }
    {
        std::istringstream in("family = normal-scale\ncolor = red\n");
        CHECK_THROWS_WITH_AS(parse_scenarios(in), doctest::Contains("unknown key"),
                             ValidationError);
    }
    {
        std::istringstream in("methods = xyz\n");
        CHECK_THROWS_WITH_AS(parse_scenarios(in), doctest::Contains("unknown method"),
                             ValidationError);
    }
    {
        std::istringstream in("family =\n");
        CHECK_THROWS_WITH_AS(parse_scenarios(in), doctest::Contains("empty value"),
                             ValidationError);
    }
    {
        std::istringstream in("# just a comment\n\n");
        CHECK_THROWS_WITH_AS(parse_scenarios(in), doctest::Contains("no scenarios"),
                             ValidationError);
    }
    {
        // incomplete scenario: the validation error names its first line
        std::istringstream in("\n\nfamily = normal-scale\ndeltas = 1.5\nsizes = 50\n");
        CHECK_THROWS_WITH_AS(parse_scenarios(in),
                             doctest::Contains("starting at line 3"), ValidationError);
    }
}

TEST_CASE("scenario runs are deterministic in the seed and worker count") {
    Scenario s = small_scenario();
    ResultRow a = run_scenario(s, 1);
    ResultRow b = run_scenario(s, 1);
    ResultRow c = run_scenario(s, 3);
    CHECK(csv_of(table_of(a, s.base_seed)) == csv_of(table_of(b, s.base_seed)));
    CHECK(csv_of(table_of(a, s.base_seed)) == csv_of(table_of(c, s.base_seed)));

    REQUIRE(a.outcomes.size() == 4);
    for (const auto& o : a.outcomes) {
        CHECK(o.completed + o.failures == s.replications);
        CHECK(o.rate >= 0.0);
        CHECK(o.rate <= 1.0);
    }

    Scenario other = s;
    other.base_seed = 54321;
    ResultRow d = run_scenario(other, 1);
    CHECK(csv_of(table_of(a, s.base_seed)) != csv_of(table_of(d, other.base_seed)));
}

TEST_CASE("grid continues past a failing row") {
    Scenario good = small_scenario();
    good.methods = {Method::Kw};
    Scenario bad = good;
    bad.family = "no-such-family";

    ResultTable t = run_grid({bad, good}, 1);
    REQUIRE(t.rows.size() == 2);
    REQUIRE(t.errors.size() == 1);
    CHECK(t.errors[0].find("scenario 1") != std::string::npos);
    CHECK(t.rows[0].outcomes.empty());  // placeholder
    REQUIRE(t.rows[1].outcomes.size() == 1);
    CHECK(t.rows[1].outcomes[0].completed == 100);

    CHECK_THROWS_AS(run_grid({}, 1), ValidationError);
}

TEST_CASE("csv output format") {
    MethodOutcome o;
    o.method = Method::Kw;
    o.rejections = 7;
    o.failures = 0;
    o.completed = 100;
    o.rate = 0.07;
    o.std_error = 0.0255147016443303;
    ResultRow row;
    row.descriptor = "rows, with commas";
    row.replications = 100;
    row.seed = 7;
    row.outcomes.push_back(o);
    ResultTable t = table_of(row, 7);

    std::string text = csv_of(t);
    CHECK(text.find("scenario,method,rate,std_error,rejections,completed,failures,"
                    "replications,seed\n") == 0);
    CHECK(text.find("\"rows, with commas\",KW,0.070000,0.025515,7,100,0,100,7\n") !=
          std::string::npos);
    CHECK(csv_of(t) == text);  // stable across writes
}

TEST_CASE("markdown output format") {
    MethodOutcome o;
    o.method = Method::JelS;
    o.rejections = 50;
    o.failures = 2;
    o.completed = 98;
    o.rate = 50.0 / 98.0;
    o.std_error = 0.05;
    ResultRow row;
    row.descriptor = "demo";
    row.replications = 100;
    row.seed = 11;
    row.outcomes.push_back(o);
    ResultTable t = table_of(row, 11);
    t.errors.push_back("scenario 2 (x): boom");

    std::ostringstream os;
    write_result_markdown(t, os);
    std::string text = os.str();
    CHECK(text.find("seed: 11") != std::string::npos);
    CHECK(text.find("| scenario | reps | JEL-S |") != std::string::npos);
    CHECK(text.find("0.5102 ± 0.0500 [2 failed]") != std::string::npos);
    CHECK(text.find("Errors:") != std::string::npos);
    CHECK(text.find("boom") != std::string::npos);
}
