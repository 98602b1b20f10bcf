#include <doctest.h>

#include "qtasep/cli.hpp"
#include "qtasep/verify.hpp"

#include <cmath>
#include <limits>
#include <string>

using namespace qtasep;

namespace {
std::string cfg(const std::string& body) {
    return std::string(R"({"schema":"qtasep-v1",)") + body + "}";
}

int count_data_rows(const std::string& csv) {
    int rows = 0;
    std::size_t pos = 0;
    bool header = false;
    while (pos < csv.size()) {
        auto end = csv.find('\n', pos);
        if (end == std::string::npos) end = csv.size();
        auto line = csv.substr(pos, end - pos);
        if (!line.empty() && line[0] != '#') {
            if (header) ++rows;
            header = true;
        }
        pos = end + 1;
    }
    return rows;
}
}  // namespace

TEST_CASE("config parsing errors name the field") {
    CHECK_THROWS_AS(parse_config(R"({"flavor":"poisson"})"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(cfg(R"("flavor":"poisson","tee":1)")), doctest::Contains("tee"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(cfg(R"("flavor":"geometric","N":2,"t":3,"alpha_schedule":[0.2,0.3])")),
                         doctest::Contains("alpha_schedule"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(cfg(R"("flavor":"bernoulli","N":1,"t":2,"beta_schedule":[1.0])")),
                         doctest::Contains("beta_schedule"), ConfigError);
    CHECK_THROWS_AS(parse_config(cfg(R"("flavor":"poisson","q":1.5)")), ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("config defaults and inference") {
    auto c = parse_config(cfg(R"("flavor":"geometric","n":[[2]],"t":3,"alpha":0.3)"));
    CHECK(c.N == 2);
    CHECK(c.alpha_schedule == std::vector<double>{0.3, 0.3, 0.3});
    CHECK(c.initial_state() == step_initial(2));
    auto k = parse_config(cfg(R"("flavor":"poisson","N":2,"k":2)"));
    CHECK(k.n_vectors == std::vector<std::vector<int>>{{2, 2}, {2, 1}, {1, 1}});
}

TEST_CASE("simulate output is reproducible") {
    auto c = parse_config(cfg(R"("flavor":"poisson","N":1,"t":1.0,"trials":2000,"seed":4)"));
    auto a = cmd_simulate(c, false);
    auto b = cmd_simulate(c, false);
    CHECK(a == b);
    CHECK(count_data_rows(a) == 1);
    CHECK(a.find("config_hash=" + c.hash) != std::string::npos);
    auto j = cmd_simulate(c, true);
    CHECK(j.find("\"seed\"") != std::string::npos);
}

TEST_CASE("moments, evolve and fredholm commands") {
    auto c0 = parse_config(cfg(R"("flavor":"poisson","N":2,"n":[[2,1]],"t":0)"));
    auto m0 = cmd_moments(c0, true);
    auto at = m0.find("\"value\": ");
    REQUIRE(at != std::string::npos);
    CHECK(std::abs(std::stod(m0.substr(at + 9)) - 1.0) < 1e-10);

    auto c = parse_config(cfg(R"("flavor":"bernoulli","N":2,"n":[[2,2]],"t":2,"beta":0.8)"));
    auto ev = cmd_evolve(c, false);
    auto mo = cmd_moments(c, false);
    CHECK(count_data_rows(ev) == 1);
    CHECK(count_data_rows(mo) == 1);

    auto f = parse_config(cfg(R"("flavor":"bernoulli","n":[[1]],"t":1,"beta":1.0,"zeta":[-0.3])"));
    auto fj = cmd_fredholm(f, true);
    CHECK(fj.find("mb") != std::string::npos);
    CHECK(fj.find("cauchy") != std::string::npos);
    CHECK(fj.find("gap") != std::string::npos);
}

TEST_CASE("verify command") {
    auto c = parse_config(cfg(R"("suite":"identities")"));
    bool pass = false;
    auto out = cmd_verify(c, true, pass);
    CHECK(pass);
    auto bad = parse_config(cfg(R"("suite":"contour","N":2,"contour_radii":[0.5,0.6])"));
    bool bad_pass = true;
    auto report = cmd_verify(bad, false, bad_pass);
    CHECK_FALSE(bad_pass);
    CHECK(report.find("nesting") != std::string::npos);
    CHECK_THROWS_AS(run_suite("nope", VerifyOptions{}), ParameterError);
}

TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0, std::exp(-0.35)}) {
        auto s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("z score") {
    CHECK(z_score(1.0, 0.0, 1.0) == 0.0);
    CHECK(std::isinf(z_score(1.0, 0.0, 1.1)));
    CHECK(z_score(1.2, 0.1, 1.0) == doctest::Approx(2.0));
}
