#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sharing_queue/commands.hpp"

namespace sq = sharing_queue;
using nlohmann::json;

namespace {

sq::RawConfig platform_raw() {
    return sq::parse_config_json(json::parse(R"({
        "system": {"v": 33, "w": 35, "lambda": 2.2, "posting": {"kind": "exponential", "mean": 1.3}},
        "cost": {"ch": 3, "cr": 1, "cd": 80},
        "sim": {"seed": 5, "postings": 20000}
    })"));
}

std::string first_line_after_comment(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("# config: ", 0), 0u);
    std::getline(in, line);
    return line;
}

}  // namespace

TEST(Config, UnknownKeysAreNamed) {
    try {
        sq::parse_config_json(json::parse(R"({"system": {"v": 1, "posting": {"kind": "exponential", "maen": 1}}})"));
        FAIL() << "expected ConfigError";
    } catch (const sq::ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("system.posting.maen"), std::string::npos);
    }
    EXPECT_THROW(sq::parse_config_json(json::parse(R"({"extra": 1})")), sq::ConfigError);
    EXPECT_THROW(sq::parse_config_json(json::parse(R"({"system": {"v": "three"}})")), sq::ConfigError);
}

TEST(Config, FlagsOverrideFile) {
    sq::RawConfig raw = platform_raw();
    sq::RawConfig flags;
    flags.v = 2;
    flags.cD = 10.0;
    raw.merge(flags);
    const auto cfg = sq::resolve(sq::Command::Solve, raw);
    EXPECT_EQ(cfg.params.v, 2);
    EXPECT_EQ(cfg.params.w, 35);
    EXPECT_EQ(cfg.cost.cD, 10.0);
    EXPECT_EQ(cfg.cost.cH, 3.0);
}

TEST(Execute, ConstraintViolationIsStatusTwo) {
    sq::RawConfig raw = platform_raw();
    raw.v = 36;
    const auto e = sq::execute(sq::Command::Solve, raw);
    EXPECT_EQ(e.status, sq::kExitConfig);
    EXPECT_NE(e.doc["error"]["message"].get<std::string>().find("v <= w"), std::string::npos);

    sq::RawConfig missing = platform_raw();
    missing.lambda.reset();
    const auto m = sq::execute(sq::Command::Solve, missing);
    EXPECT_EQ(m.status, sq::kExitConfig);
    EXPECT_NE(m.doc["error"]["message"].get<std::string>().find("lambda"), std::string::npos);
}

TEST(Execute, SolveBirthDeath) {
    sq::RawConfig raw;
    raw.v = 1;
    raw.w = 5;
    raw.lambda = 0.5;
    raw.mean = 1.0;
    const auto e = sq::execute(sq::Command::Solve, raw);
    ASSERT_EQ(e.status, sq::kExitOk);
    const auto pi1 = e.doc["result"]["distribution"]["pi1"].get<std::vector<double>>();
    const auto expect = oracle::birth_death_pool(0.5, 5);
    for (int k = 0; k <= 5; ++k) EXPECT_NEAR(pi1[k], expect[k], 1e-6);
    EXPECT_NEAR(e.doc["result"]["root"].get<double>(), 2.0, 1e-12);
}

TEST(Execute, SolvePlatformInstanceDocument) {
    const auto e = sq::execute(sq::Command::Solve, platform_raw());
    ASSERT_EQ(e.status, sq::kExitOk);
    const auto pi1 = e.doc["result"]["distribution"]["pi1"].get<std::vector<double>>();
    ASSERT_EQ(pi1.size(), 36u);
    double s = 0.0;
    for (double x : pi1) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_EQ(e.doc["result"]["model_type"], "type2");
    EXPECT_TRUE(e.doc["result"].contains("norm_constant"));
    EXPECT_TRUE(e.doc["result"].contains("tpm_gap"));
    EXPECT_EQ(first_line_after_comment(e.csv), "k,P,pi,pi1");
}

TEST(Execute, DocumentIsSelfReproducing) {
    for (auto cmd : {sq::Command::Solve, sq::Command::Simulate}) {
        const auto first = sq::execute(cmd, platform_raw());
        const auto again = sq::execute(cmd, sq::parse_config_json(json::parse(first.doc["config"].dump())));
        EXPECT_EQ(first.doc.dump(), again.doc.dump());
    }
    const auto sim = sq::execute(sq::Command::Simulate, platform_raw());
    EXPECT_EQ(sim.doc["config"]["sim"]["seed"], 5);
    EXPECT_EQ(sim.doc["result"]["seed"], 5);
}

TEST(Execute, OptimizeCurveAndCsv) {
    sq::RawConfig raw = platform_raw();
    raw.format = "csv";
    const auto e = sq::execute(sq::Command::Optimize, raw);
    ASSERT_EQ(e.status, sq::kExitOk);
    EXPECT_EQ(e.doc["result"]["curve"].size(), 35u);
    EXPECT_EQ(first_line_after_comment(e.csv), "v,holding,reserve,posting,total,expected_pool,valid,capability,error");
}

TEST(Execute, SweepCsvColumns) {
    sq::RawConfig raw = platform_raw();
    raw.vRange = std::vector<int>{1, 4};
    raw.wRange = std::vector<int>{3, 5};
    const auto e = sq::execute(sq::Command::Sweep, raw);
    ASSERT_EQ(e.status, sq::kExitOk);
    EXPECT_EQ(first_line_after_comment(e.csv), "v,w,holding,reserve,posting,total,valid,capability");
    EXPECT_EQ(e.doc["result"]["cells"].size(), 12u);
    EXPECT_FALSE(e.doc["result"]["cells"][3]["feasible"].get<bool>());
}

TEST(Execute, CompareReportsBothPoliciesAndForms) {
    const auto e = sq::execute(sq::Command::Compare, platform_raw());
    ASSERT_EQ(e.status, sq::kExitOk);
    EXPECT_EQ(e.doc["result"]["reports"].size(), 4u);
    for (const auto& r : e.doc["result"]["reports"]) {
        EXPECT_TRUE(r["tv_time_average"].is_number());
        EXPECT_TRUE(r["tv_embedded"].is_number());
    }
}

TEST(Execute, AsPrintedFailures) {
    sq::RawConfig raw = platform_raw();
    raw.ladder = "as-printed";
    raw.v = 1;
    EXPECT_EQ(sq::execute(sq::Command::Solve, raw).status, sq::kExitNumerical);
    raw.v = 3;
    EXPECT_EQ(sq::execute(sq::Command::Solve, raw).status, sq::kExitInvalidAnalytic);
}

TEST(Execute, JsonNumbersRoundTrip) {
    const double x = 0.1 + 0.2;
    EXPECT_EQ(std::stod(sq::detail::num(x)), x);
}
