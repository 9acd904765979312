#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "dvb/scenario.hpp"

namespace dvb {
namespace {

const char* kBenchmark = R"({
  "scenarios": {
    "P0": {
      "rate": {"a1": 0.01, "a2": 0.2, "s_r": 0.01, "r0": 0.05},
      "firm": {"V0": 100, "mu": 0.07, "b": 0.05, "s_V": 0.2},
      "default": {
        "t1": 0.5, "t2": 1.0, "K1": 70, "K2": 80, "R_u": 0.4, "R_e": 0.3,
        "intensity": {"family": "log-reciprocal"}
      }
    },
    "stepped": {
      "rate": {"a1": {"breaks": [0.5], "values": [0.01, 0.02]}, "a2": 0.3, "s_r": 0.015, "r0": 0.04},
      "firm": {"V0": 90, "mu": 0.05, "b": 0.0, "s_V": 0.25},
      "default": {
        "t1": 1.0, "t2": 2.0, "K1": 60, "K2": 65, "R_u": 0.5, "R_e": 0.4,
        "intensity": {"family": "table", "V": [10, 100, 1000], "lambda": [0.3, 0.05, 0.01]}
      },
      "t": 1.25,
      "V1": 95.5,
      "mode": "paper-literal"
    },
    "flat": {
      "rate": {"a1": 0.0, "a2": 0.1, "s_r": 0.0, "r0": 0.02},
      "firm": {"V0": 50, "mu": 0.0, "b": 0.0, "s_V": 0.3},
      "default": {
        "t1": 0.25, "t2": 0.5, "K1": 0, "K2": 0, "R_u": 0.2, "R_e": 0.2,
        "intensity": {"family": "constant", "lambda0": 0.07}
      }
    }
  }
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return text.replace(pos, from.size(), to);
}

std::string error_field(const std::string& text) {
    try {
        parse_scenarios(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

TEST(Scenario, ParsesAllFamilies) {
    const auto file = parse_scenarios(kBenchmark);
    ASSERT_EQ(file.scenarios.size(), 3u);
    const Scenario* p0 = file.find("P0");
    ASSERT_NE(p0, nullptr);
    EXPECT_EQ(p0->firm.V0, 100.0);
    EXPECT_EQ(p0->mode, PricingMode::Corrected);
    EXPECT_EQ(p0->t, 0.0);
    EXPECT_FALSE(p0->V1);

    const Scenario* st = file.find("stepped");
    ASSERT_NE(st, nullptr);
    EXPECT_FALSE(st->a1.is_constant());
    EXPECT_EQ(st->mode, PricingMode::PaperLiteral);
    ASSERT_TRUE(st->V1);
    const auto lam = st->intensity.build();
    EXPECT_NEAR(lam(100.0), 0.05, 1e-15);
    EXPECT_NEAR(lam(1.0), 0.3, 1e-15);
    EXPECT_NEAR(lam(std::sqrt(10.0 * 100.0)), 0.175, 1e-12);

    EXPECT_EQ(file.find("flat")->intensity.kind, IntensityConfig::Kind::Constant);
    EXPECT_EQ(file.find("missing"), nullptr);
}

TEST(Scenario, RoundTripIsFieldForFieldEqual) {
    const auto file = parse_scenarios(kBenchmark);
    const auto again = parse_scenarios(serialize_scenarios(file));
    ASSERT_EQ(again.scenarios.size(), file.scenarios.size());
    for (std::size_t i = 0; i < file.scenarios.size(); ++i) EXPECT_EQ(again.scenarios[i], file.scenarios[i]);
    EXPECT_EQ(serialize_scenarios(again), serialize_scenarios(file));
}

TEST(Scenario, ToInputsMatchesFields) {
    const auto file = parse_scenarios(kBenchmark);
    const auto in = file.find("P0")->to_inputs();
    EXPECT_EQ(in.rate_model, ShortRateModel::vasicek(0.01, 0.2, 0.01, 1.0));
    EXPECT_EQ(in.r, 0.05);
    EXPECT_EQ(in.spec.K2, 80.0);
    EXPECT_EQ(in.spec.intensity.family(), IntensityFunction::Family::LogReciprocal);
}

TEST(Scenario, MissingFieldIsNamed) {
    EXPECT_EQ(error_field(replace(kBenchmark, R"(, "s_V": 0.2})", "}")), "/scenarios/P0/firm/s_V");
}

TEST(Scenario, UnknownKeyIsAnError) {
    EXPECT_EQ(error_field(replace(kBenchmark, R"("R_u": 0.4,)", R"("R_u": 0.4, "Ru": 0.4,)")),
              "/scenarios/P0/default/Ru");
    EXPECT_EQ(error_field(replace(kBenchmark, R"("scenarios": {)", R"("version": 1, "scenarios": {)")), "/version");
}

TEST(Scenario, WrongTypeIsNamed) {
    EXPECT_EQ(error_field(replace(kBenchmark, R"("V0": 100)", R"("V0": "100")")), "/scenarios/P0/firm/V0");
}

TEST(Scenario, ModelInvariantsAreChecked) {
    EXPECT_EQ(error_field(replace(kBenchmark, R"("R_e": 0.3)", R"("R_e": 1.3)")), "/scenarios/P0");
    EXPECT_EQ(error_field(replace(kBenchmark, R"("V1": 95.5)", R"("V1": -1)")), "/scenarios/stepped");
}

TEST(Scenario, BadFamilyAndTable) {
    EXPECT_EQ(error_field(replace(kBenchmark, R"("family": "log-reciprocal")", R"("family": "inverse")")),
              "/scenarios/P0/default/intensity/family");
    EXPECT_EQ(error_field(replace(kBenchmark, R"("V": [10, 100, 1000])", R"("V": [10, 1000, 100])")),
              "/scenarios/stepped/default/intensity");
}

TEST(Scenario, SyntaxErrorReportsLine) {
    const std::string field = error_field(replace(kBenchmark, R"("r0": 0.05})", R"("r0": 0.05,})"));
    EXPECT_EQ(field.rfind("line 4:", 0), 0u) << field;
}

TEST(Scenario, SetFieldAndSweepableNames) {
    auto file = parse_scenarios(kBenchmark);
    Scenario s = *file.find("P0");
    for (const auto& f : sweepable_fields()) {
        if (f == "V1" || f == "lambda0") continue;
        Scenario copy = s;
        EXPECT_NO_THROW(set_scenario_field(copy, f, 0.123)) << f;
    }
    set_scenario_field(s, "V0", 120.0);
    EXPECT_EQ(s.firm.V0, 120.0);
    EXPECT_THROW(set_scenario_field(s, "nope", 1.0), ConfigError);
    Scenario stepped = *file.find("stepped");
    EXPECT_THROW(set_scenario_field(stepped, "a1", 0.1), ConfigError);
}

}  // namespace
}  // namespace dvb
