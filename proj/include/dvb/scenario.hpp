#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dvb/pricer.hpp"

namespace dvb {

/// Invalid scenario input. `field()` is a JSON-pointer-style path such as
/// "/scenarios/P0/firm/s_V", or "line:column" for syntax errors.
class ConfigError : public std::runtime_error {
   public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

   private:
    std::string field_;
};

/// Plain-data description of an intensity family, kept alongside the built
/// function so scenarios serialize back to what was read.
struct IntensityConfig {
    enum class Kind { LogReciprocal, Constant, Table };

    Kind kind = Kind::LogReciprocal;
    double lambda0 = 0.0;
    /// Table family: lambda is linear in ln V between knots, flat outside.
    std::vector<double> V;
    std::vector<double> lambda;

    IntensityFunction build() const;

    friend bool operator==(const IntensityConfig&, const IntensityConfig&) = default;
};

struct Scenario {
    std::string name;
    PiecewiseConstant a1;
    PiecewiseConstant a2;
    PiecewiseConstant s_r;
    double r0 = 0.0;
    FirmModel firm;
    double t1 = 0.5;
    double t2 = 1.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double R_u = 0.0;
    double R_e = 0.0;
    IntensityConfig intensity;
    double t = 0.0;
    std::optional<double> V1;
    PricingMode mode = PricingMode::Corrected;

    /// Builds and validates pricing inputs; DomainError from the model layers
    /// is rethrown as ConfigError addressed at this scenario.
    PricingInputs to_inputs(AIntegrand integrand = AIntegrand::Standard) const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScenarioFile {
    std::vector<Scenario> scenarios;

    const Scenario* find(std::string_view name) const;
};

/// Parses a scenario document. Unknown keys, missing fields, wrong types, and
/// model-invariant violations all raise ConfigError naming the field.
ScenarioFile parse_scenarios(std::string_view text);
ScenarioFile load_scenarios(const std::filesystem::path& path);

/// Inverse of parse_scenarios (pretty-printed JSON).
std::string serialize_scenarios(const ScenarioFile& file);

/// Numeric fields that `sweep --axis` can vary.
const std::vector<std::string>& sweepable_fields();

/// Sets one numeric field; throws ConfigError for unknown names or fields that
/// are not scalar in this scenario (e.g. a1 given as a step function).
void set_scenario_field(Scenario& s, std::string_view field, double value);

}  // namespace dvb
