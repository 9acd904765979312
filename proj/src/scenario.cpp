#include "dvb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "json.hpp"

namespace dvb {

namespace {

using Json = nlohmann::ordered_json;

std::string join_path(const std::string& base, std::string_view key) {
    std::string escaped;
    for (char c : key) {
        if (c == '~') escaped += "~0";
        else if (c == '/') escaped += "~1";
        else escaped += c;
    }
    return base + "/" + escaped;
}

// Tracks which keys of a JSON object were consumed so leftovers can be reported.
class ObjectReader {
   public:
    ObjectReader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }
    std::string path(std::string_view key) const { return join_path(path_, key); }

    const Json& required(const std::string& key) {
        if (!node_.contains(key)) throw ConfigError(path(key), "missing required field");
        seen_.insert(key);
        return node_.at(key);
    }

    const Json* optional(const std::string& key) {
        if (!node_.contains(key)) return nullptr;
        seen_.insert(key);
        return &node_.at(key);
    }

    double number(const std::string& key) { return as_number(required(key), path(key)); }

    std::optional<double> optional_number(const std::string& key) {
        const Json* j = optional(key);
        if (!j) return std::nullopt;
        return as_number(*j, path(key));
    }

    std::string string(const std::string& key) {
        const Json& j = required(key);
        if (!j.is_string()) throw ConfigError(path(key), "expected a string");
        return j.get<std::string>();
    }

    void finish() const {
        for (const auto& item : node_.items()) {
            if (!seen_.count(item.key())) throw ConfigError(path(item.key()), "unknown field");
        }
    }

    static double as_number(const Json& j, const std::string& where) {
        if (!j.is_number()) throw ConfigError(where, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) throw ConfigError(where, "expected a finite number");
        return v;
    }

    static std::vector<double> as_numbers(const Json& j, const std::string& where) {
        if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "/" + std::to_string(i)));
        return out;
    }

   private:
    const Json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

PiecewiseConstant read_step_function(const Json& j, const std::string& where) {
    if (j.is_number()) return PiecewiseConstant(ObjectReader::as_number(j, where));
    ObjectReader obj(j, where);
    auto breaks = ObjectReader::as_numbers(obj.required("breaks"), obj.path("breaks"));
    auto values = ObjectReader::as_numbers(obj.required("values"), obj.path("values"));
    obj.finish();
    try {
        return PiecewiseConstant(std::move(breaks), std::move(values));
    } catch (const DomainError& e) {
        throw ConfigError(where, e.what());
    }
}

Json write_step_function(const PiecewiseConstant& f) {
    if (f.is_constant()) return f.values()[0];
    Json j;
    j["breaks"] = std::vector<double>(f.breaks().begin(), f.breaks().end());
    j["values"] = std::vector<double>(f.values().begin(), f.values().end());
    return j;
}

IntensityConfig read_intensity(const Json& j, const std::string& where) {
    ObjectReader obj(j, where);
    const std::string family = obj.string("family");
    IntensityConfig cfg;
    if (family == "log-reciprocal") {
        cfg.kind = IntensityConfig::Kind::LogReciprocal;
    } else if (family == "constant") {
        cfg.kind = IntensityConfig::Kind::Constant;
        cfg.lambda0 = obj.number("lambda0");
    } else if (family == "table") {
        cfg.kind = IntensityConfig::Kind::Table;
        cfg.V = ObjectReader::as_numbers(obj.required("V"), obj.path("V"));
        cfg.lambda = ObjectReader::as_numbers(obj.required("lambda"), obj.path("lambda"));
    } else {
        throw ConfigError(obj.path("family"),
                          fmt::format("unknown intensity family '{}' (expected log-reciprocal, constant, or table)",
                                      family));
    }
    obj.finish();
    try {
        (void)cfg.build();
    } catch (const DomainError& e) {
        throw ConfigError(where, e.what());
    }
    return cfg;
}

Json write_intensity(const IntensityConfig& cfg) {
    Json j;
    switch (cfg.kind) {
        case IntensityConfig::Kind::LogReciprocal:
            j["family"] = "log-reciprocal";
            break;
        case IntensityConfig::Kind::Constant:
            j["family"] = "constant";
            j["lambda0"] = cfg.lambda0;
            break;
        case IntensityConfig::Kind::Table:
            j["family"] = "table";
            j["V"] = cfg.V;
            j["lambda"] = cfg.lambda;
            break;
    }
    return j;
}

Scenario read_scenario(const std::string& name, const Json& j, const std::string& where) {
    ObjectReader obj(j, where);
    Scenario s;
    s.name = name;

    {
        ObjectReader rate(obj.required("rate"), obj.path("rate"));
        s.a1 = read_step_function(rate.required("a1"), rate.path("a1"));
        s.a2 = read_step_function(rate.required("a2"), rate.path("a2"));
        s.s_r = read_step_function(rate.required("s_r"), rate.path("s_r"));
        s.r0 = rate.number("r0");
        rate.finish();
    }
    {
        ObjectReader firm(obj.required("firm"), obj.path("firm"));
        s.firm.V0 = firm.number("V0");
        s.firm.mu = firm.number("mu");
        s.firm.b = firm.number("b");
        s.firm.s_V = firm.number("s_V");
        firm.finish();
    }
    {
        ObjectReader def(obj.required("default"), obj.path("default"));
        s.t1 = def.number("t1");
        s.t2 = def.number("t2");
        s.K1 = def.number("K1");
        s.K2 = def.number("K2");
        s.R_u = def.number("R_u");
        s.R_e = def.number("R_e");
        s.intensity = read_intensity(def.required("intensity"), def.path("intensity"));
        def.finish();
    }
    s.t = obj.optional_number("t").value_or(0.0);
    s.V1 = obj.optional_number("V1");
    if (const Json* mode = obj.optional("mode")) {
        if (!mode->is_string()) throw ConfigError(obj.path("mode"), "expected a string");
        const auto parsed = parse_pricing_mode(mode->get<std::string>());
        if (!parsed) throw ConfigError(obj.path("mode"), "expected 'corrected' or 'paper-literal'");
        s.mode = *parsed;
    }
    obj.finish();
    (void)s.to_inputs();
    return s;
}

std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return fmt::format("line {}:{}", line, column);
}

double interpolate_table(const std::vector<double>& Vs, const std::vector<double>& lams, double V) {
    if (V <= Vs.front()) return lams.front();
    if (V >= Vs.back()) return lams.back();
    const auto it = std::upper_bound(Vs.begin(), Vs.end(), V);
    const std::size_t k = static_cast<std::size_t>(it - Vs.begin());
    const double x0 = std::log(Vs[k - 1]);
    const double x1 = std::log(Vs[k]);
    const double w = (std::log(V) - x0) / (x1 - x0);
    return lams[k - 1] + w * (lams[k] - lams[k - 1]);
}

}  // namespace

IntensityFunction IntensityConfig::build() const {
    switch (kind) {
        case Kind::LogReciprocal:
            return IntensityFunction::log_reciprocal();
        case Kind::Constant:
            return IntensityFunction::constant(lambda0);
        case Kind::Table:
            break;
    }
    if (V.empty() || V.size() != lambda.size()) {
        throw DomainError("table intensity needs matching, non-empty V and lambda arrays");
    }
    for (std::size_t i = 0; i < V.size(); ++i) {
        if (!(V[i] > 0.0)) throw DomainError("table intensity knots V must be positive");
        if (i > 0 && !(V[i] > V[i - 1])) throw DomainError("table intensity knots V must be strictly increasing");
    }
    return IntensityFunction::custom(
        [Vs = V, lams = lambda](double v) { return interpolate_table(Vs, lams, v); }, "table");
}

PricingInputs Scenario::to_inputs(AIntegrand integrand) const {
    const std::string where = join_path("/scenarios", name);
    try {
        PricingInputs in{ShortRateModel(a1, a2, s_r, t2),
                         firm,
                         DefaultSpec{t1, t2, K1, K2, R_u, R_e, intensity.build()},
                         r0,
                         t,
                         V1,
                         integrand};
        in.validate();
        return in;
    } catch (const DomainError& e) {
        throw ConfigError(where, e.what());
    }
}

const Scenario* ScenarioFile::find(std::string_view name) const {
    for (const Scenario& s : scenarios) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

ScenarioFile parse_scenarios(std::string_view text) {
    Json root;
    try {
        root = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ConfigError(line_column(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
    }
    ObjectReader top(root, "");
    const Json& list = top.required("scenarios");
    top.finish();
    if (!list.is_object()) throw ConfigError("/scenarios", "expected an object of named scenarios");
    if (list.empty()) throw ConfigError("/scenarios", "no scenarios defined");

    ScenarioFile file;
    for (const auto& item : list.items()) {
        file.scenarios.push_back(read_scenario(item.key(), item.value(), join_path("/scenarios", item.key())));
    }
    return file;
}

ScenarioFile load_scenarios(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open scenario file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenarios(buffer.str());
}

std::string serialize_scenarios(const ScenarioFile& file) {
    Json root;
    Json& list = root["scenarios"];
    list = Json::object();
    for (const Scenario& s : file.scenarios) {
        Json j;
        j["rate"]["a1"] = write_step_function(s.a1);
        j["rate"]["a2"] = write_step_function(s.a2);
        j["rate"]["s_r"] = write_step_function(s.s_r);
        j["rate"]["r0"] = s.r0;
        j["firm"]["V0"] = s.firm.V0;
        j["firm"]["mu"] = s.firm.mu;
        j["firm"]["b"] = s.firm.b;
        j["firm"]["s_V"] = s.firm.s_V;
        j["default"]["t1"] = s.t1;
        j["default"]["t2"] = s.t2;
        j["default"]["K1"] = s.K1;
        j["default"]["K2"] = s.K2;
        j["default"]["R_u"] = s.R_u;
        j["default"]["R_e"] = s.R_e;
        j["default"]["intensity"] = write_intensity(s.intensity);
        j["t"] = s.t;
        if (s.V1) j["V1"] = *s.V1;
        j["mode"] = std::string(to_string(s.mode));
        list[s.name] = std::move(j);
    }
    return root.dump(2) + "\n";
}

const std::vector<std::string>& sweepable_fields() {
    static const std::vector<std::string> fields = {"V0", "mu",  "b",  "s_V", "t1", "t2", "K1",
                                                    "K2", "R_u", "R_e", "r0", "t",  "V1", "lambda0",
                                                    "a1", "a2",  "s_r"};
    return fields;
}

void set_scenario_field(Scenario& s, std::string_view field, double value) {
    auto scalar = [&](PiecewiseConstant& f) {
        if (!f.is_constant()) {
            throw ConfigError(std::string(field), "cannot sweep a piecewise-constant coefficient");
        }
        f = PiecewiseConstant(value);
    };
    if (field == "V0") s.firm.V0 = value;
    else if (field == "mu") s.firm.mu = value;
    else if (field == "b") s.firm.b = value;
    else if (field == "s_V") s.firm.s_V = value;
    else if (field == "t1") s.t1 = value;
    else if (field == "t2") s.t2 = value;
    else if (field == "K1") s.K1 = value;
    else if (field == "K2") s.K2 = value;
    else if (field == "R_u") s.R_u = value;
    else if (field == "R_e") s.R_e = value;
    else if (field == "r0") s.r0 = value;
    else if (field == "t") s.t = value;
    else if (field == "V1") s.V1 = value;
    else if (field == "lambda0") {
        if (s.intensity.kind != IntensityConfig::Kind::Constant) {
            throw ConfigError(std::string(field), "lambda0 applies only to the constant intensity family");
        }
        s.intensity.lambda0 = value;
    } else if (field == "a1") scalar(s.a1);
    else if (field == "a2") scalar(s.a2);
    else if (field == "s_r") scalar(s.s_r);
    else {
        throw ConfigError(std::string(field), "not a sweepable numeric field");
    }
}

}  // namespace dvb
