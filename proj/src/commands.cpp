#include "dvb/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "dvb/mcoracle.hpp"
#include "dvb/scenario.hpp"

namespace dvb {

namespace {

std::string num(double v) { return fmt::format("{:.15g}", v); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_field(fields[i]);
    }
    return line + "\n";
}

// Destination for CSV text: a file, stdout ("-"), or nowhere.
class CsvSink {
   public:
    CsvSink(const std::string& target, std::ostream& out) {
        if (target.empty()) return;
        if (target == "-") {
            stream_ = &out;
            return;
        }
        file_ = std::make_unique<std::ofstream>(target);
        if (!*file_) throw ConfigError(target, "cannot open CSV output for writing");
        stream_ = file_.get();
    }

    void write(const std::string& text) {
        if (stream_) *stream_ << text;
    }

   private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

struct CommonOptions {
    std::string file;
    std::string scenario;
    std::string mode;
    bool paper_literal_A = false;

    AIntegrand integrand() const { return paper_literal_A ? AIntegrand::PaperLiteral : AIntegrand::Standard; }
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_mode) {
    cmd->add_option("file", opts.file, "Scenario file (JSON)")->required();
    cmd->add_option("--scenario", opts.scenario, "Only this named scenario (default: all)");
    if (with_mode) {
        cmd->add_option("--mode", opts.mode, "Override pricing mode")
            ->check(CLI::IsMember({"corrected", "paper-literal"}));
    }
    cmd->add_flag("--paper-literal-A", opts.paper_literal_A,
                  "Diagnostic: use a2*B(u) instead of a1*B(u) in the A(t) integrand");
}

std::vector<Scenario> select(const CommonOptions& opts) {
    ScenarioFile file = load_scenarios(opts.file);
    if (opts.scenario.empty()) return file.scenarios;
    const Scenario* s = file.find(opts.scenario);
    if (!s) throw ConfigError("--scenario", fmt::format("no scenario named '{}' in {}", opts.scenario, opts.file));
    return {*s};
}

PricingMode mode_for(const Scenario& s, const CommonOptions& opts) {
    return opts.mode.empty() ? s.mode : *parse_pricing_mode(opts.mode);
}

void print_price(std::ostream& out, const Scenario& s, const PriceResult& res, double spread) {
    fmt::print(out, "{} [{}]\n", s.name, to_string(res.mode));
    fmt::print(out, "  price         {}\n", num(res.price));
    fmt::print(out, "  zcb           {}\n", num(res.zcb));
    fmt::print(out, "  spread        {}\n", num(spread));
    if (res.regime == Regime::AfterFirstAnnouncement) {
        fmt::print(out, "  regime        after t1 (declared V1 = {})\n", num(*s.V1));
        return;
    }
    const PriceTerms& t = res.terms;
    fmt::print(out, "  expected_leg  {}\n", num(t.expected_default));
    fmt::print(out, "  I1            {}\n", num(t.I1));
    fmt::print(out, "  I21           {}\n", num(t.I21));
    fmt::print(out, "  I22           {}\n", num(t.I22));
    fmt::print(out, "  I23           {}\n", num(t.I23));
    fmt::print(out, "  I24           {}\n", num(t.I24));
}

int cmd_price(const CommonOptions& opts, const std::string& csv_target, std::ostream& out) {
    const auto scenarios = select(opts);
    CsvSink csv(csv_target, out);
    csv.write(csv_line(price_csv_columns()));
    for (const Scenario& s : scenarios) {
        const PricingInputs in = s.to_inputs(opts.integrand());
        const PriceResult res = price_full(in, mode_for(s, opts));
        const double spread = credit_spread(res, in.t, in.spec.t2);
        if (csv_target != "-") print_price(out, s, res, spread);
        csv.write(price_csv_row(s.name, res, spread));
    }
    return kExitOk;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) throw ConfigError("--grid", "empty grid value");
        const auto last = item.find_last_not_of(" \t");
        const std::string token = item.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size() || !std::isfinite(v)) {
            throw ConfigError("--grid", fmt::format("'{}' is not a number", token));
        }
        grid.push_back(v);
    }
    if (grid.empty()) throw ConfigError("--grid", "grid is empty");
    return grid;
}

int cmd_sweep(const CommonOptions& opts, const std::string& axis, const std::string& grid_text,
              const std::string& csv_target, std::ostream& out) {
    const auto& fields = sweepable_fields();
    if (std::find(fields.begin(), fields.end(), axis) == fields.end()) {
        throw ConfigError("--axis", fmt::format("'{}' is not a sweepable field", axis));
    }
    const std::vector<double> grid = parse_grid(grid_text);
    const auto scenarios = select(opts);
    CsvSink csv(csv_target.empty() ? "-" : csv_target, out);

    std::vector<std::string> header = {"scenario", "axis", "value"};
    for (const auto& c : price_csv_columns()) {
        if (c != "scenario") header.push_back(c);
    }
    csv.write(csv_line(header));
    for (const Scenario& base : scenarios) {
        for (double v : grid) {
            Scenario s = base;
            set_scenario_field(s, axis, v);
            const PricingInputs in = s.to_inputs(opts.integrand());
            const PriceResult res = price_full(in, mode_for(s, opts));
            const double spread = credit_spread(res, in.t, in.spec.t2);
            // Reuse the price row, splicing axis and value after the scenario name.
            std::string row = price_csv_row(s.name, res, spread);
            const std::string name_field = csv_field(s.name);
            row.insert(name_field.size(), "," + csv_field(axis) + "," + num(v));
            csv.write(row);
        }
    }
    return kExitOk;
}

struct ValidateOptions {
    std::uint64_t paths = 1'000'000;
    std::uint64_t seed = McConfig{}.seed;
    int steps_per_year = 64;
    unsigned threads = 0;
    bool antithetic = false;
};

int cmd_validate(const CommonOptions& opts, const ValidateOptions& v, std::ostream& out) {
    const auto scenarios = select(opts);
    McConfig cfg;
    cfg.n_paths = v.paths;
    cfg.seed = v.seed;
    cfg.rate_steps_per_year = v.steps_per_year;
    cfg.threads = v.threads;
    cfg.antithetic = v.antithetic;
    cfg.validate();

    bool all_pass = true;
    for (const Scenario& s : scenarios) {
        const PricingInputs in = s.to_inputs(opts.integrand());
        const McEstimate mc = simulate_price(in, cfg);
        const PriceResult corrected = price_full(in, PricingMode::Corrected);
        const PriceResult literal = price_full(in, PricingMode::PaperLiteral);
        const double z_corr = z_score(corrected.price, mc);
        const double z_lit = z_score(literal.price, mc);
        const bool pass = std::abs(z_corr) <= 3.0;
        all_pass = all_pass && pass;

        fmt::print(out, "{}\n", s.name);
        fmt::print(out, "  monte carlo    {} +- {}  ({} paths, seed {}, {} steps/year{})\n", num(mc.price),
                   num(mc.std_error), mc.n_paths, mc.seed, cfg.rate_steps_per_year,
                   cfg.antithetic ? ", antithetic" : "");
        fmt::print(out, "  corrected      {}  z = {:.3f}\n", num(corrected.price), z_corr);
        fmt::print(out, "  paper-literal  {}  z = {:.3f}\n", num(literal.price), z_lit);
        if (in.t < in.spec.t1) {
            const double mc_leg = mc.leg_breakdown.expected_t1;
            const double se_leg = mc.leg_std_error.expected_t1;
            const double leg_corr = corrected.terms.expected_default;
            const double leg_lit = literal.terms.expected_default;
            fmt::print(out, "  leg expected_t1\n");
            fmt::print(out, "    monte carlo    {} +- {}\n", num(mc_leg), num(se_leg));
            fmt::print(out, "    corrected      {}  z = {:.3f}\n", num(leg_corr), z_score(leg_corr, mc_leg, se_leg));
            fmt::print(out, "    paper-literal  {}  z = {:.3f}\n", num(leg_lit), z_score(leg_lit, mc_leg, se_leg));
        }
        const LegBreakdown& legs = mc.leg_breakdown;
        const LegBreakdown& ses = mc.leg_std_error;
        fmt::print(out, "  mc legs\n");
        fmt::print(out, "    survive_both     {} +- {}\n", num(legs.survive_both), num(ses.survive_both));
        fmt::print(out, "    unexpected_leg1  {} +- {}\n", num(legs.unexpected_leg1), num(ses.unexpected_leg1));
        fmt::print(out, "    unexpected_leg2  {} +- {}\n", num(legs.unexpected_leg2), num(ses.unexpected_leg2));
        fmt::print(out, "    expected_t1      {} +- {}\n", num(legs.expected_t1), num(ses.expected_t1));
        fmt::print(out, "    expected_t2      {} +- {}\n", num(legs.expected_t2), num(ses.expected_t2));
        fmt::print(out, "  result         {}\n", pass ? "PASS (corrected |z| <= 3)" : "FAIL (corrected |z| > 3)");
    }
    return all_pass ? kExitOk : kExitValidationFailed;
}

}  // namespace

const std::vector<std::string>& price_csv_columns() {
    static const std::vector<std::string> columns = {"scenario", "mode", "price", "zcb",  "spread",      "I1",
                                                     "I21",      "I22",  "I23",   "I24",  "expected_leg"};
    return columns;
}

std::string price_csv_row(const std::string& scenario, const PriceResult& r, double spread) {
    const PriceTerms& t = r.terms;
    return csv_line({scenario, std::string(to_string(r.mode)), num(r.price), num(r.zcb), num(spread), num(t.I1),
                     num(t.I21), num(t.I22), num(t.I23), num(t.I24), num(t.expected_default)});
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Defaultable bond pricing with declared firm value"};
    app.require_subcommand(1);

    CommonOptions price_opts;
    std::string price_csv;
    auto* price = app.add_subcommand("price", "Closed-form price with its term decomposition");
    add_common(price, price_opts, true);
    price->add_option("--csv", price_csv, "Write CSV rows to PATH ('-' for stdout)");

    CommonOptions sweep_opts;
    std::string axis, grid, sweep_csv;
    auto* sweep = app.add_subcommand("sweep", "Price over a grid of one scenario field (CSV)");
    add_common(sweep, sweep_opts, true);
    sweep->add_option("--axis", axis, "Field to vary")->required();
    sweep->add_option("--grid", grid, "Comma-separated values")->required();
    sweep->add_option("--csv", sweep_csv, "Write CSV to PATH instead of stdout");

    CommonOptions validate_opts;
    ValidateOptions v;
    auto* validate = app.add_subcommand("validate", "Compare both closed forms against Monte Carlo");
    add_common(validate, validate_opts, false);
    validate->add_option("--paths", v.paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
    validate->add_option("--seed", v.seed, "RNG seed");
    validate->add_option("--steps-per-year", v.steps_per_year, "Euler steps per year for the short rate")
        ->check(CLI::PositiveNumber);
    validate->add_option("--threads", v.threads, "Worker threads (0 = all cores)");
    validate->add_flag("--antithetic", v.antithetic, "Use antithetic variates");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInputError;
    }

    try {
        if (price->parsed()) return cmd_price(price_opts, price_csv, out);
        if (sweep->parsed()) return cmd_sweep(sweep_opts, axis, grid, sweep_csv, out);
        return cmd_validate(validate_opts, v, out);
    } catch (const ConfigError& e) {
        fmt::print(err, "input error: {}\n", e.what());
        return kExitInputError;
    } catch (const DomainError& e) {
        fmt::print(err, "input error: {}\n", e.what());
        return kExitInputError;
    } catch (const ConvergenceError& e) {
        fmt::print(err, "numerical failure: {} (best estimate {}, error bound {})\n", e.what(), num(e.estimate()),
                   num(e.error_bound()));
        return kExitNumericalFailure;
    }
}

}  // namespace dvb
