#pragma once

// Run configurations, report serialization and the simulate / design / poles
// commands behind the fracreg executable.

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracreg/charpoly.hpp"
#include "fracreg/model.hpp"
#include "fracreg/simulate.hpp"

namespace fracreg::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDiverged = 3,
    kUnstableDesign = 4,
    kSolverFailure = 5,
};

// Invalid configuration; key() is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

enum class DesignKind { Pd, Pi };

struct DesignBlock {
    DesignKind kind = DesignKind::Pd;
    std::vector<std::complex<double>> poles;
    std::optional<double> ess_percent;
    std::optional<double> K;
    bool integer = false; // PD with delta fixed at 1

    bool operator==(const DesignBlock&) const = default;
};

struct OutputBlock {
    std::string dir = ".";
    std::string trajectory = "trajectory.csv";
    std::string report = "report.json";

    bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
    Plant plant;
    std::optional<Controller> controller;
    std::optional<DesignBlock> design;
    SimConfig sim;
    std::optional<RootFindConfig> roots;
    OutputBlock output;

    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

// Trajectory as CSV: header t,w,y,x1,..,xn; 15 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::size_t dim);

// Step cap from FRACREG_MAX_STEPS, or the default.
std::size_t max_steps_from_env();

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out_dir;
};

int cmd_simulate(const CommandOptions& opts, std::ostream& err);
int cmd_design(const CommandOptions& opts, std::ostream& err);
int cmd_poles(const CommandOptions& opts, std::ostream& err);

} // namespace fracreg::cli
