#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "msbl/coefficients.hpp"
#include "msbl/experiments.hpp"
#include "msbl/integrators.hpp"

namespace msbl {

/// Malformed or out-of-range configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every recognised key with its default value; null marks "use the model's own value".
nlohmann::json default_config();

struct ConfigSources {
    std::optional<std::string> file;      // JSON text file
    std::vector<std::string> sets;        // "dotted.key=value"
    std::optional<std::uint64_t> seed;    // --seed
    std::optional<std::string> env_seed;  // MSBL_SEED
};

/// Merged, type-checked run configuration.
class RunConfig {
public:
    /// Merges defaults <- file <- --set <- MSBL_SEED <- --seed. Unknown keys are rejected.
    static RunConfig load(const ConfigSources& src);
    static RunConfig from_json(const nlohmann::json& overrides);

    const nlohmann::json& doc() const { return doc_; }
    nlohmann::json& doc() { return doc_; }
    /// FNV-1a of the canonical (sorted-key) dump.
    std::string hash() const;

    ModelSpec model() const;
    SimParams sim() const;
    /// Simulation parameters with n_paths taken from the given section.
    SimParams sim_for(const std::string& section) const;
    SineField x0(std::size_t m) const;
    SineField y0(std::size_t m) const;

    std::vector<double> eps_grid(const std::string& section) const;
    double number(const std::string& dotted) const;
    std::size_t count(const std::string& dotted) const;
    bool flag(const std::string& dotted) const;
    std::string text(const std::string& dotted) const;
    std::vector<double> numbers(const std::string& dotted) const;

private:
    const nlohmann::json& at(const std::string& dotted) const;
    nlohmann::json doc_;
};

/// Parses "x" coefficient CSV: one value per line or "mode,value" rows; a
/// non-numeric first line is treated as a header.
std::vector<double> parse_coefficient_csv(const std::string& text);

}  // namespace msbl
