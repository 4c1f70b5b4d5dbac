#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "msbl/coefficients.hpp"
#include "msbl/experiments.hpp"
#include "msbl/frozen.hpp"
#include "msbl/integrators.hpp"

namespace msbl {

nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const FbarEstimate& e);
nlohmann::json to_json(const SimParams& p);
nlohmann::json to_json(const StudyProtocol& p);
nlohmann::json to_json(const BiasGuard& g);
nlohmann::json to_json(const ErrorReport& r);
nlohmann::json to_json(const MomentReport& r);
nlohmann::json to_json(const GalerkinReport& r);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// eps,error,std_err
std::string error_csv(const ErrorReport& r);
/// log10_eps,log10_error,fit_line
std::string plot_csv(const ErrorReport& r);
/// t,mode_1,...,mode_m
std::string trajectory_csv(const Trajectory& tr);
std::string trajectory_kind_name(TrajectoryKind k);

/// 64-bit FNV-1a as 16 hex digits.
std::string content_hash(std::string_view bytes);

/// Creates <out>/<UTC timestamp>_<hash prefix>, adding a numeric suffix if taken.
std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& hash);

void write_text(const std::filesystem::path& file, std::string_view text);

}  // namespace msbl
