#pragma once

#include "covkl/models.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace covkl {

/// JSON document for a fitted model:
///
///   {
///     "format": "covkl-model", "version": 1,
///     "kind": "GaussCop",
///     "schema": [{"name": "age", "kind": "continuous"}, ...],
///     "labels": [["F", "M"], ...],              // per discrete column
///     "continuous": <fit> | null,               // shared continuous fit
///     "discrete": {"keys": [[0, 1], ...], "pmf": [...], "per_stratum": [<fit>, ...]} | null
///   }
///
/// where <fit> is one of
///   {"type": "GaussDist", "mean": [...], "cov": [[...], ...]}
///   {"type": "IndepCop", "margins": [{"bandwidth": h, "values": [...]}, ...]}
///   {"type": "GaussCop", "margins": [...], "corr": [[...], ...]}
///
/// Numbers are written in shortest round-trip form, so a reloaded model is
/// bit-identical to the saved one.
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);

void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

/// Schema file: JSON list of {"name": ..., "kind": "continuous" | "discrete"}.
Schema schema_from_json(const std::string& text);
Schema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const Schema& schema);

} // namespace covkl
