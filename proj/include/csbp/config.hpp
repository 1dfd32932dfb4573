#pragma once

// Model configuration files: a single JSON document describing the branching
// mechanism, the catastrophe environment, or a cell model that induces both.

#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "csbp/cellmodel.hpp"
#include "csbp/env.hpp"
#include "csbp/mechanisms.hpp"

namespace csbp {

struct ModelConfig {
    double x0 = 1.0;
    std::optional<StableMechanism> stable;
    std::optional<GeneralMechanism> general;
    std::optional<EnvironmentSpec> environment;
    std::optional<CellModel> cell;
    nlohmann::json raw; // echoed into run manifests

    bool has_mechanism() const { return stable.has_value() || general.has_value(); }
    double growth() const;
    double beta() const; // 1 for general mechanisms

    // Environment with drift equal to the mechanism growth (the K used by
    // survival quantities). Throws if either half is missing.
    EnvironmentSpec environment_for_mechanism() const;
};

ModelConfig parse_model(const nlohmann::json& doc);
ModelConfig load_model(const std::string& path);

} // namespace csbp
