#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "codeprov/models.hpp"

namespace codeprov {

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& value);

// Rebuild a vector-input model from its {format_version, kind, input_dim,
// parameters} envelope. Covers logistic, cart, forest, boosted, mlp and
// gmm; the bayes model has its own loader (it consumes tokens, not
// vectors).
std::unique_ptr<Model> model_from_envelope(const nlohmann::json& envelope);

}  // namespace codeprov
