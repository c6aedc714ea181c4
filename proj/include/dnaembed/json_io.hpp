#pragma once

#include <json.hpp>

#include "dnaembed/nets.hpp"
#include "dnaembed/trainer.hpp"

namespace dnaembed {

nlohmann::json spec_to_json(const ModelSpec& spec);
/// Missing keys keep their values from base; unknown keys are rejected.
ModelSpec spec_from_json(const nlohmann::json& j, ModelSpec base = {});

/// Flat object: epochs, batch_size, optimizer, lr, beta1, beta2, eps, loss,
/// epsilon_dhat, space, seed, shuffle.
nlohmann::json train_config_to_json(const TrainConfig& cfg);
/// Same key rules as spec_from_json. scale_override is never read from files.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

}  // namespace dnaembed
