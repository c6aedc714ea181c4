#include "dnaembed/json_io.hpp"

#include <stdexcept>
#include <string>

namespace dnaembed {

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"optimizer", optimizer_name(cfg.optimizer.kind)},
          {"lr", cfg.optimizer.lr},
          {"beta1", cfg.optimizer.beta1},
          {"beta2", cfg.optimizer.beta2},
          {"eps", cfg.optimizer.eps},
          {"loss", loss_name(cfg.loss.kind)},
          {"epsilon_dhat", cfg.loss.epsilon_dhat},
          {"space", space_name(cfg.space)},
          {"seed", cfg.seed},
          {"shuffle", cfg.shuffle}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base) {
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") base.epochs = value.get<std::size_t>();
    else if (key == "batch_size") base.batch_size = value.get<std::size_t>();
    else if (key == "optimizer") base.optimizer.kind = parse_optimizer(value.get<std::string>());
    else if (key == "lr") base.optimizer.lr = value.get<double>();
    else if (key == "beta1") base.optimizer.beta1 = value.get<double>();
    else if (key == "beta2") base.optimizer.beta2 = value.get<double>();
    else if (key == "eps") base.optimizer.eps = value.get<double>();
    else if (key == "loss") base.loss.kind = parse_loss(value.get<std::string>());
    else if (key == "epsilon_dhat") base.loss.epsilon_dhat = value.get<double>();
    else if (key == "space") base.space = parse_space(value.get<std::string>());
    else if (key == "seed") base.seed = value.get<std::uint64_t>();
    else if (key == "shuffle") base.shuffle = value.get<bool>();
    else throw std::invalid_argument("unknown training config key '" + key + "'");
  }
  return base;
}

}  // namespace dnaembed
