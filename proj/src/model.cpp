#include "fmqed/model.hpp"

#include "fmqed/errors.hpp"

namespace fmqed {

Model::Model(const SimulationConfig& config) : config_(config) {
  config_.validate();
  lambda1_ = build_mode_set(config_, 1);
  lambda2_ = build_mode_set(config_, 2);
  lambda3_ = build_mode_set(config_, 3);
  finish();
}

Model::Model(const SimulationConfig& config, const std::vector<Vec3i>& prime1,
             const std::vector<Vec3i>& prime2, const std::vector<Vec3i>& prime3)
    : config_(config) {
  config_.validate();
  lambda1_ = mode_set_from(prime1, config_.L, 1);
  lambda2_ = mode_set_from(prime2, config_.L, 2);
  lambda3_ = mode_set_from(prime3, config_.L, 3);
  finish();
}

void Model::finish() {
  for (const auto& w : lambda2_.lambda_prime)
    if (!lambda3_.contains_prime(w.s))
      throw ConfigError("coupled mode set must be contained in the free-field mode set");
  frame_ = build_polarization(lambda3_);
  potential_ = std::make_unique<VectorPotential>(config_, lambda3_, lambda2_, frame_);
  coulomb_ = std::make_unique<CoulombTerm>(config_, lambda1_);
  omega_ = field_frequencies(lambda3_, config_);
}

}  // namespace fmqed
