#pragma once

#include <string>

#include "slim/pipeline.hpp"
#include "slim/synth.hpp"

namespace slim::model_io {

void save_model(const SlimModel& model, const std::string& path);
SlimModel load_model(const std::string& path);

// Sigma_tilde is written only when p <= sigma_limit (it is p^2 numbers).
void save_truth(const synth::GroundTruth& truth, const std::string& path,
                int sigma_limit = 200);

struct TruthInfo {
  int p = 0;
  Vector theta_tilde;
  std::vector<synth::TransformKind> transform_ids;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;
  double sigma_y = 0.0;
  Matrix sigma_tilde;  // empty when omitted at save time
};

TruthInfo load_truth(const std::string& path);

} // namespace slim::model_io
