/*
 * Copyright 2026 The tiletune Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "tiletune/momentum.hpp"

#include "ranker_internal.hpp"

namespace tiletune {

const char* provenance_name(SiameseState::Provenance p) {
  return p == SiameseState::Provenance::kPretrained ? "pretrained" : "evolved";
}

RankerParams init_target(const SiameseState& state) { return state.params; }

SiameseState momentum_update(const SiameseState& state, const RankerParams& target) {
  check_same_shape(state.params, target);
  if (!(state.momentum >= 0.0 && state.momentum < 1.0))
    fail(err::kState, "momentum must lie in [0, 1)");
  SiameseState next = state;
  next.provenance = SiameseState::Provenance::kEvolved;
  const double m = state.momentum;
  std::vector<const Tensor*> src;
  for_each_tensor(target, [&](const std::string&, const Tensor& t) { src.push_back(&t); });
  std::size_t k = 0;
  for_each_tensor(next.params, [&](const std::string&, Tensor& t) {
    const Tensor* s = src[k++];
    // m*phi + (1-m)*target, computed as target + m*(phi - target) so the
    // m = 0 endpoint and the phi = target fixed point are bit-exact
    for (std::size_t i = 0; i < t.v.size(); ++i)
      t.v[i] = s->v[i] + m * (t.v[i] - s->v[i]);
  });
  return next;
}

AdaptResult momentum_adapt(const SiameseState& state, const std::vector<TaskSamples>& dataset,
                           const TrainConfig& cfg) {
  if (dataset.empty()) fail(err::kState, "momentum_adapt: no records to train on");
  AdaptResult result;
  result.target = init_target(state);
  result.report = train(result.target, dataset, cfg);
  result.state = momentum_update(state, result.target);
  return result;
}

std::string serialize_siamese(const SiameseState& state) {
  nlohmann::ordered_json j;
  internal::params_to_json(state.params, j);
  j["momentum"] = state.momentum;
  j["provenance"] = provenance_name(state.provenance);
  return j.dump() + "\n";
}

SiameseState parse_siamese(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(err::kParse, std::string("siamese checkpoint parse failure: ") + e.what());
  }
  SiameseState state;
  state.params = internal::params_from_json(j);
  state.momentum = j.value("momentum", 0.99);
  if (!(state.momentum >= 0.0 && state.momentum < 1.0))
    fail(err::kValidate, "momentum must lie in [0, 1), got " + std::to_string(state.momentum));
  std::string prov = j.value("provenance", "pretrained");
  if (prov == "pretrained")
    state.provenance = SiameseState::Provenance::kPretrained;
  else if (prov == "evolved")
    state.provenance = SiameseState::Provenance::kEvolved;
  else
    fail(err::kParse, "unknown provenance tag " + prov);
  return state;
}

void save_siamese(const SiameseState& state, const std::string& path) {
  write_file(path, serialize_siamese(state));
}

SiameseState load_siamese(const std::string& path) { return parse_siamese(read_file(path)); }

}  // namespace tiletune
