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
#ifndef TILETUNE_MOMENTUM_HPP_
#define TILETUNE_MOMENTUM_HPP_

#include <string>
#include <vector>

#include "tiletune/ranker.hpp"

namespace tiletune {

/// Slow-moving copy of the ranking model used for online adaptation. Each
/// round initializes a fresh target from these weights; after the target is
/// fine-tuned on the collected records, the state absorbs it as an
/// exponential moving average.
struct SiameseState {
  RankerParams params;
  double momentum = 0.99;
  enum class Provenance { kPretrained, kEvolved } provenance = Provenance::kPretrained;
};

const char* provenance_name(SiameseState::Provenance p);

/// Deep copy of the state's weights; mutating the target never touches the
/// state.
RankerParams init_target(const SiameseState& state);

/// Element-wise phi' = m * phi + (1 - m) * target. Returns a new state with
/// provenance evolved; shapes must match.
SiameseState momentum_update(const SiameseState& state, const RankerParams& target);

struct AdaptResult {
  RankerParams target;
  SiameseState state;
  TrainReport report;
};

/// One online adaptation round: trains a fresh target (initialized from the
/// state) on the labeled records, then pushes the result back into the state
/// via the momentum update.
AdaptResult momentum_adapt(const SiameseState& state, const std::vector<TaskSamples>& dataset,
                           const TrainConfig& cfg);

/// Checkpoint format: the ranker model file plus momentum and provenance.
std::string serialize_siamese(const SiameseState& state);
SiameseState parse_siamese(const std::string& text);
void save_siamese(const SiameseState& state, const std::string& path);
SiameseState load_siamese(const std::string& path);

}  // namespace tiletune

#endif  // TILETUNE_MOMENTUM_HPP_
