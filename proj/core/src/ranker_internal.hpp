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
#ifndef TILETUNE_SRC_RANKER_INTERNAL_HPP_
#define TILETUNE_SRC_RANKER_INTERNAL_HPP_

// JSON (de)serialization of model parameters, shared between the plain
// checkpoint format and the momentum/siamese checkpoint that extends it.

#include <json.hpp>

#include "tiletune/ranker.hpp"

namespace tiletune {
namespace internal {

void params_to_json(const RankerParams& params, nlohmann::ordered_json& j);
RankerParams params_from_json(const nlohmann::ordered_json& j);

}  // namespace internal
}  // namespace tiletune

#endif  // TILETUNE_SRC_RANKER_INTERNAL_HPP_
