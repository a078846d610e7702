// Copyright 2026 The TLR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace tlr {

/// Detector output classes. RED also covers yellow lamps.
enum class StateClass { Red, Green };

/// Per-frame system output.
enum class FinalState { None, Off, Red, Green };

inline constexpr std::array<FinalState, 4> kAllFinalStates = {FinalState::None, FinalState::Off, FinalState::Red,
                                                              FinalState::Green};

std::string_view to_string(StateClass c);
std::string_view to_string(FinalState s);
std::optional<StateClass> parse_state_class(std::string_view s);
std::optional<FinalState> parse_final_state(std::string_view s);

inline FinalState to_final_state(StateClass c) { return c == StateClass::Red ? FinalState::Red : FinalState::Green; }

}  // namespace tlr
