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

#include "tlr/state.hpp"

namespace tlr {

std::string_view to_string(StateClass c) { return c == StateClass::Red ? "red" : "green"; }

std::string_view to_string(FinalState s) {
  switch (s) {
    case FinalState::None: return "none";
    case FinalState::Off: return "off";
    case FinalState::Red: return "red";
    case FinalState::Green: return "green";
  }
  return "none";
}

std::optional<StateClass> parse_state_class(std::string_view s) {
  if (s == "red") return StateClass::Red;
  if (s == "green") return StateClass::Green;
  return std::nullopt;
}

std::optional<FinalState> parse_final_state(std::string_view s) {
  for (FinalState f : kAllFinalStates)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

}  // namespace tlr
