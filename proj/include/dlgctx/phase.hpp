// Copyright 2026 The dlgctx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>

namespace dlgctx {

/// Ordered: opening < negotiation < closing.
enum class DialoguePhase : std::uint8_t { opening, negotiation, closing };

std::string to_string(DialoguePhase phase);
/// Throws FormatError for unknown names.
DialoguePhase parse_phase(const std::string& name);

}  // namespace dlgctx
