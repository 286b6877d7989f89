/* Copyright 2026 The multiesc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace multiesc {

using Tokens = std::vector<std::string>;

// Whitespace + punctuation splitting, ASCII-lowercased. Every ASCII
// punctuation character becomes its own token; non-ASCII bytes are kept as
// word characters.
Tokens tokenize(std::string_view text);

std::string to_lower(std::string_view s);

std::string join(const Tokens& tokens, std::string_view sep = " ");

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace multiesc
