/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sqlrl {

[[nodiscard]] std::string trim(std::string_view s);

/// Collapses every whitespace run to one space and trims the ends.
[[nodiscard]] std::string normalize_whitespace(std::string_view s);

using SlotValues = std::vector<std::pair<std::string, std::string>>;

/// Replaces every "{name}" with its value. Each listed slot must appear in the
/// template at least once, else Error(MissingSlot). Other braces are kept.
[[nodiscard]] std::string fill_template(std::string_view tmpl, const SlotValues& values);

/// Body of every fenced block (```lang ... ```), in order, with its language tag.
struct Fence {
    std::string lang;
    std::string body;
    std::size_t begin = 0;
    std::size_t end = 0;
};
[[nodiscard]] std::vector<Fence> fenced_blocks(std::string_view text);

} // namespace sqlrl
