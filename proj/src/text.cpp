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

#include "sqlrl/text.hpp"

#include <cctype>

#include "sqlrl/error.hpp"

namespace sqlrl {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(first, last - first + 1));
}

std::string normalize_whitespace(std::string_view s)
{
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

std::string fill_template(std::string_view tmpl, const SlotValues& values)
{
    for (const auto& [name, value] : values) {
        const std::string key = "{" + name + "}";
        if (tmpl.find(key) == std::string_view::npos) {
            throw Error(ErrorKind::MissingSlot, "template has no slot " + key);
        }
    }
    // Substitute in a single pass over the original so values are never
    // re-scanned for slots.
    std::string result;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        bool replaced = false;
        if (tmpl[pos] == '{') {
            for (const auto& [name, value] : values) {
                if (tmpl.compare(pos + 1, name.size(), name) == 0 && pos + 1 + name.size() < tmpl.size() &&
                    tmpl[pos + 1 + name.size()] == '}') {
                    result += value;
                    pos += name.size() + 2;
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) result += tmpl[pos++];
    }
    return result;
}

std::vector<Fence> fenced_blocks(std::string_view text)
{
    static constexpr std::string_view kFence = "```";
    std::vector<Fence> blocks;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find(kFence, pos);
        if (open == std::string_view::npos) break;
        auto cursor = open + kFence.size();
        std::string lang;
        while (cursor < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[cursor])) || text[cursor] == '_')) {
            lang += static_cast<char>(std::tolower(static_cast<unsigned char>(text[cursor])));
            ++cursor;
        }
        const auto close = text.find(kFence, cursor);
        if (close == std::string_view::npos) break;
        blocks.push_back({lang, trim(text.substr(cursor, close - cursor)), open, close + kFence.size()});
        pos = close + kFence.size();
    }
    return blocks;
}

} // namespace sqlrl
