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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sqlrl/sql_exec.hpp"

namespace sqlrl {

/// A cell after numeric unification: a Real that is finite, integral and
/// exactly representable as int64 becomes that Integer. Everything else keeps
/// its storage class. Ordering is total (class rank first, then value).
struct CanonicalValue {
    CellValue value;

    friend bool operator==(const CanonicalValue& a, const CanonicalValue& b);
    friend std::strong_ordering operator<=>(const CanonicalValue& a, const CanonicalValue& b);
};

using CanonicalRow = std::vector<CanonicalValue>;

[[nodiscard]] CanonicalValue canonical_value(const CellValue& cell);

struct CanonicalResult {
    std::vector<CanonicalRow> row_set; // sorted, no duplicates
    std::size_t cardinality_before_dedup = 0;
    bool truncated = false;

    friend bool operator==(const CanonicalResult&, const CanonicalResult&) = default;
};

[[nodiscard]] CanonicalResult canonicalize(const std::vector<Row>& rows, bool truncated = false);
[[nodiscard]] CanonicalResult canonicalize(const ExecutionOutcome& outcome);

struct MatchVerdict {
    bool matched = false;
    std::string diagnostic;
};

/// Set equality of the two row sets. A truncated side never matches.
[[nodiscard]] MatchVerdict compare_results(const CanonicalResult& pred, const CanonicalResult& gold);

[[nodiscard]] inline bool results_match(const CanonicalResult& pred, const CanonicalResult& gold)
{
    return compare_results(pred, gold).matched;
}

} // namespace sqlrl
