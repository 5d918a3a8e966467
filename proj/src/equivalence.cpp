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

#include "sqlrl/equivalence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace sqlrl {

namespace {

// 2^63 as a double; integral doubles in [-2^63, 2^63) fit in int64 exactly.
constexpr double kTwoPow63 = 9223372036854775808.0;

// IEEE-754 totalOrder key: flipping the magnitude bits of negatives makes the
// signed bit pattern sort like the value.
std::int64_t total_order_key(double d)
{
    const auto bits = std::bit_cast<std::int64_t>(d);
    return bits < 0 ? bits ^ std::numeric_limits<std::int64_t>::max() : bits;
}

std::strong_ordering compare_same_class(const CellValue& a, const CellValue& b)
{
    switch (a.index()) {
    case 0: return std::strong_ordering::equal;
    case 1: return std::get<std::int64_t>(a) <=> std::get<std::int64_t>(b);
    case 2: return total_order_key(std::get<double>(a)) <=> total_order_key(std::get<double>(b));
    case 3: return std::get<std::string>(a).compare(std::get<std::string>(b)) <=> 0;
    default: return std::get<Blob>(a).bytes.compare(std::get<Blob>(b).bytes) <=> 0;
    }
}

} // namespace

bool operator==(const CanonicalValue& a, const CanonicalValue& b)
{
    return (a <=> b) == 0;
}

std::strong_ordering operator<=>(const CanonicalValue& a, const CanonicalValue& b)
{
    if (a.value.index() != b.value.index()) return a.value.index() <=> b.value.index();
    return compare_same_class(a.value, b.value);
}

CanonicalValue canonical_value(const CellValue& cell)
{
    if (const auto* real = std::get_if<double>(&cell)) {
        const double r = *real;
        if (std::isfinite(r) && r == std::trunc(r) && r >= -kTwoPow63 && r < kTwoPow63) {
            return {static_cast<std::int64_t>(r)};
        }
    }
    return {cell};
}

CanonicalResult canonicalize(const std::vector<Row>& rows, bool truncated)
{
    CanonicalResult out;
    out.cardinality_before_dedup = rows.size();
    out.truncated = truncated;
    out.row_set.reserve(rows.size());
    for (const auto& row : rows) {
        CanonicalRow canon;
        canon.reserve(row.size());
        for (const auto& cell : row) canon.push_back(canonical_value(cell));
        out.row_set.push_back(std::move(canon));
    }
    std::sort(out.row_set.begin(), out.row_set.end());
    out.row_set.erase(std::unique(out.row_set.begin(), out.row_set.end()), out.row_set.end());
    return out;
}

CanonicalResult canonicalize(const ExecutionOutcome& outcome)
{
    return canonicalize(outcome.rows, outcome.truncated);
}

MatchVerdict compare_results(const CanonicalResult& pred, const CanonicalResult& gold)
{
    if (pred.truncated || gold.truncated) {
        return {false, std::string(pred.truncated ? "predicted" : "gold") +
                           " result truncated at the row limit; equality cannot be certified"};
    }
    if (pred.row_set == gold.row_set) return {true, {}};
    return {false, "result mismatch: " + std::to_string(pred.row_set.size()) + " distinct predicted rows vs " +
                       std::to_string(gold.row_set.size()) + " distinct gold rows"};
}

} // namespace sqlrl
