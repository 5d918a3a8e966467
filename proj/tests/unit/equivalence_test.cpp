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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sqlrl/equivalence.hpp"
#include "testkit.hpp"

using namespace sqlrl;

namespace {

Row row(std::initializer_list<CellValue> cells)
{
    return Row(cells);
}

bool match(const std::vector<Row>& a, const std::vector<Row>& b)
{
    return results_match(canonicalize(a), canonicalize(b));
}

} // namespace

TEST(Equivalence, RowOrderIsIrrelevant)
{
    EXPECT_TRUE(match({row({std::int64_t{1}}), row({std::int64_t{2}})}, {row({std::int64_t{2}}), row({std::int64_t{1}})}));
}

TEST(Equivalence, DuplicatesCollapse)
{
    EXPECT_TRUE(match({row({std::string("a")}), row({std::string("a")})}, {row({std::string("a")})}));
    EXPECT_EQ(canonicalize({row({std::string("a")}), row({std::string("a")})}).cardinality_before_dedup, 2u);
}

TEST(Equivalence, IntegralRealsUnifyWithIntegers)
{
    EXPECT_TRUE(match({row({3.0})}, {row({std::int64_t{3}})}));
    EXPECT_TRUE(match({row({-0.0})}, {row({std::int64_t{0}})}));
    EXPECT_FALSE(match({row({3.5})}, {row({std::int64_t{3}})}));
    // 2^63 does not fit int64 and stays a real.
    EXPECT_TRUE(std::holds_alternative<double>(canonical_value(9223372036854775808.0).value));
    EXPECT_TRUE(std::holds_alternative<std::int64_t>(canonical_value(-9223372036854775808.0).value));
}

TEST(Equivalence, StorageClassesStayApart)
{
    EXPECT_FALSE(match({row({std::string("1")})}, {row({std::int64_t{1}})}));
    EXPECT_FALSE(match({row({Null{}})}, {row({std::int64_t{0}})}));
    EXPECT_FALSE(match({row({Blob{"a"}})}, {row({std::string("a")})}));
    EXPECT_TRUE(match({row({Null{}})}, {row({Null{}})}));
}

TEST(Equivalence, ColumnOrderMatters)
{
    EXPECT_FALSE(match({row({std::int64_t{1}, std::string("a")})}, {row({std::string("a"), std::int64_t{1}})}));
}

TEST(Equivalence, EmptyResultsMatchEachOther)
{
    EXPECT_TRUE(match({}, {}));
    EXPECT_FALSE(match({}, {row({std::int64_t{1}})}));
}

TEST(Equivalence, TruncatedNeverMatches)
{
    const auto full = canonicalize({row({std::int64_t{1}})});
    const auto cut = canonicalize({row({std::int64_t{1}})}, true);
    EXPECT_FALSE(results_match(cut, full));
    EXPECT_FALSE(results_match(full, cut));
    EXPECT_FALSE(results_match(cut, cut));
    EXPECT_NE(compare_results(cut, full).diagnostic.find("truncated"), std::string::npos);
}

TEST(Equivalence, CanonicalOrderIsTotal)
{
    std::vector<CanonicalValue> values = {canonical_value(std::string("b")), canonical_value(Blob{"x"}),
                                          canonical_value(2.5),              canonical_value(Null{}),
                                          canonical_value(std::int64_t{-4}), canonical_value(std::string("a"))};
    std::sort(values.begin(), values.end());
    EXPECT_TRUE(std::holds_alternative<Null>(values[0].value));
    EXPECT_TRUE(std::holds_alternative<std::int64_t>(values[1].value));
    EXPECT_TRUE(std::holds_alternative<double>(values[2].value));
    EXPECT_EQ(std::get<std::string>(values[3].value), "a");
    EXPECT_TRUE(std::holds_alternative<Blob>(values[5].value));
}

TEST(Equivalence, AgreesWithBruteForceComparator)
{
    const auto pairs = testkit::random_result_pairs(1000, 20240611);
    std::size_t equal = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const bool expected = testkit::brute_force_set_equal(pairs[i].left, pairs[i].right);
        equal += expected ? 1 : 0;
        ASSERT_EQ(match(pairs[i].left, pairs[i].right), expected) << "pair " << i;
    }
    // The generator must exercise both verdicts.
    EXPECT_GT(equal, 200u);
    EXPECT_LT(equal, 800u);
}

TEST(Equivalence, MatchIsSymmetricAndReflexive)
{
    for (const auto& p : testkit::random_result_pairs(300, 99)) {
        EXPECT_EQ(match(p.left, p.right), match(p.right, p.left));
        EXPECT_TRUE(match(p.left, p.left));
    }
}

TEST(Equivalence, PermutationInvariance)
{
    std::mt19937_64 rng(5);
    for (auto p : testkit::random_result_pairs(200, 7)) {
        const bool before = match(p.left, p.right);
        std::shuffle(p.left.begin(), p.left.end(), rng);
        EXPECT_EQ(match(p.left, p.right), before);
        EXPECT_EQ(canonicalize(p.left), canonicalize(p.left));
    }
}
