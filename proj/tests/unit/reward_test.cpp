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

#include "sqlrl/error.hpp"
#include "sqlrl/reward.hpp"
#include "testkit.hpp"

using namespace sqlrl;

class RewardTest : public testing::Test {
  protected:
    void SetUp() override { dbs = testkit::build_mini_databases(dir.path()); }

    testkit::TempDir dir;
    testkit::MiniDatabases dbs;
};

TEST_F(RewardTest, TierCasesScoreExactly)
{
    RewardOptions options;
    options.timeout_ms = testkit::kTierCaseTimeoutMs;
    const auto cases = testkit::reward_tier_cases(dbs);
    ASSERT_EQ(cases.size(), 20u);
    for (const auto& c : cases) {
        const auto r = score({c.output}, c.gold_sql, c.db, options);
        EXPECT_EQ(r.tier, c.expected) << c.name;
        EXPECT_EQ(r.value, tier_value(c.expected)) << c.name;
    }
}

TEST_F(RewardTest, TierValues)
{
    EXPECT_EQ(tier_value(RewardTier::Correct), 1.0);
    EXPECT_EQ(tier_value(RewardTier::Executable), 0.1);
    EXPECT_EQ(tier_value(RewardTier::Invalid), 0.0);
}

TEST(ExtractSql, PrefersLastBlockOfLastAnswer)
{
    const std::string text = "```sql\nA\n```\n<answer>```sql\nB\n```</answer>\n<answer>```sql\nC\n``` ```sql\nD\n```</answer>";
    EXPECT_EQ(extract_sql(text), "D");
}

TEST(ExtractSql, FallsBackOutsideAnswerUnlessStrict)
{
    const std::string text = "draft:\n```sql\nSELECT 1\n```\n<answer>\nno code</answer>";
    EXPECT_EQ(extract_sql(text), "SELECT 1");
    EXPECT_EQ(extract_sql(text, true), std::nullopt);
    EXPECT_EQ(extract_sql("```sql\nSELECT 2\n```"), "SELECT 2");
    EXPECT_EQ(extract_sql("```python\nprint(1)\n```"), std::nullopt);
    EXPECT_EQ(extract_sql("```sqlite\nSELECT 3\n```"), "SELECT 3");
}

TEST_F(RewardTest, GoldMustBeUsable)
{
    EXPECT_THROW((void)gold_result(dbs.school, "SELECT name FROM students WHERE grade = 99"), Error);
    EXPECT_THROW((void)gold_result(dbs.school, "SELECT nope FROM students"), Error);
    try {
        (void)gold_result(dbs.school, "SELECT nope");
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::GoldNotExecutable);
    }
}

TEST_F(RewardTest, EmptyResultKnob)
{
    RewardOptions options;
    const std::string empty = testkit::answer("SELECT name FROM students WHERE grade = 99");
    EXPECT_EQ(score({empty}, "SELECT name FROM students", dbs.school, options).value, 0.1);
    options.reward_empty_executable = false;
    EXPECT_EQ(score({empty}, "SELECT name FROM students", dbs.school, options).value, 0.0);
}

TEST_F(RewardTest, TruncatedPredictionIsOnlyExecutable)
{
    RewardOptions options;
    options.row_limit = 3;
    const auto r = score({testkit::answer("SELECT n FROM nums")}, "SELECT n FROM nums WHERE n < 3", dbs.numbers, options);
    EXPECT_EQ(r.tier, RewardTier::Executable);
    ASSERT_TRUE(r.diagnostics.has_value());
}

TEST_F(RewardTest, DiagnosticsExplainFailures)
{
    const auto none = score({"no code at all"}, "SELECT 1", dbs.school);
    ASSERT_TRUE(none.diagnostics);
    const auto multi = score({testkit::answer("SELECT 1; SELECT 2")}, "SELECT 1", dbs.school);
    EXPECT_EQ(multi.tier, RewardTier::Correct);
    ASSERT_TRUE(multi.diagnostics);
    EXPECT_NE(multi.diagnostics->find("only the first statement"), std::string::npos);
}

TEST_F(RewardTest, GroupScoringMatchesSerial)
{
    std::vector<ModelOutput> outputs;
    for (const auto& c : testkit::reward_tier_cases(dbs)) {
        if (c.db.path() == dbs.school.path()) outputs.push_back({c.output});
    }
    for (int i = 0; i < 4; ++i) outputs.insert(outputs.end(), outputs.begin(), outputs.begin() + 3);
    const std::string gold = "SELECT name FROM students WHERE grade = 9";
    const auto serial = score_group_serial(outputs, gold, dbs.school);
    for (int threads : {1, 2, 4, 8}) {
        const auto parallel = score_group(outputs, gold, dbs.school, {}, threads);
        ASSERT_EQ(parallel.size(), serial.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            EXPECT_EQ(parallel[i].value, serial[i].value);
            EXPECT_EQ(parallel[i].diagnostics, serial[i].diagnostics);
        }
    }
}

TEST_F(RewardTest, GroupScoringPropagatesGoldFailure)
{
    EXPECT_THROW((void)score_group({{"x"}, {"y"}}, "SELECT broken(", dbs.school, {}, 2), Error);
    EXPECT_THROW((void)score_group({{"x"}}, "SELECT 1", DatabaseRef(dir / "missing.sqlite"), {}, 2), Error);
}
