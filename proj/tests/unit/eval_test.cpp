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
#include "sqlrl/eval.hpp"
#include "testkit.hpp"

using namespace sqlrl;
using namespace sqlrl::eval;

class EvalTest : public testing::Test {
  protected:
    void SetUp() override { dbs = testkit::build_mini_databases(dir.path()); }

    Sample sample(const std::string& id, const DatabaseRef& db, const std::string& gold) const
    {
        Sample s;
        s.id = id;
        s.question = "question " + id;
        s.db = db;
        s.gold_sql = gold;
        return s;
    }

    testkit::TempDir dir;
    testkit::MiniDatabases dbs;
};

TEST(ExPercent, RoundsHalfUpInIntegers)
{
    EXPECT_EQ(ex_percent(0, 0), 0.0);
    EXPECT_EQ(ex_percent(1, 3), 33.3);
    EXPECT_EQ(ex_percent(2, 3), 66.7);
    EXPECT_EQ(ex_percent(1, 8), 12.5);
    EXPECT_EQ(ex_percent(1, 16), 6.3);
    EXPECT_EQ(ex_percent(7, 7), 100.0);
}

TEST_F(EvalTest, CountsCorrectPredictions)
{
    const std::vector<Sample> samples = {sample("a", dbs.retail, "SELECT name FROM customers WHERE city = 'Paris'"),
                                         sample("b", dbs.school, "SELECT name FROM students WHERE grade = 9"),
                                         sample("c", dbs.numbers, "SELECT n FROM nums WHERE n > 8")};
    const std::vector<ModelOutput> preds = {{testkit::answer("SELECT name FROM customers WHERE city = 'Paris'")},
                                            {testkit::answer("SELECT name FROM students")},
                                            {testkit::answer("SELECT n FROM nums WHERE n >= 9")}};
    const auto serial = execution_accuracy_serial(samples, preds);
    EXPECT_EQ(serial.n, 3u);
    EXPECT_EQ(serial.correct, 2u);
    EXPECT_EQ(serial.ex_percent, 66.7);
    for (int threads : {1, 2, 4}) {
        const auto parallel = execution_accuracy(samples, preds, {}, threads);
        EXPECT_EQ(parallel.correct, serial.correct);
        EXPECT_EQ(parallel.ex_percent, serial.ex_percent);
    }
    EXPECT_THROW((void)execution_accuracy(samples, {preds[0]}), Error);
}

TEST_F(EvalTest, BrokenGoldCountsAsMiss)
{
    const std::vector<Sample> samples = {sample("a", dbs.retail, "SELECT nope FROM customers"),
                                         sample("b", dbs.school, "SELECT name FROM students")};
    const std::vector<ModelOutput> preds = {{testkit::answer("SELECT 1")}, {testkit::answer("SELECT name FROM students")}};
    const auto score = execution_accuracy(samples, preds, {}, 2);
    EXPECT_EQ(score.correct, 1u);
    EXPECT_EQ(score.gold_failures, 1u);
}

TEST_F(EvalTest, MajorityVotePicksLargestAgreeingGroup)
{
    const std::vector<ModelOutput> candidates = {
        {testkit::answer("SELECT name FROM students WHERE grade = 10")},
        {testkit::answer("SELECT name FROM students WHERE grade = 9")},
        {"no sql"},
        {testkit::answer("SELECT name FROM students WHERE grade < 10 ORDER BY name")},
        {testkit::answer("SELECT nam FROM students")},
        {testkit::answer("SELECT name FROM students WHERE grade = 10")},
        {testkit::answer("SELECT name FROM students WHERE grade = 9.0")},
    };
    EXPECT_EQ(majority_vote_index(candidates, dbs.school), 1u);
    EXPECT_EQ(majority_vote(candidates, dbs.school), "SELECT name FROM students WHERE grade = 9");
}

TEST_F(EvalTest, MajorityVoteTiesGoToEarliestGroup)
{
    const std::vector<ModelOutput> candidates = {
        {testkit::answer("SELECT name FROM students WHERE grade = 10")},
        {testkit::answer("SELECT name FROM students WHERE grade = 9")},
        {testkit::answer("SELECT name FROM students WHERE grade = 9")},
        {testkit::answer("SELECT name FROM students WHERE grade IN (10)")},
    };
    EXPECT_EQ(majority_vote_index(candidates, dbs.school), 0u);
}

TEST_F(EvalTest, MajorityVoteFallbacks)
{
    EXPECT_EQ(majority_vote_index({{"nothing"}, {testkit::answer("SELEC 1")}, {testkit::answer("SELECT nope")}},
                                  dbs.school),
              1u);
    EXPECT_EQ(majority_vote_index({{"nothing"}, {"still nothing"}}, dbs.school), std::nullopt);
    EXPECT_EQ(majority_vote_index({}, dbs.school), std::nullopt);
}

TEST_F(EvalTest, VotingNeverLosesToGreedyWhenMajorityIsRight)
{
    const auto corpus = testkit::vote_corpus(dbs, 24, 77);
    std::vector<Sample> samples;
    std::vector<ModelOutput> greedy;
    std::vector<ModelOutput> voted;
    for (const auto& v : corpus) {
        samples.push_back(v.sample);
        greedy.push_back({v.candidates.front()});
        std::vector<ModelOutput> pool;
        for (const auto& c : v.candidates) pool.push_back({c});
        voted.push_back(pool[*majority_vote_index(pool, v.sample.db)]);
    }
    const auto g = execution_accuracy(samples, greedy);
    const auto m = execution_accuracy(samples, voted);
    EXPECT_EQ(m.ex_percent, 100.0);
    EXPECT_LT(g.ex_percent, 100.0);
}

TEST_F(EvalTest, SchemaTextAndPrompt)
{
    const auto schema = schema_text(dbs.retail);
    EXPECT_EQ(schema.find("CREATE TABLE customers"), 0u);
    EXPECT_NE(schema.find("CREATE TABLE orders"), std::string::npos);
    EXPECT_EQ(schema.find("sample rows"), std::string::npos);
    const auto with_rows = schema_text(dbs.retail, 2);
    EXPECT_NE(with_rows.find("sample rows"), std::string::npos);
    EXPECT_EQ(schema_text(dbs.retail, 9), schema_text(dbs.retail, 3));

    auto s = sample("a", dbs.retail, "SELECT 1");
    s.evidence = "hint";
    EXPECT_EQ(question_text(s), "hint\nquestion a");
    const auto prompt = render_prompt(s, PromptSpec::standard(), schema);
    EXPECT_NE(prompt.find(schema), std::string::npos);
    EXPECT_NE(prompt.find("hint\nquestion a"), std::string::npos);
    EXPECT_TRUE(prompt.ends_with(PromptSpec::standard().assistant_prefix));
    EXPECT_THROW((void)render_prompt(s, PromptSpec::standard(), ""), Error);
}

TEST(EvalReport, AverageTableAndRoundTrip)
{
    EvalReport r;
    r.per_benchmark["dev"] = {10, 7, 70.0, 0};
    r.per_benchmark["test"] = {4, 3, 75.0, 1};
    r.metadata["mode"] = "greedy";
    EXPECT_DOUBLE_EQ(r.average(), 72.5);
    const auto table = r.table();
    EXPECT_NE(table.find("Average"), std::string::npos);
    EXPECT_NE(table.find("72.5"), std::string::npos);
    const auto back = EvalReport::from_json(r.to_json());
    EXPECT_EQ(back.per_benchmark.at("test").gold_failures, 1u);
    EXPECT_EQ(back.metadata.at("mode"), "greedy");

    EvalReport other;
    other.per_benchmark["test"] = {4, 4, 100.0, 0};
    r.merge(other);
    EXPECT_EQ(r.per_benchmark.at("test").correct, 4u);
    EXPECT_DOUBLE_EQ(r.average(), 85.0);
}

namespace {

class FixedRetriever final : public ValueRetriever {
  public:
    std::vector<std::string> retrieve(const Sample&) override { return {"city = 'Paris'", "city = 'Rome'"}; }
};

class BrokenRetriever final : public ValueRetriever {
  public:
    std::vector<std::string> retrieve(const Sample&) override { throw std::runtime_error("index offline"); }
};

} // namespace

TEST_F(EvalTest, ValueRetrievalFailsOpen)
{
    auto s = sample("a", dbs.retail, "SELECT 1");
    s.evidence = "hint";
    FixedRetriever fixed;
    const auto added = value_retrieval_hook(s, fixed);
    EXPECT_EQ(added.sample.evidence, "hint\ncity = 'Paris'\ncity = 'Rome'");
    EXPECT_FALSE(added.warning);

    IdentityRetriever identity;
    EXPECT_EQ(value_retrieval_hook(s, identity).sample.evidence, "hint");

    BrokenRetriever broken;
    const auto failed = value_retrieval_hook(s, broken);
    EXPECT_EQ(failed.sample.evidence, "hint");
    ASSERT_TRUE(failed.warning);
    EXPECT_NE(failed.warning->find("RetrieverFailure"), std::string::npos);
}
