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
#include <set>

#include "sqlrl/demo.hpp"
#include "sqlrl/reward.hpp"
#include "testkit.hpp"

using namespace sqlrl;

class DemoTest : public testing::Test {
  protected:
    void SetUp() override { corpus = demo::build_corpus(dir.path()); }

    testkit::TempDir dir;
    std::vector<demo::DemoPrompt> corpus;
};

TEST_F(DemoTest, CorpusShape)
{
    ASSERT_EQ(corpus.size(), 10u);
    std::set<std::string> databases;
    for (const auto& p : corpus) {
        databases.insert(p.sample.db.path().string());
        ASSERT_EQ(p.pool.size(), p.initial_logits.size());
        std::size_t correct = 0;
        for (const auto& c : p.pool) correct += score({c}, p.sample.gold_sql, p.sample.db).tier == RewardTier::Correct;
        EXPECT_GE(correct, 1u) << p.sample.id;
        EXPECT_LT(correct, p.pool.size()) << p.sample.id;
    }
    EXPECT_EQ(databases.size(), 5u);
    EXPECT_LT(demo::greedy_ex(demo::initial_policy(corpus, 0.8), corpus), 50.0);
}

TEST_F(DemoTest, ReachesFullAccuracyReproducibly)
{
    demo::DemoOptions options;
    const auto a = demo::run(corpus, options);
    EXPECT_LT(a.initial_ex, 50.0);
    EXPECT_EQ(a.final_ex, 100.0);
    ASSERT_TRUE(a.first_perfect_step);
    EXPECT_LE(*a.first_perfect_step, 200);
    ASSERT_EQ(a.steps.size(), 200u);

    options.threads = 1;
    const auto b = demo::run(corpus, options);
    EXPECT_EQ(a.trajectory_jsonl(), b.trajectory_jsonl());
}

TEST_F(DemoTest, SeedChangesTrajectory)
{
    demo::DemoOptions options;
    options.steps = 5;
    const auto a = demo::run(corpus, options);
    options.seed = 8;
    EXPECT_NE(demo::run(corpus, options).trajectory_jsonl(), a.trajectory_jsonl());
}

TEST_F(DemoTest, ZeroStepsIsHeaderAndSummary)
{
    demo::DemoOptions options;
    options.steps = 0;
    const auto r = demo::run(corpus, options);
    EXPECT_TRUE(r.steps.empty());
    const auto text = r.trajectory_jsonl();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    EXPECT_EQ(r.initial_ex, r.final_ex);
}

TEST_F(DemoTest, BatchModeAlsoLearns)
{
    demo::DemoOptions options;
    options.mode = demo::Mode::Batch;
    const auto r = demo::run(corpus, options);
    EXPECT_GT(r.final_ex, r.initial_ex);
}

TEST_F(DemoTest, OnlineAndBatchAgreeOnTheFirstStep)
{
    demo::DemoOptions options;
    options.steps = 1;
    const auto online = demo::run(corpus, options);
    options.mode = demo::Mode::Batch;
    const auto batch = demo::run(corpus, options);
    ASSERT_EQ(online.final_policy.prompts().size(), batch.final_policy.prompts().size());
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        EXPECT_EQ(online.final_policy.prompts()[p].logits, batch.final_policy.prompts()[p].logits);
    }
    EXPECT_EQ(online.trajectory_jsonl(), batch.trajectory_jsonl());
    // Later steps differ because batch mode keeps its rollouts.
    options.steps = 3;
    const auto batch3 = demo::run(corpus, options);
    options.mode = demo::Mode::Online;
    EXPECT_NE(demo::run(corpus, options).final_policy.prompts()[0].logits, batch3.final_policy.prompts()[0].logits);
}

TEST_F(DemoTest, UniformRewardsLeavePolicyAlone)
{
    // With every candidate equally good and no KL pull, nothing moves.
    for (auto& p : corpus) {
        for (auto& c : p.pool) c = p.pool[0];
    }
    demo::DemoOptions options;
    options.steps = 3;
    options.config.kl_coeff = 0.0;
    const auto r = demo::run(corpus, options);
    for (const auto& s : r.steps) EXPECT_EQ(s.objective, 0.0);
    for (std::size_t p = 0; p < corpus.size(); ++p) EXPECT_EQ(r.final_policy.prompts()[p].logits, corpus[p].initial_logits);
}
