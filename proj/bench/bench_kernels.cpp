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


// Serial reference kernels against their OpenMP counterparts.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "sqlrl/curation.hpp"
#include "sqlrl/eval.hpp"
#include "sqlrl/reward.hpp"
#include "sqlrl/toy_policy.hpp"
#include "testkit.hpp"

using namespace sqlrl;

namespace {

struct Fixture {
    testkit::TempDir dir;
    DatabaseRef db;
    std::string gold = "SELECT bucket, COUNT(*), SUM(value) FROM events GROUP BY bucket HAVING SUM(value) > 0";
    std::vector<ModelOutput> group;
    std::vector<Sample> samples;
    std::vector<ModelOutput> predictions;
    grpo::ToyPolicy policy;
    std::vector<grpo::RolloutGroup> rollouts;
    grpo::GrpoConfig config;

    Fixture()
    {
        db = testkit::make_database(dir / "events.sqlite",
                                    "CREATE TABLE events (id INTEGER PRIMARY KEY, bucket INTEGER, value REAL);"
                                    "WITH RECURSIVE n(i) AS (SELECT 1 UNION ALL SELECT i + 1 FROM n WHERE i < 20000) "
                                    "INSERT INTO events SELECT i, i % 97, (i * 7919 % 1000) - 400.5 FROM n;");
        const std::vector<std::string> variants = {
            gold,
            "SELECT bucket, COUNT(id), SUM(value) FROM events GROUP BY bucket HAVING SUM(value) > 0",
            "SELECT bucket, COUNT(*), SUM(value) FROM events GROUP BY bucket",
            "SELECT bucket, COUNT(*), AVG(value) FROM events GROUP BY bucket HAVING SUM(value) > 0",
            "SELECT e.bucket, COUNT(*), SUM(e.value) FROM events e WHERE e.value > -1000 GROUP BY e.bucket "
            "HAVING SUM(e.value) > 0",
            "SELECT bucket, COUNT(*) FROM event GROUP BY bucket",
        };
        for (int i = 0; i < 16; ++i) group.push_back({testkit::answer(variants[i % variants.size()])});

        for (int i = 0; i < 64; ++i) {
            Sample s;
            s.id = "b" + std::to_string(i);
            s.question = "Bucket totals";
            s.db = db;
            s.gold_sql = "SELECT bucket, SUM(value) FROM events WHERE bucket >= " + std::to_string(i) +
                         " GROUP BY bucket ORDER BY bucket";
            samples.push_back(s);
            predictions.push_back({testkit::answer(i % 3 ? s.gold_sql : "SELECT bucket FROM events LIMIT 5")});
        }

        std::mt19937_64 rng(5);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<grpo::PromptPool> pools;
        for (int p = 0; p < 64; ++p) {
            grpo::PromptPool pool{"p" + std::to_string(p), {}, {}};
            for (int c = 0; c < 256; ++c) {
                pool.candidates.push_back("c" + std::to_string(c));
                pool.logits.push_back(normal(rng));
            }
            pools.push_back(pool);
        }
        policy = grpo::ToyPolicy(pools, 0.8);
        for (std::size_t p = 0; p < pools.size(); ++p) {
            grpo::RolloutGroup g;
            g.prompt_id = pools[p].prompt_id;
            const auto lp = policy.log_probabilities(p);
            for (int i = 0; i < 256; ++i) {
                g.candidates.push_back(pools[p].candidates[static_cast<std::size_t>(i)]);
                g.logp_current.push_back(lp[static_cast<std::size_t>(i)]);
                g.logp_old.push_back(lp[static_cast<std::size_t>(i)] + 0.3 * normal(rng));
                g.logp_ref.push_back(lp[static_cast<std::size_t>(i)] + 0.3 * normal(rng));
                g.rewards.push_back(std::array<double, 3>{0.0, 0.1, 1.0}[rng() % 3]);
            }
            rollouts.push_back(g);
        }
    }
};

Fixture& fixture()
{
    static Fixture f;
    return f;
}

void BM_ScoreGroupSerial(benchmark::State& state)
{
    auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(score_group_serial(f.group, f.gold, f.db));
}

void BM_ScoreGroup(benchmark::State& state)
{
    auto& f = fixture();
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(score_group(f.group, f.gold, f.db, {}, threads));
}

void BM_ExecutionAccuracySerial(benchmark::State& state)
{
    auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(eval::execution_accuracy_serial(f.samples, f.predictions));
}

void BM_ExecutionAccuracy(benchmark::State& state)
{
    auto& f = fixture();
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(eval::execution_accuracy(f.samples, f.predictions, {}, threads));
}

void BM_FilterGoldSerial(benchmark::State& state)
{
    auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(curation::filter_gold_executable_serial(f.samples));
}

void BM_FilterGold(benchmark::State& state)
{
    auto& f = fixture();
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(curation::filter_gold_executable(f.samples, kDefaultTimeoutMs, threads));
}

void BM_ToyGradientSerial(benchmark::State& state)
{
    auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(grpo::toy_gradient_serial(f.policy, f.rollouts, f.config));
}

void BM_ToyGradient(benchmark::State& state)
{
    auto& f = fixture();
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(grpo::toy_gradient(f.policy, f.rollouts, f.config, threads));
}

} // namespace

BENCHMARK(BM_ScoreGroupSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScoreGroup)->RangeMultiplier(2)->Range(1, 8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExecutionAccuracySerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExecutionAccuracy)->RangeMultiplier(2)->Range(1, 8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FilterGoldSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FilterGold)->RangeMultiplier(2)->Range(1, 8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ToyGradientSerial)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_ToyGradient)->RangeMultiplier(2)->Range(1, 8)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
