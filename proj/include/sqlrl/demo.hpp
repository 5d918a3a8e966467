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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqlrl/dataset.hpp"
#include "sqlrl/grpo.hpp"
#include "sqlrl/toy_policy.hpp"

namespace sqlrl::demo {

/// One question of the bundled corpus with its finite candidate pool.
struct DemoPrompt {
    Sample sample;
    std::vector<std::string> pool; // raw model outputs
    std::vector<double> initial_logits;
};

/// Writes the five bundled SQLite databases under `dir` and returns the
/// prompts (two per database).
[[nodiscard]] std::vector<DemoPrompt> build_corpus(const std::filesystem::path& dir);

[[nodiscard]] grpo::ToyPolicy initial_policy(const std::vector<DemoPrompt>& corpus, double temperature);

enum class Mode { Online, Batch };

struct DemoOptions {
    int steps = 200;
    std::uint64_t seed = 7;
    double learning_rate = 2.0;
    Mode mode = Mode::Online;
    int epoch_steps = 4; // batch mode: updates per sampled batch
    int threads = 0;
    grpo::GrpoConfig config;
};

struct StepRecord {
    int step = 0;
    double mean_reward = 0.0;
    double greedy_ex = 0.0;
    double objective = 0.0;
};

struct DemoResult {
    double initial_ex = 0.0;
    double final_ex = 0.0;
    std::optional<int> first_perfect_step;
    std::vector<StepRecord> steps;
    grpo::ToyPolicy final_policy;

    /// One JSON object per line: a header, one line per step, a summary.
    [[nodiscard]] std::string trajectory_jsonl() const;
};

/// Greedy execution accuracy of `policy` on the corpus, in percent.
[[nodiscard]] double greedy_ex(const grpo::ToyPolicy& policy, const std::vector<DemoPrompt>& corpus, int threads = 0);

/// Samples one rollout group per prompt from `policy` (SplitMix64 draws in
/// prompt order) and scores it.
[[nodiscard]] std::vector<grpo::RolloutGroup> sample_groups(const grpo::ToyPolicy& policy,
                                                            const grpo::ToyPolicy& reference,
                                                            const std::vector<DemoPrompt>& corpus,
                                                            int group_size, SplitMix64& rng, int threads = 0);

[[nodiscard]] DemoResult run(const std::vector<DemoPrompt>& corpus, const DemoOptions& options);

} // namespace sqlrl::demo
