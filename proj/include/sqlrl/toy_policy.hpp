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

#include <string>
#include <vector>

#include "sqlrl/grpo.hpp"
#include "sqlrl/rng.hpp"

namespace sqlrl::grpo {

/// Finite candidate pool for one prompt with one logit per candidate.
struct PromptPool {
    std::string prompt_id;
    std::vector<std::string> candidates;
    std::vector<double> logits;
};

/// Desk-scale stand-in for an LLM policy: a tempered softmax over whole SQL
/// strings, independently per prompt.
class ToyPolicy {
public:
    ToyPolicy() = default;
    ToyPolicy(std::vector<PromptPool> prompts, double temperature);

    [[nodiscard]] const std::vector<PromptPool>& prompts() const noexcept { return prompts_; }
    [[nodiscard]] std::vector<PromptPool>& prompts() noexcept { return prompts_; }
    [[nodiscard]] double temperature() const noexcept { return temperature_; }

    [[nodiscard]] std::size_t prompt_index(const std::string& prompt_id) const;
    /// Throws Error(CandidateOutOfPool).
    [[nodiscard]] std::size_t candidate_index(std::size_t prompt, const std::string& candidate) const;

    [[nodiscard]] std::vector<double> log_probabilities(std::size_t prompt) const;
    [[nodiscard]] std::vector<double> probabilities(std::size_t prompt) const;
    /// Highest-logit candidate; lowest index wins ties.
    [[nodiscard]] std::size_t greedy(std::size_t prompt) const;
    [[nodiscard]] std::size_t sample(std::size_t prompt, SplitMix64& rng) const;

private:
    std::vector<PromptPool> prompts_;
    double temperature_ = 1.0;
};

/// Per-prompt logit gradients, same shape as the policy's logits.
using LogitGradient = std::vector<std::vector<double>>;

/// Mean grpo_objective over groups with logp_current recomputed from `policy`.
[[nodiscard]] double toy_objective(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                                   const GrpoConfig& config);

/// Serial reference for toy_gradient.
[[nodiscard]] LogitGradient toy_gradient_serial(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                                                const GrpoConfig& config);

/// Analytic gradient of toy_objective, groups processed in parallel and
/// reduced in group order, so the result is bitwise independent of `threads`.
[[nodiscard]] LogitGradient toy_gradient(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                                         const GrpoConfig& config, int threads = 0);

/// One gradient-ascent step on toy_objective.
[[nodiscard]] ToyPolicy toy_policy_step(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                                        const GrpoConfig& config, double learning_rate, int threads = 0);

} // namespace sqlrl::grpo
