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

#include <span>
#include <string>
#include <vector>

namespace sqlrl::grpo {

struct GrpoConfig {
    int group_size = 16;
    double clip_ratio = 0.2;
    double kl_coeff = 0.001;
    double temperature = 0.8;
    double advantage_epsilon = 1e-8;

    /// Throws Error(InvalidConfig) when an invariant is violated.
    void validate() const;
};

/// One prompt's rollouts with sequence-level log-probabilities under the
/// current, behaviour (old) and reference policies.
struct RolloutGroup {
    std::string prompt_id;
    std::vector<std::string> candidates;
    std::vector<double> logp_current;
    std::vector<double> logp_old;
    std::vector<double> logp_ref;
    std::vector<double> rewards;

    [[nodiscard]] std::size_t size() const noexcept { return candidates.size(); }
    /// Throws Error(InvalidInput) if the per-candidate lists disagree in length.
    void validate() const;
};

/// Group-normalised advantages (r - mean) / (population std + delta).
/// A uniform group yields exact zeros. Throws GroupTooSmall for N < 2.
[[nodiscard]] std::vector<double> advantages(std::span<const double> rewards, double delta = 1e-8);

[[nodiscard]] double clipped_term(double ratio, double advantage, double clip_ratio);

/// Derivative of clipped_term with respect to the ratio; zero on the clipped
/// branch, `advantage` on the unclipped one (chosen at ties).
[[nodiscard]] double clipped_term_slope(double ratio, double advantage, double clip_ratio);

/// k3 estimator exp(d) - d - 1 with d = logp_ref - logp_current.
[[nodiscard]] double kl_penalty(double logp_current, double logp_ref);

/// Mean clipped surrogate minus kl_coeff times the mean KL estimate.
[[nodiscard]] double grpo_objective(const RolloutGroup& group, const GrpoConfig& config);

/// d objective / d logp_current_i for every candidate in the group.
[[nodiscard]] std::vector<double> objective_logp_gradient(const RolloutGroup& group, const GrpoConfig& config);

} // namespace sqlrl::grpo
