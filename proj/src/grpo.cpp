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

#include "sqlrl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqlrl/error.hpp"

namespace sqlrl::grpo {

void GrpoConfig::validate() const
{
    if (group_size < 2) throw Error(ErrorKind::InvalidConfig, "group_size must be at least 2");
    if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) throw Error(ErrorKind::InvalidConfig, "clip_ratio must lie in (0, 1)");
    if (!(kl_coeff >= 0.0)) throw Error(ErrorKind::InvalidConfig, "kl_coeff must be non-negative");
    if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidConfig, "temperature must be positive");
    if (!(advantage_epsilon > 0.0)) throw Error(ErrorKind::InvalidConfig, "advantage_epsilon must be positive");
}

void RolloutGroup::validate() const
{
    const auto n = candidates.size();
    if (logp_current.size() != n || logp_old.size() != n || logp_ref.size() != n || rewards.size() != n) {
        throw Error(ErrorKind::InvalidInput, "rollout group '" + prompt_id + "' has mismatched list lengths");
    }
}

std::vector<double> advantages(std::span<const double> rewards, double delta)
{
    const auto n = rewards.size();
    if (n < 2) throw Error(ErrorKind::GroupTooSmall, "advantages need at least 2 rewards, got " + std::to_string(n));
    std::vector<double> out(n, 0.0);
    if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; })) return out;

    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(n);
    double sq = 0.0;
    for (double r : rewards) sq += (r - mean) * (r - mean);
    const double denom = std::sqrt(sq / static_cast<double>(n)) + delta;
    for (std::size_t i = 0; i < n; ++i) out[i] = (rewards[i] - mean) / denom;
    return out;
}

double clipped_term(double ratio, double advantage, double clip_ratio)
{
    const double clamped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    return std::min(ratio * advantage, clamped * advantage);
}

double clipped_term_slope(double ratio, double advantage, double clip_ratio)
{
    const double clamped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    return ratio * advantage <= clamped * advantage ? advantage : 0.0;
}

double kl_penalty(double logp_current, double logp_ref)
{
    const double d = logp_ref - logp_current;
    // expm1 keeps the estimate non-negative near d = 0.
    return std::max(0.0, std::expm1(d) - d);
}

double grpo_objective(const RolloutGroup& group, const GrpoConfig& config)
{
    group.validate();
    const auto adv = advantages(group.rewards, config.advantage_epsilon);
    const auto n = static_cast<double>(group.size());
    double surrogate = 0.0;
    double kl = 0.0;
    for (std::size_t i = 0; i < group.size(); ++i) {
        const double ratio = std::exp(group.logp_current[i] - group.logp_old[i]);
        surrogate += clipped_term(ratio, adv[i], config.clip_ratio);
        kl += kl_penalty(group.logp_current[i], group.logp_ref[i]);
    }
    return surrogate / n - config.kl_coeff * kl / n;
}

std::vector<double> objective_logp_gradient(const RolloutGroup& group, const GrpoConfig& config)
{
    group.validate();
    const auto adv = advantages(group.rewards, config.advantage_epsilon);
    const auto n = static_cast<double>(group.size());
    std::vector<double> grad(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
        const double ratio = std::exp(group.logp_current[i] - group.logp_old[i]);
        const double surrogate = clipped_term_slope(ratio, adv[i], config.clip_ratio) * ratio;
        const double kl = -std::expm1(group.logp_ref[i] - group.logp_current[i]);
        grad[i] = (surrogate - config.kl_coeff * kl) / n;
    }
    return grad;
}

} // namespace sqlrl::grpo
