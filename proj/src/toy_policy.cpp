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

#include "sqlrl/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

#include "sqlrl/error.hpp"

namespace sqlrl::grpo {

namespace {

// A group with logp_current refreshed from the policy.
RolloutGroup with_current(const ToyPolicy& policy, const RolloutGroup& group, std::size_t prompt,
                          std::vector<std::size_t>& indices)
{
    group.validate();
    const auto logp = policy.log_probabilities(prompt);
    RolloutGroup out = group;
    indices.clear();
    for (std::size_t i = 0; i < group.size(); ++i) {
        indices.push_back(policy.candidate_index(prompt, group.candidates[i]));
        out.logp_current[i] = logp[indices.back()];
    }
    return out;
}

struct GroupGradient {
    std::size_t prompt = 0;
    std::vector<double> logits;
};

GroupGradient group_gradient(const ToyPolicy& policy, const RolloutGroup& group, const GrpoConfig& config)
{
    GroupGradient out;
    out.prompt = policy.prompt_index(group.prompt_id);
    std::vector<std::size_t> indices;
    const auto refreshed = with_current(policy, group, out.prompt, indices);
    const auto dlogp = objective_logp_gradient(refreshed, config);
    const auto probs = policy.probabilities(out.prompt);
    const double inv_t = 1.0 / policy.temperature();

    // d logp_c / d logit_j = (1[j == c] - p_j) / T
    out.logits.assign(probs.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < dlogp.size(); ++i) {
        out.logits[indices[i]] += dlogp[i] * inv_t;
        total += dlogp[i];
    }
    for (std::size_t j = 0; j < probs.size(); ++j) out.logits[j] -= total * probs[j] * inv_t;
    return out;
}

LogitGradient zero_gradient(const ToyPolicy& policy)
{
    LogitGradient grad;
    for (const auto& p : policy.prompts()) grad.emplace_back(p.logits.size(), 0.0);
    return grad;
}

void accumulate(LogitGradient& total, const GroupGradient& g)
{
    auto& row = total[g.prompt];
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += g.logits[j];
}

void scale(LogitGradient& grad, double factor)
{
    for (auto& row : grad) {
        for (auto& v : row) v *= factor;
    }
}

} // namespace

ToyPolicy::ToyPolicy(std::vector<PromptPool> prompts, double temperature)
    : prompts_(std::move(prompts)), temperature_(temperature)
{
    if (!(temperature_ > 0.0)) throw Error(ErrorKind::InvalidConfig, "temperature must be positive");
    for (const auto& p : prompts_) {
        if (p.candidates.empty() || p.candidates.size() != p.logits.size()) {
            throw Error(ErrorKind::InvalidInput, "prompt '" + p.prompt_id + "' needs one logit per candidate");
        }
    }
}

std::size_t ToyPolicy::prompt_index(const std::string& prompt_id) const
{
    for (std::size_t i = 0; i < prompts_.size(); ++i) {
        if (prompts_[i].prompt_id == prompt_id) return i;
    }
    throw Error(ErrorKind::InvalidInput, "unknown prompt '" + prompt_id + "'");
}

std::size_t ToyPolicy::candidate_index(std::size_t prompt, const std::string& candidate) const
{
    const auto& pool = prompts_.at(prompt).candidates;
    const auto it = std::find(pool.begin(), pool.end(), candidate);
    if (it == pool.end()) {
        throw Error(ErrorKind::CandidateOutOfPool,
                    "candidate not in pool of prompt '" + prompts_[prompt].prompt_id + "': " + candidate);
    }
    return static_cast<std::size_t>(it - pool.begin());
}

std::vector<double> ToyPolicy::log_probabilities(std::size_t prompt) const
{
    const auto& logits = prompts_.at(prompt).logits;
    std::vector<double> z(logits.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = logits[i] / temperature_;
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    const double log_norm = m + std::log(sum);
    for (auto& v : z) v -= log_norm;
    return z;
}

std::vector<double> ToyPolicy::probabilities(std::size_t prompt) const
{
    auto p = log_probabilities(prompt);
    for (auto& v : p) v = std::exp(v);
    return p;
}

std::size_t ToyPolicy::greedy(std::size_t prompt) const
{
    const auto& logits = prompts_.at(prompt).logits;
    return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

std::size_t ToyPolicy::sample(std::size_t prompt, SplitMix64& rng) const
{
    const auto p = probabilities(prompt);
    return rng.categorical(p);
}

double toy_objective(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups, const GrpoConfig& config)
{
    if (groups.empty()) return 0.0;
    double total = 0.0;
    std::vector<std::size_t> indices;
    for (const auto& group : groups) {
        const auto prompt = policy.prompt_index(group.prompt_id);
        total += grpo_objective(with_current(policy, group, prompt, indices), config);
    }
    return total / static_cast<double>(groups.size());
}

LogitGradient toy_gradient_serial(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                                  const GrpoConfig& config)
{
    auto grad = zero_gradient(policy);
    if (groups.empty()) return grad;
    for (const auto& group : groups) accumulate(grad, group_gradient(policy, group, config));
    scale(grad, 1.0 / static_cast<double>(groups.size()));
    return grad;
}

LogitGradient toy_gradient(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups, const GrpoConfig& config,
                           int threads)
{
    auto grad = zero_gradient(policy);
    if (groups.empty()) return grad;
    std::vector<GroupGradient> parts(groups.size());
    std::vector<std::exception_ptr> errors(groups.size());
    const int team = threads > 0 ? threads : omp_get_max_threads();
    const auto n = static_cast<std::ptrdiff_t>(groups.size());

#pragma omp parallel for num_threads(team) schedule(static)
    for (std::ptrdiff_t g = 0; g < n; ++g) {
        const auto i = static_cast<std::size_t>(g);
        try {
            parts[i] = group_gradient(policy, groups[i], config);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (const auto& part : parts) accumulate(grad, part);
    scale(grad, 1.0 / static_cast<double>(groups.size()));
    return grad;
}

ToyPolicy toy_policy_step(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups, const GrpoConfig& config,
                          double learning_rate, int threads)
{
    config.validate();
    const auto grad = toy_gradient(policy, groups, config, threads);
    ToyPolicy next = policy;
    for (std::size_t p = 0; p < grad.size(); ++p) {
        auto& logits = next.prompts()[p].logits;
        for (std::size_t j = 0; j < logits.size(); ++j) logits[j] += learning_rate * grad[p][j];
    }
    return next;
}

} // namespace sqlrl::grpo
