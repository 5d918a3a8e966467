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

#include <cstdint>
#include <span>

namespace sqlrl {

/// SplitMix64. Chosen over <random> engines+distributions because the exact
/// stream must be reproducible from other languages.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] (inclusive); modulo bias is negligible for
    /// the small ranges used here.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept
    {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }

    /// Inverse-CDF draw from non-negative weights (need not be normalised).
    std::size_t categorical(std::span<const double> weights) noexcept
    {
        double total = 0.0;
        for (double w : weights) total += w;
        const double u = uniform() * total;
        double cumulative = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            cumulative += weights[i];
            if (u < cumulative) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

private:
    std::uint64_t state_;
};

} // namespace sqlrl
