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

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqlrl {

enum class ErrorKind {
    DatabaseUnavailable,
    GoldNotExecutable,
    GroupTooSmall,
    InvalidConfig,
    CandidateOutOfPool,
    ProviderUnavailable,
    MalformedProviderResponse,
    MissingSlot,
    LengthMismatch,
    RetrieverFailure,
    MalformedRequest,
    DuplicateRequestId,
    InvalidInput,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. The kind is part of the wire protocol, so
/// to_string(kind) names are stable.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace sqlrl
