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

#include "sqlrl/error.hpp"

namespace sqlrl {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::DatabaseUnavailable: return "DatabaseUnavailable";
    case ErrorKind::GoldNotExecutable: return "GoldNotExecutable";
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::CandidateOutOfPool: return "CandidateOutOfPool";
    case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::MalformedProviderResponse: return "MalformedProviderResponse";
    case ErrorKind::MissingSlot: return "MissingSlot";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::RetrieverFailure: return "RetrieverFailure";
    case ErrorKind::MalformedRequest: return "MalformedRequest";
    case ErrorKind::DuplicateRequestId: return "DuplicateRequestId";
    case ErrorKind::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

} // namespace sqlrl
