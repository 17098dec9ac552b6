#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace commgen {

// Interned identifiers. Name tables live in CorpusIndex; ids are ranks in the
// lexicographically sorted name table, so id order equals name order.
using UserId = std::uint32_t;
using CommunityId = std::uint32_t;
using TokenId = std::uint32_t;

using Timestamp = std::int64_t;  // seconds since epoch
using Duration = std::int64_t;   // seconds

inline constexpr Duration kSecondsPerDay = 86400;
inline constexpr Duration kThirtyDays = 30 * kSecondsPerDay;
inline constexpr Timestamp kMaxTime = std::numeric_limits<Timestamp>::max();

// Bad input or configuration. The CLI maps this to exit code 1.
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent internal state or corrupt staged artifacts. Exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace commgen
