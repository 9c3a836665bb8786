/*
 * Copyright 2026 The TickTalk Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ticktalk {

/// All externally visible times are integer nanoseconds.
using Nanos = std::int64_t;

inline constexpr Nanos kNanosPerMicro = 1'000;
inline constexpr Nanos kNanosPerMilli = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

/// Largest canonical duration accepted anywhere (10^18 ns, about 31.7 years).
inline constexpr Nanos kMaxDurationNs = 1'000'000'000'000'000'000;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TimeUnit { Ns, Us, Ms, S };

std::string_view unit_suffix(TimeUnit unit);
std::optional<TimeUnit> unit_from_suffix(std::string_view suffix);
Nanos unit_scale(TimeUnit unit);

/// A duration literal as written (`100ms`) plus its exact nanosecond value.
class Duration {
public:
    Duration() = default;

    /// Throws Error when value scaled by unit exceeds kMaxDurationNs.
    Duration(std::uint64_t value, TimeUnit unit);

    static Duration from_ns(Nanos ns);

    std::uint64_t value() const { return value_; }
    TimeUnit unit() const { return unit_; }
    Nanos ns() const { return canonical_ns_; }

    /// Renders in the literal form, e.g. "1us".
    std::string to_string() const;

    friend bool operator==(const Duration&, const Duration&) = default;

private:
    std::uint64_t value_ = 0;
    TimeUnit unit_ = TimeUnit::Ns;
    Nanos canonical_ns_ = 0;
};

/// Parses "1us", "100ms", "250ns", "3s". Returns nullopt on malformed input.
std::optional<Duration> parse_duration(std::string_view text);

/// Wall-clock instant: nanoseconds since the scenario's epoch (midnight of
/// the scenario day).
struct WallTime {
    Nanos ns = 0;

    /// Renders as "@H:MM:SS" in 24-hour form.
    std::string to_string() const;

    friend auto operator<=>(const WallTime&, const WallTime&) = default;
};

/// Parses "@4:35PM", "@16:35", "@9:05:30AM". Returns nullopt on malformed input.
std::optional<WallTime> parse_wall_time(std::string_view text);

struct SourceSpan {
    int line = 1;
    int column = 1;
    int length = 1;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

/// Clock a block is bound to: the submitting program's own clock (`self`)
/// or a named reference clock.
struct ClockRef {
    enum class Kind { Self, Named };

    Kind kind = Kind::Self;
    std::string name;

    static ClockRef self() { return {}; }
    static ClockRef named(std::string n) { return {Kind::Named, std::move(n)}; }

    bool is_self() const { return kind == Kind::Self; }

    /// "self" or the clock name.
    std::string to_string() const { return is_self() ? "self" : name; }
    static ClockRef from_string(std::string_view s);

    friend bool operator==(const ClockRef&, const ClockRef&) = default;
    friend auto operator<=>(const ClockRef&, const ClockRef&) = default;
};

}  // namespace ticktalk
