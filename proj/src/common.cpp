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

#include "ticktalk/common.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace ticktalk {

std::string_view unit_suffix(TimeUnit unit) {
    switch (unit) {
    case TimeUnit::Ns: return "ns";
    case TimeUnit::Us: return "us";
    case TimeUnit::Ms: return "ms";
    case TimeUnit::S: return "s";
    }
    return "ns";
}

std::optional<TimeUnit> unit_from_suffix(std::string_view suffix) {
    if (suffix == "ns") return TimeUnit::Ns;
    if (suffix == "us") return TimeUnit::Us;
    if (suffix == "ms") return TimeUnit::Ms;
    if (suffix == "s") return TimeUnit::S;
    return std::nullopt;
}

Nanos unit_scale(TimeUnit unit) {
    switch (unit) {
    case TimeUnit::Ns: return 1;
    case TimeUnit::Us: return kNanosPerMicro;
    case TimeUnit::Ms: return kNanosPerMilli;
    case TimeUnit::S: return kNanosPerSecond;
    }
    return 1;
}

Duration::Duration(std::uint64_t value, TimeUnit unit) : value_(value), unit_(unit) {
    const auto scale = static_cast<std::uint64_t>(unit_scale(unit));
    if (value > static_cast<std::uint64_t>(kMaxDurationNs) / scale) {
        throw Error("duration " + std::to_string(value) + std::string(unit_suffix(unit)) +
                    " exceeds 10^18 ns");
    }
    canonical_ns_ = static_cast<Nanos>(value * scale);
}

Duration Duration::from_ns(Nanos ns) {
    if (ns < 0) throw Error("negative duration " + std::to_string(ns) + "ns");
    return Duration(static_cast<std::uint64_t>(ns), TimeUnit::Ns);
}

std::string Duration::to_string() const {
    return std::to_string(value_) + std::string(unit_suffix(unit_));
}

std::optional<Duration> parse_duration(std::string_view text) {
    std::size_t digits = 0;
    while (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits]))) ++digits;
    if (digits == 0) return std::nullopt;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + digits, value);
    if (ec != std::errc{}) return std::nullopt;
    auto unit = unit_from_suffix(text.substr(digits));
    if (!unit) return std::nullopt;
    if (value > static_cast<std::uint64_t>(kMaxDurationNs / unit_scale(*unit))) return std::nullopt;
    return Duration(value, *unit);
}

std::string WallTime::to_string() const {
    const Nanos total_s = ns / kNanosPerSecond;
    char buf[48];
    std::snprintf(buf, sizeof buf, "@%lld:%02lld:%02lld", static_cast<long long>(total_s / 3600),
                  static_cast<long long>((total_s / 60) % 60), static_cast<long long>(total_s % 60));
    return buf;
}

std::optional<WallTime> parse_wall_time(std::string_view text) {
    if (text.empty() || text.front() != '@') return std::nullopt;
    text.remove_prefix(1);

    int fields[3] = {0, 0, 0};
    int count = 0;
    while (count < 3) {
        std::size_t n = 0;
        while (n < text.size() && std::isdigit(static_cast<unsigned char>(text[n]))) ++n;
        if (n == 0 || n > 2) return std::nullopt;
        std::from_chars(text.data(), text.data() + n, fields[count]);
        ++count;
        text.remove_prefix(n);
        if (text.empty() || text.front() != ':') break;
        text.remove_prefix(1);
    }
    if (count < 2) return std::nullopt;

    int hour = fields[0];
    const int minute = fields[1];
    const int second = fields[2];
    if (minute > 59 || second > 59) return std::nullopt;

    if (text == "AM" || text == "PM") {
        if (hour < 1 || hour > 12) return std::nullopt;
        hour %= 12;
        if (text == "PM") hour += 12;
    } else if (!text.empty()) {
        return std::nullopt;
    } else if (hour > 23) {
        return std::nullopt;
    }
    return WallTime{((hour * 60LL + minute) * 60LL + second) * kNanosPerSecond};
}

ClockRef ClockRef::from_string(std::string_view s) {
    if (s == "self") return ClockRef::self();
    return ClockRef::named(std::string(s));
}

}  // namespace ticktalk
