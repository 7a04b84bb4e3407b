// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "avsync/errors.hpp"

namespace avsync {

/// Frame rate of a timecode stream. Only the integer rates used by the
/// capture chain are supported; drop-frame (29.97/59.94) is out of scope.
class FrameRate {
public:
    static constexpr std::array<int, 5> supported = {24, 25, 30, 50, 60};

    explicit FrameRate(int frames_per_second);

    int fps() const noexcept { return fps_; }

    friend bool operator==(FrameRate a, FrameRate b) noexcept = default;

private:
    int fps_;
};

/// A position on an audio timeline: sample index at a fixed sample rate.
struct SampleTime {
    std::int64_t sample_index = 0;
    int sample_rate = 0;  // samples/s, > 0

    double seconds() const noexcept {
        return static_cast<double>(sample_index) / sample_rate;
    }
    friend bool operator==(const SampleTime&, const SampleTime&) = default;
};

/// An HH:MM:SS:FF instant at a fixed frame rate. Immutable value; every
/// field is validated at construction. Arithmetic past the 24 h day
/// boundary is an error, not a wrap.
class Timecode {
public:
    Timecode(int hours, int minutes, int seconds, int frames, FrameRate rate);

    int hours() const noexcept { return hours_; }
    int minutes() const noexcept { return minutes_; }
    int seconds() const noexcept { return seconds_; }
    int frames() const noexcept { return frames_; }
    FrameRate rate() const noexcept { return rate_; }

    /// Linear frame index since 00:00:00:00; bijective onto
    /// 0 .. 24h*fps - 1 for a fixed rate.
    std::int64_t total_frames() const noexcept;

    static Timecode from_total_frames(std::int64_t n, FrameRate rate);

    /// This instant plus `delta` frames; throws RangeError on day underflow
    /// or overflow.
    Timecode add_frames(std::int64_t delta) const;

    /// Nearest audio sample of this instant. Ties round away from zero.
    SampleTime to_sample_time(int sample_rate) const;

    /// Position in seconds since 00:00:00:00.
    double to_seconds() const noexcept {
        return static_cast<double>(total_frames()) / rate_.fps();
    }

    /// Canonical "HH:MM:SS:FF" with zero-padded 2-digit fields.
    std::string to_string() const;

    /// Parses the canonical form exactly; ParseError carries the position
    /// of the first bad character.
    static Timecode parse(std::string_view text, FrameRate rate);

    friend bool operator==(const Timecode& a, const Timecode& b) noexcept {
        return a.rate_ == b.rate_ && a.hours_ == b.hours_ &&
               a.minutes_ == b.minutes_ && a.seconds_ == b.seconds_ &&
               a.frames_ == b.frames_;
    }

private:
    int hours_, minutes_, seconds_, frames_;
    FrameRate rate_;
};

/// round(x) with ties away from zero, as an exact integer division.
/// Exposed because the same rounding must be used everywhere a timeline
/// position is converted between rates.
std::int64_t round_div_away(std::int64_t numerator, std::int64_t denominator);

}  // namespace avsync
