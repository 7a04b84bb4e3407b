// SPDX-License-Identifier: Apache-2.0
#include "avsync/timecode.hpp"

#include <algorithm>
#include <cstdio>

namespace avsync {

namespace {
constexpr std::int64_t frames_per_day(int fps) {
    return 24LL * 60 * 60 * fps;
}
}  // namespace

FrameRate::FrameRate(int frames_per_second) : fps_(frames_per_second) {
    if (std::find(supported.begin(), supported.end(), frames_per_second) ==
        supported.end()) {
        throw RangeError("unsupported frame rate " +
                         std::to_string(frames_per_second) +
                         " (supported: 24, 25, 30, 50, 60)");
    }
}

std::int64_t round_div_away(std::int64_t numerator, std::int64_t denominator) {
    // denominator > 0; ties round away from zero.
    if (numerator >= 0) return (2 * numerator + denominator) / (2 * denominator);
    return -((-2 * numerator + denominator) / (2 * denominator));
}

Timecode::Timecode(int hours, int minutes, int seconds, int frames,
                   FrameRate rate)
    : hours_(hours),
      minutes_(minutes),
      seconds_(seconds),
      frames_(frames),
      rate_(rate) {
    if (hours < 0 || hours > 23) {
        throw RangeError("timecode hours out of range: " + std::to_string(hours));
    }
    if (minutes < 0 || minutes > 59) {
        throw RangeError("timecode minutes out of range: " +
                         std::to_string(minutes));
    }
    if (seconds < 0 || seconds > 59) {
        throw RangeError("timecode seconds out of range: " +
                         std::to_string(seconds));
    }
    if (frames < 0 || frames >= rate.fps()) {
        throw RangeError("timecode frames out of range for " +
                         std::to_string(rate.fps()) +
                         " fps: " + std::to_string(frames));
    }
}

std::int64_t Timecode::total_frames() const noexcept {
    return (static_cast<std::int64_t>(hours_) * 60 + minutes_) * 60LL *
               rate_.fps() +
           static_cast<std::int64_t>(seconds_) * rate_.fps() + frames_;
}

Timecode Timecode::from_total_frames(std::int64_t n, FrameRate rate) {
    if (n < 0 || n >= frames_per_day(rate.fps())) {
        throw RangeError("frame index " + std::to_string(n) +
                         " outside the 24 h range at " +
                         std::to_string(rate.fps()) + " fps");
    }
    const int fps = rate.fps();
    const auto frames = static_cast<int>(n % fps);
    std::int64_t s = n / fps;
    const auto seconds = static_cast<int>(s % 60);
    s /= 60;
    const auto minutes = static_cast<int>(s % 60);
    const auto hours = static_cast<int>(s / 60);
    return Timecode(hours, minutes, seconds, frames, rate);
}

Timecode Timecode::add_frames(std::int64_t delta) const {
    const std::int64_t n = total_frames() + delta;
    if (n < 0 || n >= frames_per_day(rate_.fps())) {
        throw RangeError("timecode arithmetic left the 24 h range: " +
                         to_string() + (delta >= 0 ? " + " : " - ") +
                         std::to_string(delta >= 0 ? delta : -delta) +
                         " frames");
    }
    return from_total_frames(n, rate_);
}

SampleTime Timecode::to_sample_time(int sample_rate) const {
    if (sample_rate <= 0) {
        throw RangeError("sample rate must be positive");
    }
    // round(total_frames * sample_rate / fps), ties away from zero.
    const std::int64_t num = total_frames() * sample_rate;
    return SampleTime{round_div_away(num, rate_.fps()), sample_rate};
}

std::string Timecode::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d:%02d", hours_, minutes_,
                  seconds_, frames_);
    return buf;
}

Timecode Timecode::parse(std::string_view text, FrameRate rate) {
    // Exactly "HH:MM:SS:FF".
    if (text.size() != 11) {
        throw ParseError("timecode must be HH:MM:SS:FF (11 characters), got " +
                             std::to_string(text.size()),
                         std::min<std::size_t>(text.size(), 11));
    }
    int fields[4];
    for (int f = 0; f < 4; ++f) {
        const std::size_t pos = static_cast<std::size_t>(f) * 3;
        if (f > 0 && text[pos - 1] != ':') {
            throw ParseError("expected ':' in timecode", pos - 1);
        }
        const char hi = text[pos], lo = text[pos + 1];
        if (hi < '0' || hi > '9') {
            throw ParseError("expected digit in timecode", pos);
        }
        if (lo < '0' || lo > '9') {
            throw ParseError("expected digit in timecode", pos + 1);
        }
        fields[f] = (hi - '0') * 10 + (lo - '0');
    }
    try {
        return Timecode(fields[0], fields[1], fields[2], fields[3], rate);
    } catch (const RangeError& e) {
        throw ParseError(e.what(), 0);
    }
}

}  // namespace avsync
