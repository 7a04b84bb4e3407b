// SPDX-License-Identifier: Apache-2.0
#include "avsync/pcm.hpp"

#include <algorithm>
#include <cmath>

#include "avsync/errors.hpp"

namespace avsync {

void PcmBuffer::validate() const {
    if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
    if (bit_depth != 16 && bit_depth != 24) {
        throw ConfigError("bit depth must be 16 or 24, got " +
                          std::to_string(bit_depth));
    }
    if (channels.empty()) throw ConfigError("buffer needs at least 1 channel");
    const std::size_t len = channels[0].size();
    for (const auto& ch : channels) {
        if (ch.size() != len) {
            throw ConfigError("channels differ in length");
        }
    }
}

std::int32_t quantize_sample(double x, int bit_depth) {
    const std::int32_t full = 1 << (bit_depth - 1);  // 32768 or 8388608
    const auto v = static_cast<std::int64_t>(std::llround(x * full));
    return static_cast<std::int32_t>(
        std::clamp<std::int64_t>(v, -full, full - 1));
}

double dequantize_sample(std::int32_t v, int bit_depth) {
    return static_cast<double>(v) / (1 << (bit_depth - 1));
}

PcmBuffer extract_channel(const PcmBuffer& buffer, int index) {
    if (index < 0 || index >= buffer.channel_count()) {
        throw RangeError("channel index " + std::to_string(index) +
                         " out of range for " +
                         std::to_string(buffer.channel_count()) + " channels");
    }
    PcmBuffer mono;
    mono.sample_rate = buffer.sample_rate;
    mono.bit_depth = buffer.bit_depth;
    mono.channels.push_back(buffer.channels[static_cast<std::size_t>(index)]);
    return mono;
}

PcmBuffer trim(const PcmBuffer& buffer, SampleTime start, SampleTime end) {
    if (start.sample_rate != buffer.sample_rate ||
        end.sample_rate != buffer.sample_rate) {
        throw RangeError("trim positions must use the buffer's sample rate");
    }
    const std::int64_t len = buffer.frame_count();
    if (start.sample_index < 0 || start.sample_index > end.sample_index ||
        end.sample_index > len) {
        throw RangeError("trim range [" + std::to_string(start.sample_index) +
                         ", " + std::to_string(end.sample_index) +
                         ") invalid for length " + std::to_string(len));
    }
    PcmBuffer out;
    out.sample_rate = buffer.sample_rate;
    out.bit_depth = buffer.bit_depth;
    out.channels.reserve(buffer.channels.size());
    for (const auto& ch : buffer.channels) {
        out.channels.emplace_back(ch.begin() + start.sample_index,
                                  ch.begin() + end.sample_index);
    }
    return out;
}

PcmBuffer merge_channels(const std::vector<PcmBuffer>& monos) {
    if (monos.empty()) throw ConfigError("nothing to merge");
    PcmBuffer out;
    out.sample_rate = monos[0].sample_rate;
    out.bit_depth = monos[0].bit_depth;
    const std::int64_t len = monos[0].frame_count();
    for (const auto& m : monos) {
        if (m.channel_count() != 1) {
            throw ConfigError("merge_channels expects mono inputs");
        }
        if (m.sample_rate != out.sample_rate || m.frame_count() != len) {
            throw ConfigError("merge_channels inputs must match in rate and length");
        }
        out.channels.push_back(m.channels[0]);
    }
    return out;
}

}  // namespace avsync
