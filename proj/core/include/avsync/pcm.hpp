// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "avsync/timecode.hpp"

namespace avsync {

/// Multi-channel PCM audio held as per-channel sample sequences normalized
/// to [-1, 1), together with the source bit depth (16 or 24) that makes the
/// integer representation recoverable bit-exactly.
struct PcmBuffer {
    int sample_rate = 0;
    int bit_depth = 16;
    std::vector<std::vector<double>> channels;

    int channel_count() const noexcept {
        return static_cast<int>(channels.size());
    }
    std::int64_t frame_count() const noexcept {
        return channels.empty() ? 0
                                : static_cast<std::int64_t>(channels[0].size());
    }
    double duration_seconds() const noexcept {
        return sample_rate > 0
                   ? static_cast<double>(frame_count()) / sample_rate
                   : 0.0;
    }

    /// Throws ConfigError unless all invariants hold (equal channel
    /// lengths, positive rate, 16/24 depth, >= 1 channel).
    void validate() const;
};

/// Quantize a normalized sample to the signed integer domain of `bit_depth`,
/// clamping to the representable range. Inverse of dequantize_sample up to
/// clamping.
std::int32_t quantize_sample(double x, int bit_depth);
double dequantize_sample(std::int32_t v, int bit_depth);

/// Mono buffer equal to channel `index`; RangeError when out of range.
PcmBuffer extract_channel(const PcmBuffer& buffer, int index);

/// Samples [start, end) on all channels, bit-exact. Both positions must be
/// at the buffer's sample rate.
PcmBuffer trim(const PcmBuffer& buffer, SampleTime start, SampleTime end);

/// Interleave N equal-length mono buffers into one multi-channel buffer.
PcmBuffer merge_channels(const std::vector<PcmBuffer>& monos);

}  // namespace avsync
