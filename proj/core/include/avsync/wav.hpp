// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>

#include "avsync/pcm.hpp"

namespace avsync {

/// Header facts of a WAV file, without loading sample data.
struct WavInfo {
    int channels = 0;
    int sample_rate = 0;
    int bit_depth = 0;
    std::int64_t frame_count = 0;
};

WavInfo probe_wav(const std::filesystem::path& path);

/// Reads an integer-PCM RIFF/WAVE file (16- or 24-bit, 1..64 channels).
/// WAVE_FORMAT_EXTENSIBLE with a PCM sub-format is accepted. Unknown chunks
/// are skipped. ParseError names the byte offset of the defect.
PcmBuffer read_wav(const std::filesystem::path& path);

/// Streams one channel out of a (possibly huge) WAV file without loading
/// the others. Same validation as read_wav.
PcmBuffer read_wav_channel(const std::filesystem::path& path, int channel);

/// Writes canonical little-endian RIFF PCM (plain fmt chunk, no extensible
/// header). Output bytes are a pure function of the input.
void write_wav(const std::filesystem::path& path, const PcmBuffer& buffer,
               int bit_depth);

}  // namespace avsync
