// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "avsync/ltc.hpp"
#include "avsync/pcm.hpp"
#include "avsync/timecode.hpp"

namespace avsync {

struct ManifestVideo {
    std::string id;
    Timecode start_timecode;
    std::int64_t duration_frames = 0;
    FrameRate fps;
};

/// Declarative description of one recording session: one multi-channel
/// audio file carrying an LTC track, plus the video start timecodes the
/// cameras embedded. Loaded from JSON (see README for the schema).
struct SessionManifest {
    std::filesystem::path audio_path;
    int ltc_channel = 0;
    int sample_rate = 0;
    FrameRate ltc_rate;
    std::vector<ManifestVideo> videos;  // all share one fps

    static SessionManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// Earliest video start (the alignment anchor) and the latest video end,
    /// as wall instants in seconds.
    double video_start_seconds() const;
    double video_end_seconds() const;
    const ManifestVideo& anchor_video() const;
};

struct AlignmentResult {
    SampleTime trim_start;
    SampleTime trim_end;
    Timecode audio_start_timecode;  // first decoded LTC frame
    Timecode video_start_timecode;  // anchor video
    double residual_bound = 0;      // seconds; 1 / (2 * ltc_fps)
    bool padding_ok = false;
    double padding_deficit_ms = 0;  // 0 when padding_ok
    bool subframe_refinement = true;
    std::int64_t ltc_frames_decoded = 0;
    std::int64_t ltc_frames_discarded = 0;
};

struct AlignOptions {
    /// Interpolate inside the first decoded LTC frame using its measured
    /// sample position. Off reproduces plain frame-level trimming.
    bool subframe_refinement = true;
};

/// Decodes the session's LTC track, matches it against the declared video
/// start, and computes the lossless trim window. Throws NoLtcError when the
/// track is undecodable and DropoutError when a timecode discontinuity
/// overlaps a trim boundary. A padding deficit is reported in the result,
/// not thrown; emit_aligned_audio is where it blocks.
AlignmentResult align_session(const SessionManifest& manifest,
                              const AlignOptions& options = {});

struct EmitOptions {
    bool force_pad = false;         // zero-fill a padding deficit
    bool drop_ltc_channel = false;  // omit the LTC track from the output
};

/// Writes the trimmed multi-channel WAV, bit-exact over [trim_start,
/// trim_end). Refuses a padding deficit with PaddingError unless force_pad
/// synthesizes digital silence for the missing span.
void emit_aligned_audio(const SessionManifest& manifest,
                        const AlignmentResult& result,
                        const std::filesystem::path& out_path,
                        const EmitOptions& options = {});

nlohmann::json alignment_report_json(const SessionManifest& manifest,
                                     const AlignmentResult& result);
std::string alignment_report_text(const SessionManifest& manifest,
                                  const AlignmentResult& result);

// ---------------------------------------------------------------------------
// Synthetic sessions: the oracle for the whole alignment pipeline. The
// generator knows the true offsets by construction, so recovered trims can
// be asserted against ground truth.

struct SyntheticSessionSpec {
    Timecode audio_start;  // LTC timecode at the first generated sample
    FrameRate ltc_rate;
    FrameRate fps;  // video rate
    int sample_rate = 48000;
    int channels = 2;  // content channels + LTC as the last channel
    /// Video start minus audio start, seconds; quantized to whole video
    /// frames so the manifest timecode is exact.
    double video_offset_s = 0;
    std::int64_t video_duration_frames = 0;
    double trailing_padding_s = 0.5;
    /// The capture "starts" this many samples into the LTC stream,
    /// simulating a recorder that opens mid-frame.
    std::int64_t lead_phase_samples = 0;
    double ltc_amplitude = 0.8;
    std::uint64_t seed = 1;
    int bit_depth = 24;
};

struct SyntheticSession {
    SessionManifest manifest;
    std::int64_t true_trim_start = 0;  // samples
    std::int64_t true_trim_end = 0;
    double true_offset_s = 0;  // quantized video_offset_s actually used
};

/// Writes the session WAV (content channels are seeded noise with sparse
/// clicks; the last channel is encoded LTC) and returns the manifest plus
/// ground truth.
SyntheticSession generate_synthetic_session(
    const SyntheticSessionSpec& spec, const std::filesystem::path& wav_path);

}  // namespace avsync
