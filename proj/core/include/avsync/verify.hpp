// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "avsync/align.hpp"
#include "avsync/pcm.hpp"
#include "avsync/timecode.hpp"

namespace avsync {

/// Manually annotated visual event: the first video frame showing the
/// contact, at the video frame rate.
struct AvEventAnnotation {
    std::int64_t visual_event_frame = 0;
    FrameRate fps;
    std::string description;

    static AvEventAnnotation load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

struct OnsetConfig {
    double threshold_factor = 10.0;  // times the median block energy
    double sustain_s = 0.002;        // energy must stay up this long
    double window_s = 0.004;         // sliding energy window
    int hop = 32;                    // samples between energy evaluations
};

/// First sample where short-window energy rises above the adaptive
/// threshold (threshold_factor times the median block energy) and stays
/// above it for sustain_s. The trigger is refined to the first sample
/// inside the window whose own energy clears the threshold. Deterministic.
/// Throws NoOnsetError (carrying the measured noise floor) when nothing
/// qualifies.
std::int64_t detect_onset(
    std::span<const double> audio, int sample_rate,
    const OnsetConfig& config = {},
    std::optional<std::pair<std::int64_t, std::int64_t>> search_window = {});

/// Sign convention: negative offset means the audio leads the video.
/// pass is strict: |offset| < threshold.
struct SyncReport {
    std::int64_t onset_sample = 0;
    double onset_time = 0;   // seconds
    double visual_time = 0;  // visual_event_frame / fps
    double offset = 0;       // onset_time - visual_time
    double threshold = 0;
    bool pass = false;

    nlohmann::json to_json() const;
    std::string summary() const;
};

/// Measures the audio-visual offset of an aligned mono track against the
/// annotated contact frame. threshold <= 0 selects the default of one frame
/// duration (1 / fps).
SyncReport measure_av_offset(const PcmBuffer& audio,
                             const AvEventAnnotation& annotation,
                             double threshold = 0,
                             const OnsetConfig& onset = {});

// ---------------------------------------------------------------------------
// Synthetic end-to-end stimulus: a session whose click is displaced from the
// annotated visual frame by a known amount, so align + verify must hand the
// injected offset back.

struct StimulusSpec {
    std::int64_t visual_event_frame = 60;
    FrameRate fps;
    FrameRate ltc_rate;
    int sample_rate = 48000;
    double injected_av_offset_s = 0;  // negative = audio early
    std::int64_t video_duration_frames = 180;
    double lead_padding_s = 0.75;  // audio rolls before the video starts
    std::uint64_t seed = 7;
};

struct Stimulus {
    SessionManifest manifest;  // channel 0 = click track, last channel = LTC
    AvEventAnnotation annotation;
    double true_offset_s = 0;  // == injected_av_offset_s
};

Stimulus generate_test_stimulus(const StimulusSpec& spec,
                                const std::filesystem::path& wav_path);

}  // namespace avsync
