// SPDX-License-Identifier: Apache-2.0
#include "avsync/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <vector>

#include "avsync/errors.hpp"
#include "avsync/random.hpp"
#include "avsync/wav.hpp"

namespace avsync {

AvEventAnnotation AvEventAnnotation::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("annotation JSON: " + std::string(e.what()),
                         static_cast<std::size_t>(e.byte));
    }
    try {
        AvEventAnnotation a{j.at("visual_event_frame").get<std::int64_t>(),
                            FrameRate(j.at("fps").get<int>()),
                            j.value("description", std::string{})};
        if (a.visual_event_frame < 0) {
            throw ConfigError("visual_event_frame must be >= 0");
        }
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("annotation JSON: " + std::string(e.what()));
    }
}

void AvEventAnnotation::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["visual_event_frame"] = visual_event_frame;
    j["fps"] = fps.fps();
    j["description"] = description;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write annotation " + path.string());
    out << j.dump(2) << '\n';
}

std::int64_t detect_onset(
    std::span<const double> audio, int sample_rate, const OnsetConfig& config,
    std::optional<std::pair<std::int64_t, std::int64_t>> search_window) {
    if (audio.empty()) throw RangeError("onset detection on empty audio");
    if (sample_rate <= 0) throw RangeError("sample rate must be positive");
    const int hop = std::max(1, config.hop);

    std::int64_t lo = 0;
    std::int64_t hi = static_cast<std::int64_t>(audio.size());
    if (search_window) {
        lo = std::clamp<std::int64_t>(search_window->first, 0, hi);
        hi = std::clamp<std::int64_t>(search_window->second, lo, hi);
    }
    const std::int64_t n_blocks = (hi - lo) / hop;
    if (n_blocks < 1) {
        throw NoOnsetError("search window shorter than one analysis hop", 0.0);
    }

    // per-hop mean-square energy
    std::vector<double> block(static_cast<std::size_t>(n_blocks));
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        double acc = 0;
        const std::int64_t s = lo + b * hop;
        for (int i = 0; i < hop; ++i) {
            const double x = audio[static_cast<std::size_t>(s + i)];
            acc += x * x;
        }
        block[static_cast<std::size_t>(b)] = acc / hop;
    }

    // sliding-window energy over window_s, stepping by one hop
    const auto window_blocks = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(
               std::llround(config.window_s * sample_rate / hop)));
    std::vector<double> windowed(block.size());
    double acc = 0;
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        acc += block[static_cast<std::size_t>(b)];
        if (b >= window_blocks) acc -= block[static_cast<std::size_t>(b - window_blocks)];
        const double width = static_cast<double>(std::min(b + 1, window_blocks));
        // windows are right-aligned: windowed[b] covers (b-window, b]
        windowed[static_cast<std::size_t>(b)] = acc / width;
    }

    std::vector<double> sorted = windowed;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double noise_floor = sorted[sorted.size() / 2];
    const double threshold = config.threshold_factor * noise_floor;

    const auto sustain_blocks = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(
               std::ceil(config.sustain_s * sample_rate / hop)));

    for (std::int64_t b = 0; b < n_blocks; ++b) {
        if (!(windowed[static_cast<std::size_t>(b)] > threshold)) continue;
        bool sustained = true;
        for (std::int64_t k = 1; k < sustain_blocks && b + k < n_blocks; ++k) {
            if (!(windowed[static_cast<std::size_t>(b + k)] > threshold)) {
                sustained = false;
                break;
            }
        }
        if (!sustained) continue;
        // refine inside the triggering window: the first sample whose own
        // energy clears both the adaptive threshold and a quarter of the
        // window peak (the latter keeps stray noise samples from stealing
        // the onset)
        const std::int64_t w_start =
            lo + std::max<std::int64_t>(0, b - window_blocks + 1) * hop;
        const std::int64_t w_end = std::min<std::int64_t>(lo + (b + 1) * hop, hi);
        double peak_sq = 0;
        for (std::int64_t s = w_start; s < w_end; ++s) {
            const double x = audio[static_cast<std::size_t>(s)];
            peak_sq = std::max(peak_sq, x * x);
        }
        const double refine_threshold = std::max(threshold, 0.25 * peak_sq);
        for (std::int64_t s = w_start; s < w_end; ++s) {
            const double x = audio[static_cast<std::size_t>(s)];
            if (x * x > refine_threshold) return s;
        }
        return w_start;
    }
    throw NoOnsetError(
        "no onset found above " + std::to_string(config.threshold_factor) +
            "x the median noise floor",
        noise_floor);
}

nlohmann::json SyncReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["onset_sample"] = onset_sample;
    j["onset_time_seconds"] = onset_time;
    j["visual_time_seconds"] = visual_time;
    j["offset_seconds"] = offset;
    j["offset_ms"] = offset * 1e3;
    j["threshold_seconds"] = threshold;
    j["pass"] = pass;
    j["sign_convention"] = "negative = audio leads video";
    return j;
}

std::string SyncReport::summary() const {
    char line[160];
    std::snprintf(line, sizeof line,
                  "onset at sample %lld (%.3f ms), visual event at %.3f ms, "
                  "offset %+.3f ms (%s), threshold %.3f ms -> %s",
                  static_cast<long long>(onset_sample), onset_time * 1e3,
                  visual_time * 1e3, offset * 1e3,
                  offset < 0 ? "audio leads" : "audio lags", threshold * 1e3,
                  pass ? "PASS" : "FAIL");
    return line;
}

SyncReport measure_av_offset(const PcmBuffer& audio,
                             const AvEventAnnotation& annotation,
                             double threshold, const OnsetConfig& onset_cfg) {
    if (audio.channel_count() != 1) {
        throw ConfigError("measure_av_offset expects a mono buffer");
    }
    const double visual_time =
        static_cast<double>(annotation.visual_event_frame) /
        annotation.fps.fps();
    if (visual_time > audio.duration_seconds()) {
        throw RangeError("annotated frame lies beyond the audio duration");
    }
    if (threshold <= 0) threshold = 1.0 / annotation.fps.fps();

    const std::int64_t onset =
        detect_onset(audio.channels[0], audio.sample_rate, onset_cfg);
    const double onset_time = static_cast<double>(onset) / audio.sample_rate;
    const double offset = onset_time - visual_time;
    // pass is strict: |offset| < threshold ("less than one frame")
    return SyncReport{onset, onset_time, visual_time, offset, threshold,
                      std::abs(offset) < threshold};
}

Stimulus generate_test_stimulus(const StimulusSpec& spec,
                                const std::filesystem::path& wav_path) {
    if (spec.visual_event_frame < 0 ||
        spec.visual_event_frame >= spec.video_duration_frames) {
        throw ConfigError("visual event frame must lie inside the video");
    }

    const SyntheticSessionSpec session_spec{
        .audio_start = Timecode(10, 0, 0, 0, spec.ltc_rate),
        .ltc_rate = spec.ltc_rate,
        .fps = spec.fps,
        .sample_rate = spec.sample_rate,
        .channels = 2,
        .video_offset_s = spec.lead_padding_s,
        .video_duration_frames = spec.video_duration_frames,
        .trailing_padding_s = 0.5,
        .lead_phase_samples = 0,
        .ltc_amplitude = 0.8,
        .seed = spec.seed,
        .bit_depth = 24};

    SyntheticSession session = generate_synthetic_session(session_spec, wav_path);

    // overwrite channel 0 with a quiet bed plus one sharp click displaced
    // from the annotated frame by exactly the injected offset
    PcmBuffer audio = read_wav(wav_path);
    auto& ch0 = audio.channels[0];
    Rng rng(spec.seed ^ 0x5713c9d2a8f04b61ULL);
    for (auto& x : ch0) x = 0.002 * rng.gaussian();

    const double event_in_audio_s =
        session.true_offset_s +
        static_cast<double>(spec.visual_event_frame) / spec.fps.fps() +
        spec.injected_av_offset_s;
    const auto click_start = static_cast<std::int64_t>(
        std::llround(event_in_audio_s * spec.sample_rate));
    if (click_start < 0 || click_start >= audio.frame_count()) {
        throw ConfigError("injected offset pushes the click outside the audio");
    }
    const auto click_len = static_cast<std::int64_t>(spec.sample_rate / 250);
    const double decay = 1.0 / (0.001 * spec.sample_rate);
    const double w = 2.0 * std::numbers::pi * 3000.0 / spec.sample_rate;
    for (std::int64_t i = 0;
         i < click_len && click_start + i < audio.frame_count(); ++i) {
        ch0[static_cast<std::size_t>(click_start + i)] +=
            0.6 * std::exp(-static_cast<double>(i) * decay) *
            std::cos(w * static_cast<double>(i));
    }
    write_wav(wav_path, audio, audio.bit_depth);

    return Stimulus{std::move(session.manifest),
                    AvEventAnnotation{spec.visual_event_frame, spec.fps,
                                      "synthetic impact click"},
                    spec.injected_av_offset_s};
}

}  // namespace avsync
