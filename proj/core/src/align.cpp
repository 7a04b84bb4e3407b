// SPDX-License-Identifier: Apache-2.0
#include "avsync/align.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "avsync/errors.hpp"
#include "avsync/random.hpp"
#include "avsync/wav.hpp"

namespace avsync {

namespace {

std::string format_ms(double ms) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    return buf;
}

// Signed duration rendered as [-]HH:MM:SS:FF at the LTC rate.
std::string offset_as_timecode(std::int64_t samples, int sr, FrameRate rate) {
    const double seconds = static_cast<double>(std::llabs(samples)) / sr;
    const auto frames = static_cast<std::int64_t>(
        std::llround(seconds * rate.fps()));
    const std::string body = Timecode::from_total_frames(frames, rate).to_string();
    return samples < 0 ? "-" + body : body;
}

}  // namespace

SessionManifest SessionManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("manifest JSON: " + std::string(e.what()),
                         static_cast<std::size_t>(e.byte));
    }
    try {
        SessionManifest m{.audio_path = {},
                          .ltc_channel = 0,
                          .sample_rate = 0,
                          .ltc_rate = FrameRate(j.at("ltc_rate").get<int>()),
                          .videos = {}};
        const auto& audio = j.at("audio");
        m.audio_path = audio.at("path").get<std::string>();
        if (m.audio_path.is_relative()) {
            m.audio_path = path.parent_path() / m.audio_path;
        }
        m.ltc_channel = audio.at("ltc_channel").get<int>();
        m.sample_rate = audio.at("sample_rate").get<int>();
        for (const auto& v : j.at("videos")) {
            const FrameRate fps(v.at("fps").get<int>());
            m.videos.push_back(ManifestVideo{
                v.at("id").get<std::string>(),
                Timecode::parse(v.at("start_timecode").get<std::string>(), fps),
                v.at("duration_frames").get<std::int64_t>(), fps});
        }
        if (m.videos.empty()) {
            throw ConfigError("manifest declares no videos");
        }
        for (const auto& v : m.videos) {
            if (!(v.fps == m.videos[0].fps)) {
                throw ConfigError("manifest videos must share one frame rate");
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest JSON: " + std::string(e.what()));
    }
}

void SessionManifest::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["audio"] = {{"path", audio_path.string()},
                  {"ltc_channel", ltc_channel},
                  {"sample_rate", sample_rate}};
    j["ltc_rate"] = ltc_rate.fps();
    j["videos"] = nlohmann::json::array();
    for (const auto& v : videos) {
        j["videos"].push_back({{"id", v.id},
                               {"start_timecode", v.start_timecode.to_string()},
                               {"duration_frames", v.duration_frames},
                               {"fps", v.fps.fps()}});
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
}

const ManifestVideo& SessionManifest::anchor_video() const {
    if (videos.empty()) throw ConfigError("manifest declares no videos");
    return *std::min_element(videos.begin(), videos.end(),
                             [](const ManifestVideo& a, const ManifestVideo& b) {
                                 return a.start_timecode.to_seconds() <
                                        b.start_timecode.to_seconds();
                             });
}

double SessionManifest::video_start_seconds() const {
    return anchor_video().start_timecode.to_seconds();
}

double SessionManifest::video_end_seconds() const {
    double end = 0;
    for (const auto& v : videos) {
        end = std::max(end, v.start_timecode.to_seconds() +
                                static_cast<double>(v.duration_frames) /
                                    v.fps.fps());
    }
    return end;
}

namespace {

// A trim boundary is trustworthy when it lies within 1.5 LTC frame lengths
// of some decoded frame start; dropouts and early LTC loss leave holes
// bigger than that.
void check_boundary_coverage(const LtcDecodeResult& decoded, double boundary,
                             double frame_len_samples, const char* which) {
    double best = std::numeric_limits<double>::infinity();
    std::int64_t nearest_tc = -1;
    for (const auto& f : decoded.frames) {
        const double dist =
            std::abs(boundary - static_cast<double>(f.first_sample_index));
        if (dist < best) {
            best = dist;
            nearest_tc = f.timecode.total_frames();
        }
    }
    if (best > 1.5 * frame_len_samples) {
        std::ostringstream msg;
        msg << "LTC discontinuity overlaps the " << which
            << " trim point: nearest decoded frame is " << best
            << " samples away (frame " << nearest_tc << ")";
        throw DropoutError(msg.str());
    }
}

}  // namespace

AlignmentResult align_session(const SessionManifest& manifest,
                              const AlignOptions& options) {
    const WavInfo info = probe_wav(manifest.audio_path);
    if (info.sample_rate != manifest.sample_rate) {
        throw ConfigError("manifest declares " +
                          std::to_string(manifest.sample_rate) +
                          " Hz but the file is " +
                          std::to_string(info.sample_rate) + " Hz");
    }
    if (manifest.ltc_channel < 0 || manifest.ltc_channel >= info.channels) {
        throw ConfigError("LTC channel " + std::to_string(manifest.ltc_channel) +
                          " out of range for " + std::to_string(info.channels) +
                          "-channel audio");
    }

    const PcmBuffer ltc_track =
        read_wav_channel(manifest.audio_path, manifest.ltc_channel);
    const LtcDecodeResult decoded = decode_ltc(ltc_track, manifest.ltc_rate);

    const double sr = manifest.sample_rate;
    const double tc0_seconds = decoded.frames.front().timecode.to_seconds();
    const auto fsi0 =
        static_cast<double>(decoded.frames.front().first_sample_index);
    const double video_start = manifest.video_start_seconds();
    const double video_span =
        manifest.video_end_seconds() - video_start;

    // With refinement the decoded frame's measured position anchors the
    // timecode to the sample timeline; without it, sample 0 is assumed to
    // sit exactly on the first decoded timecode (frame-level trim).
    const double anchor = options.subframe_refinement ? fsi0 : 0.0;
    const std::int64_t trim_start = static_cast<std::int64_t>(
        std::llround(anchor + (video_start - tc0_seconds) * sr));
    const std::int64_t trim_end =
        trim_start + static_cast<std::int64_t>(std::llround(video_span * sr));

    const std::int64_t deficit_front = std::max<std::int64_t>(0, -trim_start);
    const std::int64_t deficit_back =
        std::max<std::int64_t>(0, trim_end - info.frame_count);

    const double frame_len = sr / manifest.ltc_rate.fps();
    if (deficit_front == 0) {
        check_boundary_coverage(decoded, static_cast<double>(trim_start),
                                frame_len, "leading");
    }
    if (deficit_back == 0) {
        check_boundary_coverage(decoded, static_cast<double>(trim_end),
                                frame_len, "trailing");
    }

    AlignmentResult result{
        .trim_start = SampleTime{trim_start, manifest.sample_rate},
        .trim_end = SampleTime{trim_end, manifest.sample_rate},
        .audio_start_timecode = decoded.frames.front().timecode,
        .video_start_timecode = manifest.anchor_video().start_timecode,
        .residual_bound = 1.0 / (2.0 * manifest.ltc_rate.fps()),
        .padding_ok = deficit_front == 0 && deficit_back == 0,
        .padding_deficit_ms =
            1e3 * static_cast<double>(deficit_front + deficit_back) / sr,
        .subframe_refinement = options.subframe_refinement,
        .ltc_frames_decoded = static_cast<std::int64_t>(decoded.frames.size()),
        .ltc_frames_discarded = decoded.discarded};
    return result;
}

void emit_aligned_audio(const SessionManifest& manifest,
                        const AlignmentResult& result,
                        const std::filesystem::path& out_path,
                        const EmitOptions& options) {
    if (!result.padding_ok && !options.force_pad) {
        throw PaddingError(
            "audio does not encompass the video interval; short by " +
                format_ms(result.padding_deficit_ms) +
                " ms (pass force_pad to fill with digital silence)",
            result.padding_deficit_ms);
    }

    const PcmBuffer source = read_wav(manifest.audio_path);
    const std::int64_t len = source.frame_count();
    const std::int64_t want_start = result.trim_start.sample_index;
    const std::int64_t want_end = result.trim_end.sample_index;
    const std::int64_t real_start = std::clamp<std::int64_t>(want_start, 0, len);
    const std::int64_t real_end = std::clamp<std::int64_t>(want_end, 0, len);

    PcmBuffer out;
    out.sample_rate = source.sample_rate;
    out.bit_depth = source.bit_depth;
    const auto out_len = static_cast<std::size_t>(want_end - want_start);
    for (int c = 0; c < source.channel_count(); ++c) {
        if (options.drop_ltc_channel && c == manifest.ltc_channel) continue;
        std::vector<double> ch(out_len, 0.0);  // deficits stay digital silence
        const auto& src = source.channels[static_cast<std::size_t>(c)];
        std::copy(src.begin() + real_start, src.begin() + real_end,
                  ch.begin() + (real_start - want_start));
        out.channels.push_back(std::move(ch));
    }
    if (out.channels.empty()) {
        throw ConfigError("dropping the LTC channel left no audio to write");
    }
    write_wav(out_path, out, source.bit_depth);
}

nlohmann::json alignment_report_json(const SessionManifest& manifest,
                                     const AlignmentResult& result) {
    const double sr = manifest.sample_rate;
    const std::int64_t start = result.trim_start.sample_index;
    const std::int64_t end = result.trim_end.sample_index;
    nlohmann::json j;
    j["schema_version"] = 1;
    j["audio_start_timecode"] = result.audio_start_timecode.to_string();
    j["video_start_timecode"] = result.video_start_timecode.to_string();
    j["ltc_rate"] = manifest.ltc_rate.fps();
    j["sample_rate"] = manifest.sample_rate;
    j["trim_start"] = {
        {"samples", start},
        {"ms", 1e3 * start / sr},
        {"timecode", offset_as_timecode(start, manifest.sample_rate,
                                        manifest.ltc_rate)}};
    j["trim_end"] = {{"samples", end},
                     {"ms", 1e3 * end / sr},
                     {"timecode", offset_as_timecode(end, manifest.sample_rate,
                                                     manifest.ltc_rate)}};
    j["output_samples"] = end - start;
    j["residual_bound_seconds"] = result.residual_bound;
    j["padding_ok"] = result.padding_ok;
    j["padding_deficit_ms"] = result.padding_deficit_ms;
    j["subframe_refinement"] = result.subframe_refinement;
    j["ltc_frames_decoded"] = result.ltc_frames_decoded;
    j["ltc_frames_discarded"] = result.ltc_frames_discarded;
    // trailing policy: output length equals the video span exactly
    j["trailing_policy"] = "exact_video_length";
    return j;
}

std::string alignment_report_text(const SessionManifest& manifest,
                                  const AlignmentResult& result) {
    const double sr = manifest.sample_rate;
    std::ostringstream out;
    out << "audio LTC starts at  " << result.audio_start_timecode.to_string()
        << " (" << manifest.ltc_rate.fps() << " fps LTC)\n"
        << "video starts at      " << result.video_start_timecode.to_string()
        << "\n"
        << "trim start           " << result.trim_start.sample_index
        << " samples (" << format_ms(1e3 * result.trim_start.sample_index / sr)
        << " ms)\n"
        << "trim end             " << result.trim_end.sample_index
        << " samples (" << format_ms(1e3 * result.trim_end.sample_index / sr)
        << " ms)\n"
        << "residual bound       "
        << format_ms(1e3 * result.residual_bound) << " ms (half an LTC frame)\n"
        << "subframe refinement  " << (result.subframe_refinement ? "on" : "off")
        << "\n"
        << "padding              "
        << (result.padding_ok
                ? std::string("ok")
                : "SHORT by " + format_ms(result.padding_deficit_ms) + " ms")
        << "\n";
    return out.str();
}

SyntheticSession generate_synthetic_session(
    const SyntheticSessionSpec& spec, const std::filesystem::path& wav_path) {
    if (spec.channels < 2) {
        throw ConfigError("a synthetic session needs a content channel plus "
                          "the LTC channel");
    }
    if (spec.lead_phase_samples < 0) {
        throw ConfigError("lead_phase_samples must be >= 0");
    }
    if (spec.video_duration_frames <= 0) {
        throw ConfigError("video duration must be positive");
    }

    const double audio_start_s = spec.audio_start.to_seconds();
    // quantize the requested offset to a whole video frame so the manifest
    // timecode is exact; the quantized value is the ground truth
    const auto video_start_frames = static_cast<std::int64_t>(
        std::llround((audio_start_s + spec.video_offset_s) * spec.fps.fps()));
    const Timecode video_start =
        Timecode::from_total_frames(video_start_frames, spec.fps);
    const double true_offset = video_start.to_seconds() - audio_start_s;
    if (true_offset < 0) {
        throw ConfigError("video must not start before the audio");
    }

    const double video_span = static_cast<double>(spec.video_duration_frames) /
                              spec.fps.fps();
    const double total_s = true_offset + video_span + spec.trailing_padding_s;
    const auto n_ltc_frames = static_cast<std::int64_t>(
        std::ceil(total_s * spec.ltc_rate.fps())) + 2;

    LtcEncodeConfig ltc_cfg{.rate = spec.ltc_rate,
                            .sample_rate = spec.sample_rate,
                            .amplitude = spec.ltc_amplitude,
                            .start = spec.audio_start};
    PcmBuffer ltc = encode_ltc(ltc_cfg, n_ltc_frames);
    if (spec.lead_phase_samples >= ltc.frame_count()) {
        throw ConfigError("lead phase exceeds the generated LTC track");
    }
    ltc = trim(ltc, SampleTime{spec.lead_phase_samples, spec.sample_rate},
               SampleTime{ltc.frame_count(), spec.sample_rate});

    const std::int64_t session_len = ltc.frame_count();
    Rng rng(spec.seed);
    std::vector<PcmBuffer> channels;
    for (int c = 0; c < spec.channels - 1; ++c) {
        PcmBuffer ch;
        ch.sample_rate = spec.sample_rate;
        ch.bit_depth = spec.bit_depth;
        ch.channels.emplace_back();
        auto& x = ch.channels[0];
        x.resize(static_cast<std::size_t>(session_len));
        const double tone_hz = 300.0 + 100.0 * c;
        const double w = 2.0 * std::numbers::pi * tone_hz / spec.sample_rate;
        for (std::int64_t i = 0; i < session_len; ++i) {
            x[static_cast<std::size_t>(i)] =
                0.05 * std::sin(w * static_cast<double>(i)) +
                0.005 * rng.gaussian();
        }
        channels.push_back(std::move(ch));
    }
    ltc.bit_depth = spec.bit_depth;
    channels.push_back(std::move(ltc));

    PcmBuffer session = merge_channels(channels);
    write_wav(wav_path, session, spec.bit_depth);

    SessionManifest manifest{
        .audio_path = wav_path,
        .ltc_channel = spec.channels - 1,
        .sample_rate = spec.sample_rate,
        .ltc_rate = spec.ltc_rate,
        .videos = {ManifestVideo{"cam00", video_start,
                                 spec.video_duration_frames, spec.fps}}};
    const std::int64_t true_trim_start =
        static_cast<std::int64_t>(std::llround(true_offset * spec.sample_rate)) -
        spec.lead_phase_samples;
    const std::int64_t true_trim_end =
        true_trim_start +
        static_cast<std::int64_t>(std::llround(video_span * spec.sample_rate));
    return SyntheticSession{std::move(manifest), true_trim_start, true_trim_end,
                            true_offset};
}

}  // namespace avsync
