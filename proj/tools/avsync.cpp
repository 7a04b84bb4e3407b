// SPDX-License-Identifier: Apache-2.0
//
// avsync — timecode, LTC and clock-sync toolkit for the capture pipeline.
// Exit codes: 0 success, 1 verification failed, 2 input/parse error,
// 3 internal error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "avsync/align.hpp"
#include "avsync/clocksim.hpp"
#include "avsync/errors.hpp"
#include "avsync/ltc.hpp"
#include "avsync/timecode.hpp"
#include "avsync/verify.hpp"
#include "avsync/wav.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInternal = 3;

// Durations are only accepted with an explicit unit: "1.5s", "250ms",
// "48000smp", "30f", or a full "HH:MM:SS:FF" timecode. No bare numbers —
// they breed unit bugs at the shell boundary.
struct Duration {
    double seconds = 0;
    bool from_frames = false;
    std::int64_t frames = 0;
};

Duration parse_duration(const std::string& text, avsync::FrameRate fps,
                        int sample_rate) {
    using avsync::ParseError;
    if (text.size() == 11 && text[2] == ':') {
        const auto tc = avsync::Timecode::parse(text, fps);
        return Duration{tc.to_seconds(), true, tc.total_frames()};
    }
    auto ends_with = [&](const char* suffix) {
        const std::size_t n = std::strlen(suffix);
        return text.size() > n && text.compare(text.size() - n, n, suffix) == 0;
    };
    auto number_part = [&](std::size_t suffix_len) {
        const std::string body = text.substr(0, text.size() - suffix_len);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(body, &used);
        } catch (const std::exception&) {
            throw ParseError("bad duration value in '" + text + "'", 0);
        }
        if (used != body.size()) {
            throw ParseError("bad duration value in '" + text + "'", used);
        }
        return v;
    };
    if (ends_with("smp")) {
        const double v = number_part(3);
        return Duration{v / sample_rate, false, 0};
    }
    if (ends_with("ms")) return Duration{number_part(2) * 1e-3, false, 0};
    if (ends_with("s")) return Duration{number_part(1), false, 0};
    if (ends_with("f")) {
        const double v = number_part(1);
        return Duration{v / fps.fps(), true,
                        static_cast<std::int64_t>(std::llround(v))};
    }
    throw ParseError("duration '" + text +
                         "' needs a unit suffix (s, ms, smp, f) or an "
                         "HH:MM:SS:FF timecode",
                     text.size());
}

std::int64_t duration_to_frames(const Duration& d, avsync::FrameRate fps) {
    if (d.from_frames) return d.frames;
    return static_cast<std::int64_t>(std::llround(d.seconds * fps.fps()));
}

int cmd_ltc_encode(const std::string& start_text, int fps_value,
                   int sample_rate, std::optional<std::int64_t> frames,
                   const std::string& duration_text, double amplitude,
                   const std::string& out_path, bool json) {
    const avsync::FrameRate rate(fps_value);
    const avsync::Timecode start = avsync::Timecode::parse(start_text, rate);
    std::int64_t n_frames = 0;
    if (frames) {
        n_frames = *frames;
    } else if (!duration_text.empty()) {
        n_frames = duration_to_frames(parse_duration(duration_text, rate,
                                                     sample_rate),
                                      rate);
    } else {
        throw avsync::ConfigError("need --frames or --duration");
    }
    const avsync::LtcEncodeConfig config{rate, sample_rate, amplitude, start};
    const avsync::PcmBuffer buffer = avsync::encode_ltc(config, n_frames);
    avsync::write_wav(out_path, buffer, 16);
    if (json) {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["out"] = out_path;
        j["start_timecode"] = start.to_string();
        j["fps"] = rate.fps();
        j["sample_rate"] = sample_rate;
        j["frames"] = n_frames;
        j["samples"] = buffer.frame_count();
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "wrote " << buffer.frame_count() << " samples ("
                  << n_frames << " LTC frames from " << start.to_string()
                  << " at " << rate.fps() << " fps) to " << out_path << '\n';
    }
    return kExitOk;
}

int cmd_ltc_decode(const std::string& in_path, int channel,
                   std::optional<int> fps_hint, bool json) {
    const avsync::PcmBuffer track = avsync::read_wav_channel(in_path, channel);
    std::optional<avsync::FrameRate> hint;
    if (fps_hint) hint = avsync::FrameRate(*fps_hint);
    const avsync::LtcDecodeResult result = avsync::decode_ltc(track, hint);
    const auto& first = result.frames.front();
    const auto& last = result.frames.back();
    if (json) {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["frames_decoded"] = result.frames.size();
        j["frames_discarded"] = result.discarded;
        j["fps"] = result.rate.fps();
        j["bit_rate_estimate"] = result.bit_rate_estimate;
        j["start_timecode"] = first.timecode.to_string();
        j["start_sample"] = first.first_sample_index;
        j["end_timecode"] = last.timecode.to_string();
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "decoded " << result.frames.size() << " LTC frames at "
                  << result.rate.fps() << " fps (" << result.discarded
                  << " discarded)\n"
                  << "first " << first.timecode.to_string() << " at sample "
                  << first.first_sample_index << "\n"
                  << "last  " << last.timecode.to_string() << '\n';
    }
    return kExitOk;
}

int cmd_align(const std::string& manifest_path, const std::string& out_path,
              const std::string& report_path, bool force_pad, bool no_subframe,
              bool drop_ltc, bool json) {
    const auto manifest = avsync::SessionManifest::load(manifest_path);
    const avsync::AlignOptions options{.subframe_refinement = !no_subframe};
    const avsync::AlignmentResult result =
        avsync::align_session(manifest, options);
    const nlohmann::json report = alignment_report_json(manifest, result);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw avsync::IoError("cannot write report " + report_path);
        out << report.dump(2) << '\n';
    }
    if (!out_path.empty()) {
        avsync::emit_aligned_audio(
            manifest, result, out_path,
            avsync::EmitOptions{force_pad, drop_ltc});
    } else if (!result.padding_ok && !force_pad) {
        throw avsync::PaddingError(
            "audio does not encompass the video interval; short by " +
                std::to_string(result.padding_deficit_ms) + " ms",
            result.padding_deficit_ms);
    }
    if (json) {
        std::cout << report.dump(2) << '\n';
    } else {
        std::cout << alignment_report_text(manifest, result);
    }
    return kExitOk;
}

int cmd_verify(const std::string& audio_path, int channel,
               const std::string& annotation_path,
               const std::string& threshold_text, bool json) {
    const auto annotation = avsync::AvEventAnnotation::load(annotation_path);
    const avsync::PcmBuffer audio =
        avsync::read_wav_channel(audio_path, channel);
    double threshold = 0;
    if (!threshold_text.empty()) {
        threshold = parse_duration(threshold_text, annotation.fps,
                                   audio.sample_rate)
                        .seconds;
    }
    const avsync::SyncReport report =
        avsync::measure_av_offset(audio, annotation, threshold);
    if (json) {
        std::cout << report.to_json().dump(2) << '\n';
    } else {
        std::cout << report.summary() << '\n';
    }
    return report.pass ? kExitOk : kExitVerifyFail;
}

int cmd_ptp_sim(const std::string& scenario_path, const std::string& out_path,
                bool json) {
    const avsync::PtpScenario scenario =
        avsync::load_ptp_scenario(scenario_path);
    std::vector<avsync::SimClock> clocks = scenario.build_clocks();
    avsync::SimClock& master = clocks.front();
    std::vector<avsync::SimClock> slaves(clocks.begin() + 1, clocks.end());
    const avsync::PtpTrace trace =
        avsync::run_ptp_session(master, slaves, scenario.session);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw avsync::IoError("cannot write trace " + out_path);
        avsync::write_trace_csv(out, trace);
    }

    std::vector<avsync::SimClock> array;
    array.push_back(master);
    for (const auto& s : slaves) array.push_back(s);
    const double t_end =
        scenario.session.n_rounds * scenario.session.round_interval;
    const double spread = avsync::timestamp_spread(array, t_end);

    if (json) {
        nlohmann::json j;
        j["schema_version"] = 1;
        j["rounds"] = scenario.session.n_rounds;
        j["timestamp_spread_seconds"] = spread;
        j["final_residual_seconds"] = nlohmann::json::object();
        for (std::size_t i = 0; i < trace.slave_ids.size(); ++i) {
            j["final_residual_seconds"][trace.slave_ids[i]] =
                trace.residuals[i].back();
        }
        std::cout << j.dump(2) << '\n';
    } else if (out_path.empty()) {
        avsync::write_trace_csv(std::cout, trace);
    } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", spread);
        std::cout << "ran " << scenario.session.n_rounds << " rounds for "
                  << trace.slave_ids.size() << " slaves; timestamp spread "
                  << buf << " s; trace written to " << out_path << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synchronized audio-visual capture timing toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --json sit after the subcommand too
    bool json = false;
    app.add_flag("--json", json, "machine-readable JSON on stdout");

    // ltc-encode
    auto* enc = app.add_subcommand("ltc-encode",
                                   "synthesize an LTC audio track");
    std::string enc_start = "00:00:00:00";
    int enc_fps = 30;
    int enc_sr = 48000;
    std::optional<std::int64_t> enc_frames;
    std::string enc_duration;
    double enc_amplitude = 0.8;
    std::string enc_out;
    enc->add_option("--start", enc_start, "start timecode HH:MM:SS:FF");
    enc->add_option("--fps", enc_fps, "LTC frame rate")->required();
    enc->add_option("--sr,--sample-rate", enc_sr, "sample rate in Hz");
    enc->add_option("--frames", enc_frames, "number of LTC frames");
    enc->add_option("--duration", enc_duration,
                    "duration with unit suffix (s, ms, smp, f, or timecode)");
    enc->add_option("--amplitude", enc_amplitude, "fraction of full scale");
    enc->add_option("-o,--out", enc_out, "output WAV path")->required();

    // ltc-decode
    auto* dec = app.add_subcommand("ltc-decode",
                                   "decode an LTC track from a WAV file");
    std::string dec_in;
    int dec_channel = 0;
    std::optional<int> dec_fps;
    dec->add_option("-i,--in", dec_in, "input WAV path")->required();
    dec->add_option("--channel", dec_channel, "channel carrying the LTC");
    dec->add_option("--fps", dec_fps, "frame-rate hint (else inferred)");

    // align
    auto* aln = app.add_subcommand(
        "align", "timecode-align a session's audio to its video");
    std::string aln_manifest, aln_out, aln_report;
    bool aln_force_pad = false, aln_no_subframe = false, aln_drop_ltc = false;
    aln->add_option("-m,--manifest", aln_manifest, "session manifest JSON")
        ->required();
    aln->add_option("-o,--out", aln_out, "write the trimmed WAV here");
    aln->add_option("--report", aln_report, "write the JSON report here");
    aln->add_flag("--force-pad", aln_force_pad,
                  "fill a padding deficit with digital silence");
    aln->add_flag("--no-subframe", aln_no_subframe,
                  "frame-level trim only (no sub-frame refinement)");
    aln->add_flag("--drop-ltc", aln_drop_ltc,
                  "omit the LTC channel from the output");

    // verify
    auto* ver = app.add_subcommand(
        "verify", "measure AV offset of an aligned track against an "
                  "annotated visual event");
    std::string ver_audio, ver_annotation, ver_threshold;
    int ver_channel = 0;
    ver->add_option("-a,--audio", ver_audio, "aligned audio WAV")->required();
    ver->add_option("--channel", ver_channel, "channel to analyze");
    ver->add_option("--annotation", ver_annotation,
                    "visual event annotation JSON")
        ->required();
    ver->add_option("--threshold", ver_threshold,
                    "pass threshold with unit suffix (default: one frame)");

    // ptp-sim
    auto* ptp = app.add_subcommand("ptp-sim",
                                   "simulate PTP clock discipline of a "
                                   "camera array");
    std::string ptp_scenario, ptp_out;
    ptp->add_option("-s,--scenario", ptp_scenario, "scenario JSON")->required();
    ptp->add_option("-o,--out", ptp_out, "write the residual trace CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (enc->parsed()) {
            return cmd_ltc_encode(enc_start, enc_fps, enc_sr, enc_frames,
                                  enc_duration, enc_amplitude, enc_out, json);
        }
        if (dec->parsed()) {
            return cmd_ltc_decode(dec_in, dec_channel, dec_fps, json);
        }
        if (aln->parsed()) {
            return cmd_align(aln_manifest, aln_out, aln_report, aln_force_pad,
                             aln_no_subframe, aln_drop_ltc, json);
        }
        if (ver->parsed()) {
            return cmd_verify(ver_audio, ver_channel, ver_annotation,
                              ver_threshold, json);
        }
        if (ptp->parsed()) {
            return cmd_ptp_sim(ptp_scenario, ptp_out, json);
        }
        return kExitInternal;
    } catch (const avsync::ParseError& e) {
        std::cerr << "error: " << e.what() << " (at offset " << e.offset()
                  << ")\n";
        return kExitInputError;
    } catch (const avsync::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
