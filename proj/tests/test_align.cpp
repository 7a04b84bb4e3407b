// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "avsync/align.hpp"
#include "avsync/errors.hpp"
#include "avsync/wav.hpp"
#include "support/test_util.hpp"

using namespace avsync;
using testutil::temp_file;

namespace {

SyntheticSessionSpec base_spec() {
    return SyntheticSessionSpec{.audio_start = Timecode(14, 3, 0, 0, FrameRate(60)),
                                .ltc_rate = FrameRate(60),
                                .fps = FrameRate(60),
                                .sample_rate = 48000,
                                .channels = 3,
                                .video_offset_s = 0.0,
                                .video_duration_frames = 60,
                                .trailing_padding_s = 0.4,
                                .lead_phase_samples = 0,
                                .ltc_amplitude = 0.8,
                                .seed = 1,
                                .bit_depth = 24};
}

}  // namespace

TEST_CASE("zero offset aligns at sample zero") {
    auto spec = base_spec();
    const auto session =
        generate_synthetic_session(spec, temp_file("zero.wav"));
    const AlignmentResult r = align_session(session.manifest);
    CHECK(r.trim_start.sample_index == 0);
    CHECK(session.true_trim_start == 0);
    CHECK(r.padding_ok);
    CHECK(r.audio_start_timecode == spec.audio_start);
}

TEST_CASE("10.5 s offset trims 504000 samples at 48 kHz") {
    auto spec = base_spec();
    spec.video_offset_s = 10.5;
    const auto session =
        generate_synthetic_session(spec, temp_file("half.wav"));
    CHECK(session.true_trim_start == 504000);
    const AlignmentResult r = align_session(session.manifest);
    CHECK(r.trim_start.sample_index == 504000);
    CHECK(r.video_start_timecode ==
          Timecode::parse("14:03:10:30", FrameRate(60)));
    CHECK(r.audio_start_timecode == spec.audio_start);
    CHECK(r.residual_bound == doctest::Approx(1.0 / 120).epsilon(1e-12));
}

TEST_CASE("alignment recovers ground truth across random sessions") {
    std::mt19937 gen(1234);
    std::uniform_real_distribution<double> offset(0.0, 1.5);
    std::uniform_int_distribution<std::int64_t> phase(0, 700);
    std::uniform_int_distribution<int> rate_pick(0, 2);
    const int ltc_rates[3] = {30, 50, 60};

    double worst = 0;
    std::vector<double> errors;
    for (int i = 0; i < 100; ++i) {
        auto spec = base_spec();
        spec.ltc_rate = FrameRate(ltc_rates[rate_pick(gen)]);
        spec.audio_start = Timecode(9, 15, 0, 0, spec.ltc_rate);
        spec.video_offset_s = offset(gen);
        spec.lead_phase_samples = phase(gen);
        spec.video_duration_frames = 45;
        spec.trailing_padding_s = 0.3;
        spec.seed = 1000 + static_cast<std::uint64_t>(i);
        const auto session = generate_synthetic_session(
            spec, temp_file("rand" + std::to_string(i) + ".wav"));
        const AlignmentResult r = align_session(session.manifest);
        const double err =
            std::abs(static_cast<double>(r.trim_start.sample_index -
                                         session.true_trim_start)) /
            spec.sample_rate;
        errors.push_back(err);
        worst = std::max(worst, err);
        // quantization bound: one LTC frame period
        CHECK(err <= 1.0 / spec.ltc_rate.fps());
    }
    std::nth_element(errors.begin(), errors.begin() + errors.size() / 2,
                     errors.end());
    CHECK(errors[errors.size() / 2] <= 1.0 / (2.0 * 30));
    // sub-frame refinement does far better than the frame-level bound
    CHECK(worst <= 2e-3);
}

TEST_CASE("subframe refinement beats frame-level trimming mid-frame") {
    auto spec = base_spec();
    spec.video_offset_s = 0.8;
    spec.lead_phase_samples = 473;  // capture opens mid-LTC-frame
    const auto session = generate_synthetic_session(spec, temp_file("sub.wav"));

    const AlignmentResult refined = align_session(session.manifest);
    CHECK(std::llabs(refined.trim_start.sample_index -
                     session.true_trim_start) <= 48);  // ~1 ms

    const AlignmentResult frame_level = align_session(
        session.manifest, AlignOptions{.subframe_refinement = false});
    CHECK(!frame_level.subframe_refinement);
    // frame-level trim pins sample 0 to the first whole frame's timecode,
    // so it misses by the remainder of the cut frame
    const std::int64_t frame_err = std::llabs(
        frame_level.trim_start.sample_index - session.true_trim_start);
    CHECK(frame_err <= 48000 / 60);
    CHECK(std::llabs(frame_err - (800 - 473)) <= 1);
}

TEST_CASE("aligning an already-aligned session is the identity") {
    auto spec = base_spec();
    spec.video_offset_s = 0.6;
    const auto session = generate_synthetic_session(spec, temp_file("ida.wav"));
    const AlignmentResult first = align_session(session.manifest);
    REQUIRE(first.padding_ok);
    const auto aligned_path = temp_file("ida_out.wav");
    emit_aligned_audio(session.manifest, first, aligned_path);

    SessionManifest again = session.manifest;
    again.audio_path = aligned_path;
    const AlignmentResult second = align_session(again);
    CHECK(second.trim_start.sample_index == 0);
}

TEST_CASE("prepended padding shifts the trim by exactly its length") {
    auto spec = base_spec();
    spec.video_offset_s = 0.5;
    const auto session = generate_synthetic_session(spec, temp_file("pad.wav"));
    const AlignmentResult before = align_session(session.manifest);

    const std::int64_t pad = 12345;
    PcmBuffer audio = read_wav(session.manifest.audio_path);
    for (auto& ch : audio.channels) {
        ch.insert(ch.begin(), static_cast<std::size_t>(pad), 0.0);
    }
    const auto padded_path = temp_file("pad_more.wav");
    write_wav(padded_path, audio, audio.bit_depth);
    SessionManifest padded = session.manifest;
    padded.audio_path = padded_path;
    const AlignmentResult after = align_session(padded);
    CHECK(after.trim_start.sample_index ==
          before.trim_start.sample_index + pad);
}

TEST_CASE("emitted audio is byte-identical to the source over the trim") {
    auto spec = base_spec();
    spec.video_offset_s = 0.75;
    spec.channels = 4;
    const auto session = generate_synthetic_session(spec, temp_file("loss.wav"));
    const AlignmentResult r = align_session(session.manifest);
    REQUIRE(r.padding_ok);
    const auto out_path = temp_file("loss_out.wav");
    emit_aligned_audio(session.manifest, r, out_path);

    // canonical writer layout: 44-byte header, then frames of
    // channels * 3 bytes (24-bit)
    const auto src = testutil::read_bytes(session.manifest.audio_path);
    const auto out = testutil::read_bytes(out_path);
    const std::size_t frame_bytes = 4 * 3;
    const auto start = static_cast<std::size_t>(r.trim_start.sample_index);
    const auto len = static_cast<std::size_t>(r.trim_end.sample_index -
                                              r.trim_start.sample_index);
    REQUIRE(out.size() >= 44 + len * frame_bytes);
    CHECK(std::equal(out.begin() + 44, out.begin() + 44 + len * frame_bytes,
                     src.begin() + 44 + start * frame_bytes));

    // output length equals the video span
    const WavInfo info = probe_wav(out_path);
    CHECK(info.frame_count ==
          r.trim_end.sample_index - r.trim_start.sample_index);
    CHECK(std::llabs(info.frame_count - 48000) <= 1);  // 60 frames at 60 fps
}

TEST_CASE("dropping the LTC channel removes exactly one channel") {
    auto spec = base_spec();
    spec.channels = 3;
    const auto session = generate_synthetic_session(spec, temp_file("drop.wav"));
    const AlignmentResult r = align_session(session.manifest);
    const auto out_path = temp_file("drop_out.wav");
    emit_aligned_audio(session.manifest, r, out_path,
                       EmitOptions{.force_pad = false, .drop_ltc_channel = true});
    CHECK(probe_wav(out_path).channels == 2);
}

TEST_CASE("padding deficit is reported and only force emits") {
    auto spec = base_spec();
    spec.video_offset_s = 0.2;
    spec.video_duration_frames = 120;  // video runs past the audio tail
    spec.trailing_padding_s = 0.0;
    const auto session = generate_synthetic_session(spec, temp_file("def.wav"));
    // shorten the audio so the video interval is not covered
    PcmBuffer audio = read_wav(session.manifest.audio_path);
    const std::int64_t cut = 24000;  // half a second
    const auto short_path = temp_file("def_short.wav");
    write_wav(short_path,
              trim(audio, SampleTime{0, 48000},
                   SampleTime{audio.frame_count() - cut, 48000}),
              audio.bit_depth);
    SessionManifest short_manifest = session.manifest;
    short_manifest.audio_path = short_path;

    const AlignmentResult r = align_session(short_manifest);
    CHECK(!r.padding_ok);
    CHECK(r.padding_deficit_ms > 0);

    const auto out_path = temp_file("def_out.wav");
    try {
        emit_aligned_audio(short_manifest, r, out_path);
        FAIL("expected PaddingError");
    } catch (const PaddingError& e) {
        CHECK(e.deficit_ms() == doctest::Approx(r.padding_deficit_ms));
        CHECK(std::string(e.what()).find("ms") != std::string::npos);
    }

    emit_aligned_audio(short_manifest, r, out_path,
                       EmitOptions{.force_pad = true});
    const PcmBuffer out = read_wav(out_path);
    CHECK(out.frame_count() ==
          r.trim_end.sample_index - r.trim_start.sample_index);
    // the forced region is digital silence
    const auto tail_start = static_cast<std::size_t>(
        out.frame_count() - 100);
    for (std::size_t i = tail_start;
         i < static_cast<std::size_t>(out.frame_count()); ++i) {
        CHECK(out.channels[0][i] == 0.0);
    }
}

TEST_CASE("a dropout at the trim point is a hard error") {
    auto spec = base_spec();
    spec.video_offset_s = 0.7;
    const auto session = generate_synthetic_session(spec, temp_file("gap.wav"));
    PcmBuffer audio = read_wav(session.manifest.audio_path);
    const std::size_t ltc = static_cast<std::size_t>(session.manifest.ltc_channel);
    const std::int64_t trim = session.true_trim_start;
    const std::int64_t frame_len = 800;  // 60 fps at 48 kHz

    SUBCASE("dropout overlapping the boundary") {
        for (std::int64_t i = trim - 4 * frame_len; i < trim + 4 * frame_len;
             ++i) {
            audio.channels[ltc][static_cast<std::size_t>(i)] = 0.0;
        }
        const auto path = temp_file("gap_bad.wav");
        write_wav(path, audio, audio.bit_depth);
        SessionManifest m = session.manifest;
        m.audio_path = path;
        CHECK_THROWS_AS(align_session(m), DropoutError);
    }

    SUBCASE("dropout away from the boundary is tolerated") {
        for (std::int64_t i = trim + 12 * frame_len; i < trim + 18 * frame_len;
             ++i) {
            audio.channels[ltc][static_cast<std::size_t>(i)] = 0.0;
        }
        const auto path = temp_file("gap_ok.wav");
        write_wav(path, audio, audio.bit_depth);
        SessionManifest m = session.manifest;
        m.audio_path = path;
        const AlignmentResult r = align_session(m);
        CHECK(std::llabs(r.trim_start.sample_index - trim) <= 48);
    }
}

TEST_CASE("manifest round-trips through JSON") {
    auto spec = base_spec();
    const auto session = generate_synthetic_session(spec, temp_file("mani.wav"));
    const auto path = temp_file("mani.json");
    session.manifest.save(path);
    const SessionManifest loaded = SessionManifest::load(path);
    CHECK(loaded.audio_path == session.manifest.audio_path);
    CHECK(loaded.ltc_channel == session.manifest.ltc_channel);
    CHECK(loaded.sample_rate == session.manifest.sample_rate);
    CHECK(loaded.ltc_rate == session.manifest.ltc_rate);
    REQUIRE(loaded.videos.size() == 1);
    CHECK(loaded.videos[0].start_timecode ==
          session.manifest.videos[0].start_timecode);
    CHECK(loaded.videos[0].duration_frames ==
          session.manifest.videos[0].duration_frames);

    const auto bad = temp_file("mani_bad.json");
    testutil::write_bytes(bad, {'{', 'x'});
    CHECK_THROWS_AS(SessionManifest::load(bad), ParseError);
}

TEST_CASE("manifest declarations are checked against the file") {
    auto spec = base_spec();
    const auto session = generate_synthetic_session(spec, temp_file("chk.wav"));

    SessionManifest wrong_rate = session.manifest;
    wrong_rate.sample_rate = 44100;
    CHECK_THROWS_AS(align_session(wrong_rate), ConfigError);

    SessionManifest wrong_channel = session.manifest;
    wrong_channel.ltc_channel = 12;
    CHECK_THROWS_AS(align_session(wrong_channel), ConfigError);

    // LTC expected on channel 0 but the generator put it last
    SessionManifest off_channel = session.manifest;
    off_channel.ltc_channel = 0;
    CHECK_THROWS_AS(align_session(off_channel), NoLtcError);
}

TEST_CASE("multiple videos anchor at the earliest start") {
    auto spec = base_spec();
    spec.video_offset_s = 1.0;
    spec.video_duration_frames = 30;
    spec.trailing_padding_s = 1.2;
    const auto session = generate_synthetic_session(spec, temp_file("multi.wav"));
    SessionManifest m = session.manifest;
    // a second camera starting 12 frames later, running 30 frames
    ManifestVideo late = m.videos[0];
    late.id = "cam01";
    late.start_timecode = late.start_timecode.add_frames(12);
    m.videos.push_back(late);

    const AlignmentResult r = align_session(m);
    CHECK(r.video_start_timecode == m.videos[0].start_timecode);
    // span runs to the late camera's end: 42 frames total
    const std::int64_t span =
        r.trim_end.sample_index - r.trim_start.sample_index;
    CHECK(span == 42 * 800);
}

TEST_CASE("alignment report carries offsets in all three forms") {
    auto spec = base_spec();
    spec.video_offset_s = 10.5;
    const auto session = generate_synthetic_session(spec, temp_file("rep.wav"));
    const AlignmentResult r = align_session(session.manifest);
    const nlohmann::json j = alignment_report_json(session.manifest, r);
    CHECK(j["schema_version"] == 1);
    CHECK(j["trim_start"]["samples"] == 504000);
    CHECK(j["trim_start"]["ms"].get<double>() ==
          doctest::Approx(10500.0).epsilon(1e-9));
    CHECK(j["trim_start"]["timecode"] == "00:00:10:30");
    CHECK(j["padding_ok"] == true);
    const std::string text = alignment_report_text(session.manifest, r);
    CHECK(text.find("504000") != std::string::npos);
    CHECK(text.find("14:03:10:30") != std::string::npos);
}
