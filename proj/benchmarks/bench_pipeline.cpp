// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <filesystem>

#include "avsync/align.hpp"
#include "avsync/clocksim.hpp"
#include "avsync/verify.hpp"
#include "avsync/wav.hpp"

using namespace avsync;

namespace {

std::filesystem::path bench_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

static void BM_WavRoundtrip(benchmark::State& state) {
    const auto channels = static_cast<int>(state.range(0));
    PcmBuffer b;
    b.sample_rate = 48000;
    b.bit_depth = 24;
    for (int c = 0; c < channels; ++c) {
        std::vector<double> ch(48000);
        for (std::size_t i = 0; i < ch.size(); ++i) {
            ch[i] = 0.4 * std::sin(0.01 * static_cast<double>(i + c));
        }
        b.channels.push_back(std::move(ch));
    }
    const auto path = bench_file("avsync_bench.wav");
    for (auto _ : state) {
        write_wav(path, b, 24);
        benchmark::DoNotOptimize(read_wav(path));
    }
    state.SetBytesProcessed(state.iterations() * 48000 * channels * 3 * 2);
}
BENCHMARK(BM_WavRoundtrip)->Arg(2)->Arg(32);

static void BM_AlignSession(benchmark::State& state) {
    const SyntheticSessionSpec spec{
        .audio_start = Timecode(10, 0, 0, 0, FrameRate(60)),
        .ltc_rate = FrameRate(60),
        .fps = FrameRate(60),
        .sample_rate = 48000,
        .channels = 4,
        .video_offset_s = 0.5,
        .video_duration_frames = 120,
        .trailing_padding_s = 0.5,
        .lead_phase_samples = 200,
        .ltc_amplitude = 0.8,
        .seed = 3,
        .bit_depth = 24};
    const auto session =
        generate_synthetic_session(spec, bench_file("avsync_bench_sess.wav"));
    for (auto _ : state) {
        benchmark::DoNotOptimize(align_session(session.manifest));
    }
}
BENCHMARK(BM_AlignSession);

static void BM_PtpSession(benchmark::State& state) {
    for (auto _ : state) {
        SimClock master("m", 0.0, 1.0, 1e-9, 5);
        std::vector<SimClock> slaves;
        for (int i = 0; i < 11; ++i) {
            slaves.emplace_back("s" + std::to_string(i), 1e-5 * i, 2.0, 1e-9,
                                6 + static_cast<std::uint64_t>(i));
        }
        PtpSessionConfig cfg;
        cfg.n_rounds = static_cast<int>(state.range(0));
        cfg.round_interval = 0.125;
        benchmark::DoNotOptimize(run_ptp_session(master, slaves, cfg));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 11);
}
BENCHMARK(BM_PtpSession)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
