// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "avsync/ltc.hpp"
#include "avsync/random.hpp"

using namespace avsync;

static void BM_EncodeLtc(benchmark::State& state) {
    const FrameRate rate(60);
    const LtcEncodeConfig cfg{rate, 48000, 0.8, Timecode(0, 0, 0, 0, rate)};
    const auto frames = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_ltc(cfg, frames));
    }
    state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_EncodeLtc)->Arg(60)->Arg(600);

static void BM_DecodeLtcClean(benchmark::State& state) {
    const FrameRate rate(60);
    const LtcEncodeConfig cfg{rate, 48000, 0.8, Timecode(0, 0, 0, 0, rate)};
    const auto frames = state.range(0);
    const PcmBuffer buf = encode_ltc(cfg, frames);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode_ltc(buf, rate));
    }
    state.SetItemsProcessed(state.iterations() * frames);
    state.SetBytesProcessed(state.iterations() * buf.frame_count() *
                            static_cast<std::int64_t>(sizeof(double)));
}
BENCHMARK(BM_DecodeLtcClean)->Arg(60)->Arg(600);

static void BM_DecodeLtcNoisy(benchmark::State& state) {
    const FrameRate rate(60);
    const LtcEncodeConfig cfg{rate, 48000, 0.8, Timecode(0, 0, 0, 0, rate)};
    PcmBuffer buf = encode_ltc(cfg, 300);
    Rng rng(1);
    for (auto& x : buf.channels[0]) x += rng.gaussian(0.0, 0.08);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode_ltc(buf, rate));
    }
    state.SetItemsProcessed(state.iterations() * 300);
}
BENCHMARK(BM_DecodeLtcNoisy);

BENCHMARK_MAIN();
