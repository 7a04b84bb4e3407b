// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "avsync/errors.hpp"
#include "avsync/ltc.hpp"

namespace avsync {

namespace {

constexpr double kHighpassCutoffHz = 5.0;
constexpr double kEnvelopeTauS = 0.020;
constexpr double kHysteresisFraction = 0.25;
constexpr double kHalfFullThreshold = 0.75;  // of one bit period
constexpr double kDropoutFactor = 2.5;       // of one bit period
constexpr double kPeriodAlpha = 0.05;        // tracker smoothing
constexpr std::size_t kMinTransitions = 160;

// Interpolated polarity-flip positions. A gentle one-pole high-pass strips
// DC, then running min/max envelopes feed a Schmitt trigger whose thresholds
// sit a quarter of the way from the tracked mid level to each rail. Flip
// positions are the mid-level crossings, interpolated between samples. The
// filter state assumes silence before sample 0 so the opening edge is seen.
std::vector<double> collect_transitions(const std::vector<double>& x, int sr) {
    std::vector<double> out;
    if (x.empty()) return out;

    const double hp = std::exp(-2.0 * std::numbers::pi * kHighpassCutoffHz / sr);
    const double env_k = 1.0 - std::exp(-1.0 / (kEnvelopeTauS * sr));

    double prev_x = 0.0;
    double prev_y = 0.0;
    double env_lo = 0.0, env_hi = 0.0;
    bool have_env = false;
    int state = 0;  // +1 / -1 / 0 = not yet acquired
    double last_crossing = -1.0;
    double prev_dev = 0.0;

    for (std::size_t n = 0; n < x.size(); ++n) {
        const double y = hp * (prev_y + x[n] - prev_x);
        prev_x = x[n];
        prev_y = y;

        if (!have_env) {
            env_lo = std::min(y, 0.0);
            env_hi = std::max(y, 0.0);
            have_env = true;
        }
        double mid = 0.5 * (env_lo + env_hi);
        env_hi = std::max(y, env_hi + env_k * (mid - env_hi));
        env_lo = std::min(y, env_lo + env_k * (mid - env_lo));
        mid = 0.5 * (env_lo + env_hi);

        const double dev = y - mid;
        if (n > 0 && ((prev_dev < 0.0 && dev >= 0.0) ||
                      (prev_dev >= 0.0 && dev < 0.0))) {
            const double denom = prev_dev - dev;
            const double frac = denom != 0.0 ? prev_dev / denom : 0.5;
            last_crossing = static_cast<double>(n - 1) + frac;
        }
        prev_dev = dev;

        const double swing_hi = kHysteresisFraction * (env_hi - mid);
        const double swing_lo = kHysteresisFraction * (mid - env_lo);
        if (state >= 0 && swing_lo > 0.0 && dev < -swing_lo) {
            if (state > 0 && last_crossing >= 0.0) out.push_back(last_crossing);
            state = -1;
        } else if (state <= 0 && swing_hi > 0.0 && dev > swing_hi) {
            if (state < 0 && last_crossing >= 0.0) out.push_back(last_crossing);
            state = 1;
        }
    }
    return out;
}

// Seed for the bit-period tracker: twice a low percentile of the
// inter-transition intervals. The half-bit cluster always holds well over
// 20% of the intervals (the sync word alone contributes 13 ones per frame).
double initial_period(const std::vector<double>& transitions) {
    std::vector<double> intervals;
    intervals.reserve(transitions.size());
    for (std::size_t i = 1; i < transitions.size(); ++i) {
        intervals.push_back(transitions[i] - transitions[i - 1]);
    }
    if (intervals.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t k = intervals.size() / 5;
    std::nth_element(intervals.begin(), intervals.begin() + k, intervals.end());
    return 2.0 * intervals[k];
}

struct DemodBit {
    double cell_start;  // fractional sample position of the cell boundary
    bool value;
};

struct Demodulation {
    std::vector<DemodBit> bits;
    double period;                   // samples per bit after tracking
    std::vector<std::size_t> resets; // indices into bits where lock was lost
};

Demodulation demodulate(const std::vector<double>& transitions,
                        double period_seed) {
    Demodulation d;
    d.period = period_seed;
    const double lo = 0.8 * period_seed, hi = 1.2 * period_seed;

    bool pending_half = false;
    double pending_start = 0.0;
    for (std::size_t i = 1; i < transitions.size(); ++i) {
        const double start = transitions[i - 1];
        const double dt = transitions[i] - start;
        if (dt >= kDropoutFactor * d.period) {
            pending_half = false;
            d.resets.push_back(d.bits.size());
            continue;
        }
        if (dt > kHalfFullThreshold * d.period) {
            // one full cell = a 0 bit; a dangling half before it was the
            // tail of a cell we entered mid-way
            pending_half = false;
            d.bits.push_back({start, false});
            d.period += kPeriodAlpha * (dt - d.period);
        } else {
            if (pending_half) {
                d.bits.push_back({pending_start, true});
                pending_half = false;
            } else {
                pending_half = true;
                pending_start = start;
            }
            d.period += kPeriodAlpha * (2.0 * dt - d.period);
        }
        d.period = std::clamp(d.period, lo, hi);
    }
    return d;
}

FrameRate nearest_supported_rate(double fps_estimate) {
    int best = FrameRate::supported[0];
    double best_err = std::numeric_limits<double>::infinity();
    for (int fps : FrameRate::supported) {
        const double err = std::abs(std::log(fps_estimate / fps));
        if (err < best_err) {
            best_err = err;
            best = fps;
        }
    }
    return FrameRate(best);
}

struct Candidate {
    LtcFrame frame;
    double first_bit_start;
};

// Slides the bit stream through a 16-bit register; every sync-word hit with
// 80 uninterrupted bits behind it yields one candidate frame.
std::vector<Candidate> assemble_candidates(const Demodulation& d) {
    std::vector<Candidate> out;
    std::uint32_t sync_reg = 0;
    std::size_t run_bits = 0;  // bits since start or since the last reset
    std::size_t next_reset = 0;

    std::array<DemodBit, 80> ring{};
    for (std::size_t i = 0; i < d.bits.size(); ++i) {
        while (next_reset < d.resets.size() && d.resets[next_reset] == i) {
            sync_reg = 0;
            run_bits = 0;
            ++next_reset;
        }
        ring[i % 80] = d.bits[i];
        sync_reg = ((sync_reg << 1) | (d.bits[i].value ? 1u : 0u)) & 0xFFFFu;
        ++run_bits;
        if (run_bits >= 80 && sync_reg == LtcFrame::sync_word) {
            Candidate c;
            const std::size_t first = i + 1 - 80;
            for (int b = 0; b < 80; ++b) {
                c.frame.set_bit(
                    b, ring[(first + static_cast<std::size_t>(b)) % 80].value);
            }
            c.first_bit_start = ring[first % 80].cell_start;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

double bit_period_estimate(const PcmBuffer& signal) {
    if (signal.channel_count() != 1) {
        throw ConfigError("bit_period_estimate expects a mono buffer");
    }
    const auto transitions = collect_transitions(signal.channels[0],
                                                 signal.sample_rate);
    if (transitions.size() < kMinTransitions) {
        throw NoLtcError("insufficient transitions for a bit-period estimate (" +
                             std::to_string(transitions.size()) + " < " +
                             std::to_string(kMinTransitions) + ")",
                         transitions.size(),
                         std::numeric_limits<double>::quiet_NaN());
    }
    const auto d = demodulate(transitions, initial_period(transitions));
    return signal.sample_rate / d.period;
}

LtcDecodeResult decode_ltc(const PcmBuffer& signal,
                           std::optional<FrameRate> rate_hint) {
    if (signal.channel_count() != 1) {
        throw ConfigError("decode_ltc expects a mono buffer");
    }
    if (signal.frame_count() == 0) {
        throw NoLtcError("no LTC found: empty signal", 0,
                         std::numeric_limits<double>::quiet_NaN());
    }
    auto transitions = collect_transitions(signal.channels[0],
                                           signal.sample_rate);
    const std::size_t real_transitions = transitions.size();
    const double seed = initial_period(transitions);
    if (real_transitions < kMinTransitions) {
        throw NoLtcError("no LTC found: only " +
                             std::to_string(real_transitions) +
                             " transitions in the signal",
                         real_transitions, seed);
    }
    // biphase mark flips at every cell boundary, so the stream edges are
    // boundaries too; making them explicit recovers the first and last frame
    transitions.insert(transitions.begin(), -0.5);
    transitions.push_back(static_cast<double>(signal.frame_count()) - 0.5);

    const auto demod = demodulate(transitions, seed);
    const double bit_rate = signal.sample_rate / demod.period;
    const FrameRate rate =
        rate_hint ? *rate_hint : nearest_supported_rate(bit_rate / 80.0);

    LtcDecodeResult result{.frames = {}, .discarded = 0, .rate = rate,
                           .bit_rate_estimate = bit_rate};
    std::int64_t last_total_frames = -1;
    for (const auto& c : assemble_candidates(demod)) {
        // the transition midpoint sits half a sample before the new level
        const auto first_sample =
            static_cast<std::int64_t>(std::llround(c.first_bit_start + 0.5));
        try {
            const Timecode tc = c.frame.timecode(rate);
            if (!c.frame.parity_valid(rate) ||
                tc.total_frames() <= last_total_frames) {
                ++result.discarded;
                continue;
            }
            last_total_frames = tc.total_frames();
            result.frames.push_back({tc, first_sample, c.frame});
        } catch (const RangeError&) {
            ++result.discarded;
        }
    }
    if (result.frames.empty()) {
        throw NoLtcError(
            "no LTC found: " + std::to_string(real_transitions) +
                " transitions, estimated bit period " +
                std::to_string(demod.period) + " samples, but no frame "
                "passed the sync and digit checks",
            real_transitions, demod.period);
    }
    return result;
}

}  // namespace avsync
