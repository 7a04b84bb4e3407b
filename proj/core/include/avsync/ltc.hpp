// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <vector>

#include "avsync/pcm.hpp"
#include "avsync/timecode.hpp"

namespace avsync {

/// One 80-bit linear-timecode frame, SMPTE 12M layout. bit(0) is transmitted
/// first. BCD digit fields:
///
///   frame units  0-3      seconds units 16-19     minutes units 32-35
///   frame tens   8-9      seconds tens  24-26     minutes tens  40-42
///   hours units 48-51     hours tens    56-57
///
/// Flag bits: drop-frame 10, color-frame 11, parity 27 (bit 59 at 25 fps).
/// At 50/60 fps the frame-tens digit needs values up to 5, which the 2-bit
/// standard field cannot hold; it extends into bit 10, which drop-frame-free
/// integer-rate timecode leaves clear. The eight 4-bit user groups sit at
/// 4-7, 12-15, 20-23, 28-31, 36-39, 44-47, 52-55, 60-63 and are carried
/// untouched. Bits 64-79 hold the sync word 0011111111111101.
class LtcFrame {
public:
    static constexpr int bit_count = 80;
    static constexpr int sync_offset = 64;
    /// Sync word as seen by a shift register that receives bit 64 first:
    /// word = (word << 1) | bit  ==>  0x3FFD after bit 79.
    static constexpr std::uint16_t sync_word = 0x3FFD;

    /// All-zero data bits with a valid sync word.
    LtcFrame();

    /// Frame carrying `tc`, zero user bits, drop-frame and color-frame
    /// clear, parity applied.
    static LtcFrame for_timecode(const Timecode& tc);

    bool bit(int index) const { return bits_[static_cast<size_t>(index)]; }
    void set_bit(int index, bool value) {
        bits_[static_cast<size_t>(index)] = value;
    }

    /// Decodes the BCD digit fields; RangeError when any digit is out of
    /// range for `rate`.
    Timecode timecode(FrameRate rate) const;

    std::uint8_t user_group(int group) const;  // group 1..8, raw nibble
    void set_user_group(int group, std::uint8_t nibble);

    bool sync_word_valid() const;

    /// Parity convention: the 80-bit frame must contain an even number of
    /// zero bits. The adjustable bit is 27, or 59 at 25 fps.
    static int parity_bit_index(FrameRate rate);
    bool parity_valid(FrameRate rate) const;
    void apply_parity(FrameRate rate);

    friend bool operator==(const LtcFrame&, const LtcFrame&) = default;

private:
    std::bitset<bit_count> bits_;
};

struct LtcEncodeConfig {
    FrameRate rate;
    int sample_rate = 48000;
    double amplitude = 0.8;  // fraction of full scale, (0, 1]
    Timecode start;

    /// Throws ConfigError unless there are at least 2.5 samples per
    /// half-bit (sample_rate >= 400 * fps) and amplitude is in (0, 1].
    void validate() const;
};

/// Synthesizes `n_frames` consecutive LTC frames as a mono biphase-mark
/// signal. Every bit-cell boundary flips polarity and a `1` bit flips once
/// more mid-cell. Frame k starts at sample round(k * sample_rate / fps), so
/// the stream accumulates no drift against the sample clock.
PcmBuffer encode_ltc(const LtcEncodeConfig& config, std::int64_t n_frames);

struct DecodedLtcFrame {
    Timecode timecode;
    std::int64_t first_sample_index;  // start of the frame's first bit cell
    LtcFrame raw;                     // full 80 bits, user groups untouched
};

struct LtcDecodeResult {
    std::vector<DecodedLtcFrame> frames;  // strictly increasing tc and pos
    std::int64_t discarded = 0;           // sync hits that failed validation
    FrameRate rate;                       // hinted or inferred
    double bit_rate_estimate = 0;         // bits/s seen in the signal

    const Timecode& start_timecode() const { return frames.front().timecode; }
};

/// Recovers every whole LTC frame in `signal`. Insensitive to polarity,
/// amplitude and start phase; a DC offset is removed by an internal
/// high-pass. Frames failing sync-word, digit-range or monotonicity checks
/// are counted in `discarded`, never emitted. Without a rate hint the frame
/// rate is inferred from the measured bit rate. Throws NoLtcError (with
/// transition count and bit-period diagnostics) when no frame decodes.
LtcDecodeResult decode_ltc(const PcmBuffer& signal,
                           std::optional<FrameRate> rate_hint = {});

/// Dominant signalling rate of a biphase-mark signal in bits/s, from the
/// inter-transition interval distribution. Needs at least 160 transitions.
double bit_period_estimate(const PcmBuffer& signal);

}  // namespace avsync
