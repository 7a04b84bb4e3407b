// SPDX-License-Identifier: Apache-2.0

#include "avsync/errors.hpp"
#include "avsync/ltc.hpp"

namespace avsync {

namespace {

// BCD digit field positions: {first bit, width}.
struct Field {
    int bit;
    int width;
};
constexpr Field kFrameUnits{0, 4};
constexpr Field kFrameTens{8, 2};
constexpr Field kSecsUnits{16, 4};
constexpr Field kSecsTens{24, 3};
constexpr Field kMinsUnits{32, 4};
constexpr Field kMinsTens{40, 3};
constexpr Field kHoursUnits{48, 4};
constexpr Field kHoursTens{56, 2};

// The standard 2-bit frame-tens field tops out at 39 frames. At 50/60 fps
// the tens digit reaches 5, so the field borrows the drop-frame bit (10) as
// its third bit; integer-rate timecode never uses drop-frame.
inline int frame_tens_width(FrameRate rate) {
    return rate.fps() >= 50 ? 3 : kFrameTens.width;
}

}  // namespace

LtcFrame::LtcFrame() {
    // 0011111111111101, bit 64 first
    static constexpr char kPattern[] = "0011111111111101";
    for (int i = 0; i < 16; ++i) {
        set_bit(sync_offset + i, kPattern[i] == '1');
    }
}

static void write_field(LtcFrame& f, int first_bit, int width, int value) {
    // LSB of the digit goes out first
    for (int i = 0; i < width; ++i) {
        f.set_bit(first_bit + i, (value >> i) & 1);
    }
}

static int read_field(const LtcFrame& f, int first_bit, int width) {
    int v = 0;
    for (int i = 0; i < width; ++i) {
        v |= (f.bit(first_bit + i) ? 1 : 0) << i;
    }
    return v;
}

LtcFrame LtcFrame::for_timecode(const Timecode& tc) {
    LtcFrame f;
    write_field(f, kFrameUnits.bit, kFrameUnits.width, tc.frames() % 10);
    write_field(f, kFrameTens.bit, frame_tens_width(tc.rate()),
                tc.frames() / 10);
    write_field(f, kSecsUnits.bit, kSecsUnits.width, tc.seconds() % 10);
    write_field(f, kSecsTens.bit, kSecsTens.width, tc.seconds() / 10);
    write_field(f, kMinsUnits.bit, kMinsUnits.width, tc.minutes() % 10);
    write_field(f, kMinsTens.bit, kMinsTens.width, tc.minutes() / 10);
    write_field(f, kHoursUnits.bit, kHoursUnits.width, tc.hours() % 10);
    write_field(f, kHoursTens.bit, kHoursTens.width, tc.hours() / 10);
    f.apply_parity(tc.rate());
    return f;
}

Timecode LtcFrame::timecode(FrameRate rate) const {
    const int fu = read_field(*this, kFrameUnits.bit, kFrameUnits.width);
    const int ft = read_field(*this, kFrameTens.bit, frame_tens_width(rate));
    const int su = read_field(*this, kSecsUnits.bit, kSecsUnits.width);
    const int st = read_field(*this, kSecsTens.bit, kSecsTens.width);
    const int mu = read_field(*this, kMinsUnits.bit, kMinsUnits.width);
    const int mt = read_field(*this, kMinsTens.bit, kMinsTens.width);
    const int hu = read_field(*this, kHoursUnits.bit, kHoursUnits.width);
    const int ht = read_field(*this, kHoursTens.bit, kHoursTens.width);
    if (fu > 9 || su > 9 || mu > 9 || hu > 9) {
        throw RangeError("BCD units digit above 9 in LTC frame");
    }
    return Timecode(ht * 10 + hu, mt * 10 + mu, st * 10 + su, ft * 10 + fu,
                    rate);
}

std::uint8_t LtcFrame::user_group(int group) const {
    if (group < 1 || group > 8) throw RangeError("user group must be 1..8");
    const int first = (group - 1) * 8 + 4;
    return static_cast<std::uint8_t>(read_field(*this, first, 4));
}

void LtcFrame::set_user_group(int group, std::uint8_t nibble) {
    if (group < 1 || group > 8) throw RangeError("user group must be 1..8");
    const int first = (group - 1) * 8 + 4;
    write_field(*this, first, 4, nibble & 0x0F);
}

bool LtcFrame::sync_word_valid() const {
    static const LtcFrame reference;
    for (int i = sync_offset; i < bit_count; ++i) {
        if (bit(i) != reference.bit(i)) return false;
    }
    return true;
}

int LtcFrame::parity_bit_index(FrameRate rate) {
    return rate.fps() == 25 ? 59 : 27;
}

bool LtcFrame::parity_valid(FrameRate rate) const {
    (void)rate;
    int zeros = 0;
    for (int i = 0; i < bit_count; ++i) {
        if (!bit(i)) ++zeros;
    }
    return zeros % 2 == 0;
}

void LtcFrame::apply_parity(FrameRate rate) {
    const int idx = parity_bit_index(rate);
    set_bit(idx, true);
    int zeros = 0;
    for (int i = 0; i < bit_count; ++i) {
        if (!bit(i)) ++zeros;
    }
    // flipping the parity bit to 0 adds exactly one zero
    if (zeros % 2 != 0) set_bit(idx, false);
}

void LtcEncodeConfig::validate() const {
    if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
    // 160 half-bits per frame; require >= 2.5 samples per half-bit
    if (sample_rate < 400 * rate.fps()) {
        throw ConfigError(
            "sample rate " + std::to_string(sample_rate) + " too low for " +
            std::to_string(rate.fps()) +
            " fps LTC (need >= 2.5 samples per half-bit, i.e. >= " +
            std::to_string(400 * rate.fps()) + " Hz)");
    }
    if (!(amplitude > 0.0) || amplitude > 1.0) {
        throw ConfigError("amplitude must be in (0, 1]");
    }
    if (start.rate() != rate) {
        throw ConfigError("start timecode rate differs from encode rate");
    }
}

PcmBuffer encode_ltc(const LtcEncodeConfig& config, std::int64_t n_frames) {
    config.validate();
    if (n_frames <= 0) throw RangeError("need at least one frame to encode");
    config.start.add_frames(n_frames - 1);  // throws past the day boundary

    const int fps = config.rate.fps();
    const std::int64_t sr = config.sample_rate;
    const std::int64_t half_den = 160LL * fps;  // half-bit boundaries per s
    // boundary h (in half-bits) sits at round(h * sr / half_den); frame k
    // therefore starts exactly at round(k * sr / fps).
    auto boundary = [&](std::int64_t h) {
        return round_div_away(h * sr, half_den);
    };

    const std::int64_t total_half_bits = n_frames * 160;
    const std::int64_t total_samples = boundary(total_half_bits);

    PcmBuffer out;
    out.sample_rate = config.sample_rate;
    out.bit_depth = 24;
    out.channels.emplace_back();
    auto& samples = out.channels[0];
    samples.resize(static_cast<std::size_t>(total_samples));

    double level = config.amplitude;
    std::int64_t tc_index = config.start.total_frames();
    LtcFrame frame = LtcFrame::for_timecode(config.start);
    for (std::int64_t h = 0; h < total_half_bits; ++h) {
        const std::int64_t bit_global = h / 2;
        const int bit_in_frame = static_cast<int>(bit_global % 80);
        if (h % 2 == 0) {
            if (bit_in_frame == 0 && h != 0) {
                frame = LtcFrame::for_timecode(
                    Timecode::from_total_frames(++tc_index, config.rate));
            }
            level = -level;  // every cell starts with a transition
        } else if (frame.bit(bit_in_frame)) {
            level = -level;  // a one adds the mid-cell transition
        }
        const std::int64_t begin = boundary(h);
        const std::int64_t end = boundary(h + 1);
        for (std::int64_t i = begin; i < end; ++i) {
            samples[static_cast<std::size_t>(i)] = level;
        }
    }
    return out;
}

}  // namespace avsync
