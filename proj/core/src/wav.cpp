// SPDX-License-Identifier: Apache-2.0
#include "avsync/wav.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "avsync/errors.hpp"

namespace avsync {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr int kMaxChannels = 64;

struct Reader {
    std::ifstream in;
    std::uint64_t pos = 0;

    explicit Reader(const std::filesystem::path& path)
        : in(path, std::ios::binary) {
        if (!in) throw IoError("cannot open " + path.string());
    }

    void read_exact(void* dst, std::size_t n) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) {
            throw ParseError("unexpected end of file at byte offset " +
                                 std::to_string(pos + static_cast<std::uint64_t>(
                                                          in.gcount())),
                             pos + static_cast<std::uint64_t>(in.gcount()));
        }
        pos += n;
    }

    void skip(std::uint64_t n) {
        in.seekg(static_cast<std::streamoff>(n), std::ios::cur);
        if (!in) {
            throw ParseError("unexpected end of file while skipping chunk at "
                             "byte offset " +
                                 std::to_string(pos),
                             pos);
        }
        pos += n;
    }

    std::uint16_t u16() {
        std::array<unsigned char, 2> b{};
        read_exact(b.data(), 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32() {
        std::array<unsigned char, 4> b{};
        read_exact(b.data(), 4);
        return static_cast<std::uint32_t>(b[0]) |
               (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }
    void fourcc(char* out) { read_exact(out, 4); }
};

struct Format {
    int channels = 0;
    int sample_rate = 0;
    int bit_depth = 0;
};

struct DataChunk {
    std::uint64_t offset = 0;  // first sample byte
    std::uint64_t size = 0;    // bytes per header
    std::int64_t frames = 0;
};

// Walks the chunk list up to (and including) the data chunk header; leaves
// the stream positioned at the first sample byte.
void parse_header(Reader& r, Format& fmt, DataChunk& data) {
    char id[5] = {};
    r.fourcc(id);
    if (std::memcmp(id, "RIFF", 4) != 0) {
        throw ParseError("not a RIFF file (bad magic at byte offset 0)", 0);
    }
    r.u32();  // riff size; the data chunk is validated against the real file
    const std::uint64_t wave_off = r.pos;
    r.fourcc(id);
    if (std::memcmp(id, "WAVE", 4) != 0) {
        throw ParseError("RIFF form is not WAVE (byte offset " +
                             std::to_string(wave_off) + ")",
                         wave_off);
    }

    bool have_fmt = false;
    for (;;) {
        const std::uint64_t chunk_off = r.pos;
        r.in.peek();
        if (r.in.eof()) {
            throw ParseError(have_fmt
                                 ? "no data chunk before end of file"
                                 : "no fmt chunk before end of file",
                             chunk_off);
        }
        r.fourcc(id);
        const std::uint32_t size = r.u32();
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) {
                throw ParseError("fmt chunk too small at byte offset " +
                                     std::to_string(chunk_off),
                                 chunk_off);
            }
            const std::uint16_t tag = r.u16();
            fmt.channels = r.u16();
            fmt.sample_rate = static_cast<int>(r.u32());
            r.u32();  // byte rate
            r.u16();  // block align
            fmt.bit_depth = r.u16();
            std::uint32_t consumed = 16;
            std::uint16_t effective_tag = tag;
            if (tag == kFormatExtensible) {
                if (size < 40) {
                    throw ParseError(
                        "extensible fmt chunk too small at byte offset " +
                            std::to_string(chunk_off),
                        chunk_off);
                }
                r.u16();  // cbSize
                r.u16();  // valid bits
                r.u32();  // channel mask
                effective_tag = r.u16();  // first two GUID bytes
                std::array<unsigned char, 14> guid_rest{};
                r.read_exact(guid_rest.data(), guid_rest.size());
                consumed = 40;
            } else if (tag != kFormatPcm) {
                throw ParseError("unsupported codec tag " + std::to_string(tag) +
                                     " at byte offset " +
                                     std::to_string(chunk_off + 8) +
                                     " (integer PCM only)",
                                 chunk_off + 8);
            }
            if (effective_tag != kFormatPcm) {
                throw ParseError("unsupported extensible sub-format " +
                                     std::to_string(effective_tag) +
                                     " at byte offset " +
                                     std::to_string(chunk_off + 8),
                                 chunk_off + 8);
            }
            if (fmt.bit_depth != 16 && fmt.bit_depth != 24) {
                throw ParseError("unsupported bit depth " +
                                     std::to_string(fmt.bit_depth) +
                                     " (16 or 24) at byte offset " +
                                     std::to_string(chunk_off + 22),
                                 chunk_off + 22);
            }
            if (fmt.channels < 1 || fmt.channels > kMaxChannels) {
                throw ParseError("channel count " +
                                     std::to_string(fmt.channels) +
                                     " outside 1..64 at byte offset " +
                                     std::to_string(chunk_off + 10),
                                 chunk_off + 10);
            }
            if (fmt.sample_rate <= 0) {
                throw ParseError("sample rate must be positive (byte offset " +
                                     std::to_string(chunk_off + 12) + ")",
                                 chunk_off + 12);
            }
            if (size > consumed) r.skip(size - consumed);
            if (size % 2) r.skip(1);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) {
                throw ParseError("data chunk before fmt chunk at byte offset " +
                                     std::to_string(chunk_off),
                                 chunk_off);
            }
            data.offset = r.pos;
            data.size = size;
            const int bytes_per_frame = fmt.channels * (fmt.bit_depth / 8);
            if (size % static_cast<std::uint32_t>(bytes_per_frame) != 0) {
                throw ParseError(
                    "data chunk size " + std::to_string(size) +
                        " is not a whole number of frames (byte offset " +
                        std::to_string(chunk_off + 4) + ")",
                    chunk_off + 4);
            }
            data.frames = static_cast<std::int64_t>(size) / bytes_per_frame;
            return;
        } else {
            // unknown chunk: skip payload + pad byte
            r.skip(size + (size % 2));
        }
    }
}

inline std::int32_t sample_from_bytes(const unsigned char* p, int bit_depth) {
    if (bit_depth == 16) {
        return static_cast<std::int16_t>(p[0] | (p[1] << 8));
    }
    // 24-bit: sign-extend via a shifted 32-bit assembly
    const std::int32_t v = static_cast<std::int32_t>(
        (static_cast<std::uint32_t>(p[0]) << 8) |
        (static_cast<std::uint32_t>(p[1]) << 16) |
        (static_cast<std::uint32_t>(p[2]) << 24));
    return v >> 8;
}

inline void sample_to_bytes(std::int32_t v, int bit_depth, unsigned char* p) {
    p[0] = static_cast<unsigned char>(v & 0xFF);
    p[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
    if (bit_depth == 24) p[2] = static_cast<unsigned char>((v >> 16) & 0xFF);
}

void check_data_not_truncated(const std::filesystem::path& path,
                              const DataChunk& data) {
    const std::uint64_t file_size = std::filesystem::file_size(path);
    if (file_size < data.offset + data.size) {
        throw ParseError("data chunk truncated: header claims " +
                             std::to_string(data.size) + " bytes but file ends "
                             "at byte offset " + std::to_string(file_size),
                         file_size);
    }
}

}  // namespace

WavInfo probe_wav(const std::filesystem::path& path) {
    Reader r(path);
    Format fmt;
    DataChunk data;
    parse_header(r, fmt, data);
    check_data_not_truncated(path, data);
    return WavInfo{fmt.channels, fmt.sample_rate, fmt.bit_depth, data.frames};
}

PcmBuffer read_wav(const std::filesystem::path& path) {
    Reader r(path);
    Format fmt;
    DataChunk data;
    parse_header(r, fmt, data);
    check_data_not_truncated(path, data);

    PcmBuffer buf;
    buf.sample_rate = fmt.sample_rate;
    buf.bit_depth = fmt.bit_depth;
    buf.channels.assign(static_cast<std::size_t>(fmt.channels), {});
    for (auto& ch : buf.channels) {
        ch.resize(static_cast<std::size_t>(data.frames));
    }

    const int bytes_per_sample = fmt.bit_depth / 8;
    const std::size_t frame_bytes =
        static_cast<std::size_t>(fmt.channels) * bytes_per_sample;
    std::vector<unsigned char> raw(static_cast<std::size_t>(data.size));
    if (!raw.empty()) r.read_exact(raw.data(), raw.size());

    const unsigned char* p = raw.data();
    for (std::int64_t i = 0; i < data.frames; ++i) {
        for (int c = 0; c < fmt.channels; ++c) {
            buf.channels[static_cast<std::size_t>(c)]
                        [static_cast<std::size_t>(i)] = dequantize_sample(
                sample_from_bytes(p + c * bytes_per_sample, fmt.bit_depth),
                fmt.bit_depth);
        }
        p += frame_bytes;
    }
    return buf;
}

PcmBuffer read_wav_channel(const std::filesystem::path& path, int channel) {
    Reader r(path);
    Format fmt;
    DataChunk data;
    parse_header(r, fmt, data);
    check_data_not_truncated(path, data);
    if (channel < 0 || channel >= fmt.channels) {
        throw RangeError("channel index " + std::to_string(channel) +
                         " out of range for " + std::to_string(fmt.channels) +
                         " channels");
    }

    PcmBuffer buf;
    buf.sample_rate = fmt.sample_rate;
    buf.bit_depth = fmt.bit_depth;
    buf.channels.emplace_back();
    buf.channels[0].reserve(static_cast<std::size_t>(data.frames));

    const int bytes_per_sample = fmt.bit_depth / 8;
    const std::size_t frame_bytes =
        static_cast<std::size_t>(fmt.channels) * bytes_per_sample;
    constexpr std::size_t kBlockFrames = 65536;
    std::vector<unsigned char> block(kBlockFrames * frame_bytes);

    std::int64_t remaining = data.frames;
    while (remaining > 0) {
        const std::size_t n = static_cast<std::size_t>(
            std::min<std::int64_t>(remaining, kBlockFrames));
        r.read_exact(block.data(), n * frame_bytes);
        const unsigned char* p =
            block.data() + static_cast<std::size_t>(channel) * bytes_per_sample;
        for (std::size_t i = 0; i < n; ++i) {
            buf.channels[0].push_back(dequantize_sample(
                sample_from_bytes(p, fmt.bit_depth), fmt.bit_depth));
            p += frame_bytes;
        }
        remaining -= static_cast<std::int64_t>(n);
    }
    return buf;
}

void write_wav(const std::filesystem::path& path, const PcmBuffer& buffer,
               int bit_depth) {
    buffer.validate();
    if (bit_depth != 16 && bit_depth != 24) {
        throw ConfigError("write bit depth must be 16 or 24");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    const int channels = buffer.channel_count();
    const std::int64_t frames = buffer.frame_count();
    const int bytes_per_sample = bit_depth / 8;
    const std::uint64_t data_size = static_cast<std::uint64_t>(frames) *
                                    channels * bytes_per_sample;
    const std::uint32_t pad = data_size % 2;

    auto put_u16 = [&](std::uint16_t v) {
        const unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                                    static_cast<unsigned char>(v >> 8)};
        out.write(reinterpret_cast<const char*>(b), 2);
    };
    auto put_u32 = [&](std::uint32_t v) {
        const unsigned char b[4] = {
            static_cast<unsigned char>(v & 0xFF),
            static_cast<unsigned char>((v >> 8) & 0xFF),
            static_cast<unsigned char>((v >> 16) & 0xFF),
            static_cast<unsigned char>((v >> 24) & 0xFF)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };

    out.write("RIFF", 4);
    put_u32(static_cast<std::uint32_t>(36 + data_size + pad));
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(kFormatPcm);
    put_u16(static_cast<std::uint16_t>(channels));
    put_u32(static_cast<std::uint32_t>(buffer.sample_rate));
    put_u32(static_cast<std::uint32_t>(buffer.sample_rate) * channels *
            bytes_per_sample);
    put_u16(static_cast<std::uint16_t>(channels * bytes_per_sample));
    put_u16(static_cast<std::uint16_t>(bit_depth));
    out.write("data", 4);
    put_u32(static_cast<std::uint32_t>(data_size));

    const std::size_t frame_bytes =
        static_cast<std::size_t>(channels) * bytes_per_sample;
    std::vector<unsigned char> block;
    constexpr std::int64_t kBlockFrames = 65536;
    block.resize(static_cast<std::size_t>(kBlockFrames) * frame_bytes);
    for (std::int64_t start = 0; start < frames; start += kBlockFrames) {
        const std::int64_t n = std::min(kBlockFrames, frames - start);
        unsigned char* p = block.data();
        for (std::int64_t i = 0; i < n; ++i) {
            for (int c = 0; c < channels; ++c) {
                sample_to_bytes(
                    quantize_sample(
                        buffer.channels[static_cast<std::size_t>(c)]
                                       [static_cast<std::size_t>(start + i)],
                        bit_depth),
                    bit_depth, p);
                p += bytes_per_sample;
            }
        }
        out.write(reinterpret_cast<const char*>(block.data()),
                  static_cast<std::streamsize>(
                      static_cast<std::size_t>(n) * frame_bytes));
    }
    if (pad) out.put('\0');
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace avsync
