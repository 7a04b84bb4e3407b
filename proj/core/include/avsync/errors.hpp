// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avsync {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A value fell outside its legal domain (timecode range, channel index,
/// trim window, ...).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Malformed input text or bytes. offset() is the position of the first
/// offending byte (or character) in the input.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_ = 0;
};

/// Invalid configuration (non-finite servo gains, unsupported sample-rate /
/// frame-rate combination, inconsistent manifest).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// decode_ltc() found no decodable frame anywhere in the signal. Carries the
/// demodulator diagnostics so callers can tell "silent channel" from
/// "wrong channel" or "wrong speed".
class NoLtcError : public Error {
public:
    NoLtcError(const std::string& what, std::size_t transition_count,
               double bit_period_samples)
        : Error(what),
          transition_count_(transition_count),
          bit_period_samples_(bit_period_samples) {}
    std::size_t transition_count() const noexcept { return transition_count_; }
    /// Estimated bit period in samples; NaN when too few transitions to tell.
    double bit_period_samples() const noexcept { return bit_period_samples_; }

private:
    std::size_t transition_count_ = 0;
    double bit_period_samples_ = 0;
};

/// The onset detector found no event above the adaptive threshold.
class NoOnsetError : public Error {
public:
    NoOnsetError(const std::string& what, double noise_floor)
        : Error(what), noise_floor_(noise_floor) {}
    /// Median block energy of the searched region.
    double noise_floor() const noexcept { return noise_floor_; }

private:
    double noise_floor_ = 0;
};

/// An LTC dropout overlaps a trim boundary, so the boundary timecode cannot
/// be trusted.
class DropoutError : public Error {
public:
    using Error::Error;
};

/// The audio interval does not encompass the video interval.
class PaddingError : public Error {
public:
    PaddingError(const std::string& what, double deficit_ms)
        : Error(what), deficit_ms_(deficit_ms) {}
    double deficit_ms() const noexcept { return deficit_ms_; }

private:
    double deficit_ms_ = 0;
};

}  // namespace avsync
