// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "avsync/random.hpp"

namespace avsync {

/// A simulated free-running oscillator: initial offset, frequency error in
/// ppm, and gaussian timestamping jitter from a seeded stream.
///
///   read(t) = t * (1 + drift_ppm * 1e-6) + offset + N(0, jitter_std^2)
///
/// until a servo disciplines it via step_phase / set_rate_correction, after
/// which the clock stays piecewise linear in true time.
class SimClock {
public:
    SimClock(std::string id, double offset_s, double drift_ppm,
             double jitter_std_s, std::uint64_t seed);

    const std::string& id() const noexcept { return id_; }
    double drift_ppm() const noexcept { return drift_ppm_; }
    double jitter_std() const noexcept { return jitter_std_; }

    /// Timestamp at true time t; draws one jitter sample.
    double read(double t_true);

    /// Clock value without the jitter draw (simulator-visible truth).
    double read_noiseless(double t_true) const;

    /// Immediate phase adjustment in seconds.
    void step_phase(double delta_s);

    /// Replaces the fractional frequency correction from true time t on.
    void set_rate_correction(double fractional, double t_true);
    double rate_correction() const noexcept { return rate_correction_; }

private:
    std::string id_;
    double drift_ppm_;
    double jitter_std_;
    Rng rng_;
    // piecewise-linear disciplined state
    double base_t_ = 0.0;
    double value_at_base_;
    double rate_correction_ = 0.0;
};

/// Timestamps of one two-way master/slave exchange. The estimator may only
/// look at t1..t4; the true one-way delays exist for the simulator's books.
struct PtpExchange {
    double t1 = 0;  // master send, master clock
    double t2 = 0;  // slave receive, slave clock
    double t3 = 0;  // slave send, slave clock
    double t4 = 0;  // master receive, master clock
    double path_delay_forward = 0;  // true seconds, hidden from estimator
    double path_delay_reverse = 0;
};

struct OffsetEstimate {
    double offset = 0;  // slave minus master, seconds
    double delay = 0;   // mean path delay, seconds
};

/// Standard two-way estimate: offset = ((t2-t1) - (t4-t3)) / 2,
/// delay = ((t2-t1) + (t4-t3)) / 2. Exact under symmetric delays; biased by
/// (d_fwd - d_rev)/2 otherwise.
OffsetEstimate estimate_offset(const PtpExchange& x);

/// Per-round servo gains. The first exchange steps the slave's phase by the
/// full measured offset; later rounds drive only the rate correction:
///   integral += ki * offset;  rate -= (kp * offset + integral) / interval
struct ServoConfig {
    double kp = 0.7;
    double ki = 0.3;
};

struct PtpSessionConfig {
    int n_rounds = 1;
    double round_interval = 1.0;  // seconds between exchanges
    ServoConfig servo;
    double path_delay_forward = 500e-9;
    double path_delay_reverse = 500e-9;
    double turnaround = 0.0;  // slave processing time between t2 and t3

    void validate() const;  // ConfigError on non-finite/non-positive values
};

/// residuals[slave][round]: true slave-minus-master offset right after that
/// round's correction, noise-free.
struct PtpTrace {
    std::vector<std::string> slave_ids;
    std::vector<std::vector<double>> residuals;
};

/// Runs n_rounds of one exchange per slave, disciplining the slave clocks
/// in place. Deterministic for fixed seeds and config.
PtpTrace run_ptp_session(SimClock& master, std::vector<SimClock>& slaves,
                         const PtpSessionConfig& config);

/// Max pairwise |read_i(t) - read_j(t)| over the clock set. Each clock
/// contributes one jittered timestamp. RangeError for fewer than 2 clocks.
double timestamp_spread(std::vector<SimClock>& clocks, double t_true);

// ---------------------------------------------------------------------------
// Word-clock models for the multi-channel audio chain.

enum class WordClockMode { internal, external };

struct WordClockConfig {
    WordClockMode mode = WordClockMode::internal;
    int nominal_rate = 48000;       // samples/s
    std::vector<double> drift_ppm;  // one entry per device
    /// External mode slaves every device to one shared source with this
    /// frequency error; per-device entries are ignored by construction.
    double external_reference_ppm = 0.0;
};

struct SamplingReport {
    std::vector<std::vector<double>> first_instants;  // per device
    std::vector<double> final_instant;                // per device, sample n
    std::int64_t n_samples = 0;                       // the common index n
    double max_pairwise_drift = 0;                    // seconds at sample n
};

/// Device i samples at instants n / (rate * (1 + ppm_i * 1e-6)) in internal
/// mode; in external mode every device shares the reference's instants, so
/// pairwise drift is identically zero.
SamplingReport simulate_sampling(const WordClockConfig& config,
                                 double duration_s, int first_k = 8);

// ---------------------------------------------------------------------------
// Scenario file + trace output used by the ptp-sim command.

struct PtpScenario {
    std::uint64_t seed = 1;
    PtpSessionConfig session;
    // clock parameters; clocks are built fresh per run so a scenario can be
    // replayed deterministically
    struct ClockSpec {
        std::string id;
        double offset_s = 0;
        double drift_ppm = 0;
        double jitter_std_s = 0;
    };
    ClockSpec master;
    std::vector<ClockSpec> slaves;

    std::vector<SimClock> build_clocks() const;  // master first
};

PtpScenario load_ptp_scenario(const std::filesystem::path& path);

/// CSV columns: round,slave_id,residual_seconds (header included).
void write_trace_csv(std::ostream& out, const PtpTrace& trace);

}  // namespace avsync
