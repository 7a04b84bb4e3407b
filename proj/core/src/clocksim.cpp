// SPDX-License-Identifier: Apache-2.0
#include "avsync/clocksim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "avsync/errors.hpp"

namespace avsync {

SimClock::SimClock(std::string id, double offset_s, double drift_ppm,
                   double jitter_std_s, std::uint64_t seed)
    : id_(std::move(id)),
      drift_ppm_(drift_ppm),
      jitter_std_(jitter_std_s),
      rng_(seed),
      value_at_base_(offset_s) {
    if (jitter_std_s < 0) throw ConfigError("jitter stddev must be >= 0");
}

double SimClock::read_noiseless(double t_true) const {
    const double rate = 1.0 + drift_ppm_ * 1e-6 + rate_correction_;
    return value_at_base_ + (t_true - base_t_) * rate;
}

double SimClock::read(double t_true) {
    double noise = 0.0;
    if (jitter_std_ > 0.0) noise = rng_.gaussian(0.0, jitter_std_);
    return read_noiseless(t_true) + noise;
}

void SimClock::step_phase(double delta_s) { value_at_base_ += delta_s; }

void SimClock::set_rate_correction(double fractional, double t_true) {
    value_at_base_ = read_noiseless(t_true);
    base_t_ = t_true;
    rate_correction_ = fractional;
}

OffsetEstimate estimate_offset(const PtpExchange& x) {
    const double forward = x.t2 - x.t1;
    const double reverse = x.t4 - x.t3;
    return OffsetEstimate{(forward - reverse) / 2.0, (forward + reverse) / 2.0};
}

void PtpSessionConfig::validate() const {
    if (n_rounds < 1) throw ConfigError("need at least one PTP round");
    if (!(round_interval > 0) || !std::isfinite(round_interval)) {
        throw ConfigError("round interval must be positive and finite");
    }
    if (!(servo.kp > 0) || !(servo.ki > 0) || !std::isfinite(servo.kp) ||
        !std::isfinite(servo.ki)) {
        throw ConfigError("servo gains must be positive and finite");
    }
    if (!(path_delay_forward > 0) || !(path_delay_reverse > 0)) {
        throw ConfigError("path delays must be positive");
    }
    if (turnaround < 0) throw ConfigError("turnaround must be >= 0");
}

PtpTrace run_ptp_session(SimClock& master, std::vector<SimClock>& slaves,
                         const PtpSessionConfig& config) {
    config.validate();

    PtpTrace trace;
    trace.slave_ids.reserve(slaves.size());
    for (const auto& s : slaves) trace.slave_ids.push_back(s.id());
    trace.residuals.assign(slaves.size(), {});

    // per-slave servo memory
    std::vector<double> integral(slaves.size(), 0.0);
    std::vector<bool> primed(slaves.size(), false);

    for (int round = 1; round <= config.n_rounds; ++round) {
        const double t = round * config.round_interval;
        for (std::size_t i = 0; i < slaves.size(); ++i) {
            SimClock& slave = slaves[i];
            PtpExchange x;
            x.path_delay_forward = config.path_delay_forward;
            x.path_delay_reverse = config.path_delay_reverse;
            const double t_arrive = t + x.path_delay_forward;
            const double t_reply = t_arrive + config.turnaround;
            x.t1 = master.read(t);
            x.t2 = slave.read(t_arrive);
            x.t3 = slave.read(t_reply);
            x.t4 = master.read(t_reply + x.path_delay_reverse);

            const double offset = estimate_offset(x).offset;
            if (!primed[i]) {
                // first measurement: step the phase by the full estimate
                slave.step_phase(-offset);
                primed[i] = true;
            } else {
                // then discipline only the rate: the integral holds the
                // learned frequency error, the proportional term damps the
                // remaining phase error. The correction is absolute.
                integral[i] += config.servo.ki * offset;
                slave.set_rate_correction(
                    -(config.servo.kp * offset + integral[i]) /
                        config.round_interval,
                    t);
            }
            trace.residuals[i].push_back(slave.read_noiseless(t) -
                                         master.read_noiseless(t));
        }
    }
    return trace;
}

double timestamp_spread(std::vector<SimClock>& clocks, double t_true) {
    if (clocks.size() < 2) {
        throw RangeError("timestamp_spread needs at least 2 clocks");
    }
    std::vector<double> reads;
    reads.reserve(clocks.size());
    for (auto& c : clocks) reads.push_back(c.read(t_true));
    const auto [lo, hi] = std::minmax_element(reads.begin(), reads.end());
    return *hi - *lo;
}

SamplingReport simulate_sampling(const WordClockConfig& config,
                                 double duration_s, int first_k) {
    if (!(duration_s > 0)) throw ConfigError("duration must be positive");
    if (config.nominal_rate <= 0) throw ConfigError("rate must be positive");
    if (config.drift_ppm.empty()) throw ConfigError("need at least one device");

    const std::size_t devices = config.drift_ppm.size();
    SamplingReport report;
    report.n_samples = static_cast<std::int64_t>(
        std::floor(duration_s * config.nominal_rate));
    report.first_instants.assign(devices, {});
    report.final_instant.assign(devices, 0.0);

    for (std::size_t d = 0; d < devices; ++d) {
        const double ppm = config.mode == WordClockMode::external
                               ? config.external_reference_ppm
                               : config.drift_ppm[d];
        const double actual_rate = config.nominal_rate * (1.0 + ppm * 1e-6);
        auto instant = [&](std::int64_t n) {
            return static_cast<double>(n) / actual_rate;
        };
        for (int k = 0; k < first_k; ++k) {
            report.first_instants[d].push_back(instant(k));
        }
        report.final_instant[d] = instant(report.n_samples);
    }

    double max_drift = 0.0;
    for (std::size_t a = 0; a < devices; ++a) {
        for (std::size_t b = a + 1; b < devices; ++b) {
            max_drift = std::max(max_drift,
                                 std::abs(report.final_instant[a] -
                                          report.final_instant[b]));
        }
    }
    report.max_pairwise_drift = max_drift;
    return report;
}

std::vector<SimClock> PtpScenario::build_clocks() const {
    std::vector<SimClock> clocks;
    clocks.reserve(1 + slaves.size());
    std::uint64_t salt = 0;
    clocks.emplace_back(master.id, master.offset_s, master.drift_ppm,
                        master.jitter_std_s, seed + salt++);
    for (const auto& s : slaves) {
        clocks.emplace_back(s.id, s.offset_s, s.drift_ppm, s.jitter_std_s,
                            seed + salt++);
    }
    return clocks;
}

namespace {

PtpScenario::ClockSpec clock_from_json(const nlohmann::json& j) {
    PtpScenario::ClockSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.offset_s = j.value("offset_seconds", 0.0);
    spec.drift_ppm = j.value("drift_ppm", 0.0);
    spec.jitter_std_s = j.value("jitter_std_seconds", 0.0);
    return spec;
}

}  // namespace

PtpScenario load_ptp_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("scenario JSON: " + std::string(e.what()),
                         static_cast<std::size_t>(e.byte));
    }
    try {
        PtpScenario sc;
        sc.seed = j.value("seed", std::uint64_t{1});
        sc.session.n_rounds = j.at("rounds").get<int>();
        sc.session.round_interval = j.value("round_interval_seconds", 1.0);
        if (j.contains("servo")) {
            sc.session.servo.kp = j["servo"].value("kp", 0.7);
            sc.session.servo.ki = j["servo"].value("ki", 0.3);
        }
        sc.session.path_delay_forward =
            j.value("path_delay_forward_seconds", 500e-9);
        sc.session.path_delay_reverse =
            j.value("path_delay_reverse_seconds", 500e-9);
        sc.session.turnaround = j.value("turnaround_seconds", 0.0);
        sc.master = clock_from_json(j.at("master"));
        for (const auto& s : j.at("slaves")) {
            sc.slaves.push_back(clock_from_json(s));
        }
        sc.session.validate();
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("scenario JSON: " + std::string(e.what()));
    }
}

void write_trace_csv(std::ostream& out, const PtpTrace& trace) {
    out << "round,slave_id,residual_seconds\n";
    char buf[64];
    if (trace.residuals.empty()) return;
    const std::size_t rounds = trace.residuals[0].size();
    for (std::size_t r = 0; r < rounds; ++r) {
        for (std::size_t s = 0; s < trace.residuals.size(); ++s) {
            std::snprintf(buf, sizeof buf, "%.12e", trace.residuals[s][r]);
            out << (r + 1) << ',' << trace.slave_ids[s] << ',' << buf << '\n';
        }
    }
}

}  // namespace avsync
