#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tipiscale/metrics.hpp"

namespace tipiscale {

// Frequencies in MHz, the unit the platform boundary speaks.
struct mhz_pair {
    int cf_mhz = 0;
    int uf_mhz = 0;
    bool operator==(const mhz_pair&) const = default;
};

// One row of a trace file. elapsed_us is cumulative across the file; the
// counter fields are per-interval deltas. cf/uf record the pair applied in
// response to this interval and are optional on input.
struct trace_record {
    std::uint64_t elapsed_us = 0;
    std::uint64_t tor_local = 0;
    std::uint64_t tor_remote = 0;
    std::uint64_t instructions = 0;
    std::uint64_t energy_uj = 0;
    std::optional<int> cf_mhz;
    std::optional<int> uf_mhz;
};

class trace_parse_error : public std::runtime_error {
public:
    trace_parse_error(std::size_t row, const std::string& what);
    std::size_t row() const { return row_; }

private:
    std::size_t row_ = 0;  // 1-based data row
};

// Boundary between the policy and any source of counters and actuation.
// read_counters returns the deltas since the previous read, or nothing once
// the source is exhausted; apply must be idempotent for identical pairs.
// A real MSR/RAPL backend would sit behind this same interface; none is
// provided here.
class platform_port {
public:
    virtual ~platform_port() = default;
    virtual std::optional<counter_sample> read_counters() = 0;
    virtual void apply(mhz_pair p) = 0;
};

// Serves successive trace records as counter samples and keeps the applied
// pairs for later diffing against the recorded ones.
class replay_port final : public platform_port {
public:
    explicit replay_port(std::vector<trace_record> records);
    static replay_port open(const std::filesystem::path& path);

    std::optional<counter_sample> read_counters() override;
    void apply(mhz_pair p) override;

    const std::vector<trace_record>& records() const { return records_; }
    const std::vector<mhz_pair>& applied() const { return applied_; }

private:
    std::vector<trace_record> records_;
    std::vector<mhz_pair> applied_;
    std::size_t pos_ = 0;
    std::uint64_t prev_elapsed_ = 0;
};

// Pass-through port that writes every (sample, applied pair) to a sink in
// trace format. Wrapping a recorder around another recorder is transparent.
class record_port final : public platform_port {
public:
    record_port(platform_port& inner, std::ostream& sink);

    std::optional<counter_sample> read_counters() override;
    void apply(mhz_pair p) override;

private:
    platform_port& inner_;
    std::ostream& sink_;
    std::optional<counter_sample> pending_;
    std::uint64_t cum_elapsed_us_ = 0;
};

// Throws trace_parse_error naming the offending 1-based data row.
std::vector<trace_record> parse_trace_csv(std::istream& in);
std::vector<trace_record> load_trace_csv(const std::filesystem::path& path);
void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, const trace_record& rec);

}  // namespace tipiscale
