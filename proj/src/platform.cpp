#include "tipiscale/platform.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace tipiscale {

namespace {

constexpr const char* k_header_full = "elapsed_us,tor_local,tor_remote,instructions,energy_uj,cf_mhz,uf_mhz";
constexpr const char* k_header_bare = "elapsed_us,tor_local,tor_remote,instructions,energy_uj";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::uint64_t parse_u64(const std::string& field, std::size_t row, const char* name) {
    std::uint64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw trace_parse_error(row, std::string("bad ") + name + " value '" + field + "'");
    return value;
}

}  // namespace

trace_parse_error::trace_parse_error(std::size_t row, const std::string& what)
    : std::runtime_error("trace parse error at row " + std::to_string(row) + ": " + what),
      row_(row) {}

std::vector<trace_record> parse_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {};
    // Tolerate a missing trailing pair of columns but nothing else.
    {
        auto header = line;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header != k_header_full && header != k_header_bare)
            throw trace_parse_error(0, "unrecognized header '" + header + "'");
    }

    std::vector<trace_record> records;
    std::size_t row = 0;
    std::uint64_t prev_elapsed = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv(line);
        if (fields.size() != 5 && fields.size() != 7)
            throw trace_parse_error(row, "expected 5 or 7 columns, found " +
                                             std::to_string(fields.size()));
        trace_record rec;
        rec.elapsed_us = parse_u64(fields[0], row, "elapsed_us");
        rec.tor_local = parse_u64(fields[1], row, "tor_local");
        rec.tor_remote = parse_u64(fields[2], row, "tor_remote");
        rec.instructions = parse_u64(fields[3], row, "instructions");
        rec.energy_uj = parse_u64(fields[4], row, "energy_uj");
        if (fields.size() == 7) {
            rec.cf_mhz = static_cast<int>(parse_u64(fields[5], row, "cf_mhz"));
            rec.uf_mhz = static_cast<int>(parse_u64(fields[6], row, "uf_mhz"));
        }
        if (rec.elapsed_us < prev_elapsed)
            throw trace_parse_error(row, "cumulative time went backwards");
        prev_elapsed = rec.elapsed_us;
        records.push_back(rec);
    }
    return records;
}

std::vector<trace_record> load_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file " + path.string());
    return parse_trace_csv(in);
}

void write_trace_header(std::ostream& out) { out << k_header_full << '\n'; }

void write_trace_row(std::ostream& out, const trace_record& rec) {
    out << rec.elapsed_us << ',' << rec.tor_local << ',' << rec.tor_remote << ','
        << rec.instructions << ',' << rec.energy_uj;
    if (rec.cf_mhz && rec.uf_mhz)
        out << ',' << *rec.cf_mhz << ',' << *rec.uf_mhz;
    out << '\n';
}

replay_port::replay_port(std::vector<trace_record> records) : records_(std::move(records)) {}

replay_port replay_port::open(const std::filesystem::path& path) {
    return replay_port(load_trace_csv(path));
}

std::optional<counter_sample> replay_port::read_counters() {
    if (pos_ >= records_.size()) return std::nullopt;
    const trace_record& rec = records_[pos_++];
    counter_sample s;
    s.elapsed_us = rec.elapsed_us - prev_elapsed_;
    s.tor_local = rec.tor_local;
    s.tor_remote = rec.tor_remote;
    s.instructions = rec.instructions;
    s.energy_uj = rec.energy_uj;
    prev_elapsed_ = rec.elapsed_us;
    return s;
}

void replay_port::apply(mhz_pair p) { applied_.push_back(p); }

record_port::record_port(platform_port& inner, std::ostream& sink)
    : inner_(inner), sink_(sink) {
    write_trace_header(sink_);
}

std::optional<counter_sample> record_port::read_counters() {
    if (pending_) throw std::logic_error("record_port: read without an intervening apply");
    auto s = inner_.read_counters();
    if (s) {
        pending_ = s;
        cum_elapsed_us_ += s->elapsed_us;
    }
    return s;
}

void record_port::apply(mhz_pair p) {
    inner_.apply(p);
    if (!pending_) return;  // re-apply without a new sample: nothing to pair
    trace_record rec;
    rec.elapsed_us = cum_elapsed_us_;
    rec.tor_local = pending_->tor_local;
    rec.tor_remote = pending_->tor_remote;
    rec.instructions = pending_->instructions;
    rec.energy_uj = pending_->energy_uj;
    rec.cf_mhz = p.cf_mhz;
    rec.uf_mhz = p.uf_mhz;
    write_trace_row(sink_, rec);
    pending_.reset();
}

}  // namespace tipiscale
