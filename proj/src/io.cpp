#include "pdmp/io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "pdmp/rng.hpp"

namespace pdmp {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::uint64_t seed, std::vector<std::string> columns)
    : columns_(columns.size()) {
    buf_ = "# seed=" + std::to_string(seed) + " rng=" +
           RngStream::algorithm() + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += columns[i];
    }
    buf_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) {
        throw std::invalid_argument("csv row width does not match header");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += cells[i];
    }
    buf_ += '\n';
}

std::string CsvWriter::str() const { return buf_; }

void CsvWriter::write_file(const std::filesystem::path& path) const {
    write_text_file(path, buf_);
}

std::string cell(double x) { return format_double(x); }
std::string cell(std::uint64_t x) { return std::to_string(x); }
std::string cell(const std::string& s) { return s; }

namespace {

std::string join_states(const std::vector<double>& u) {
    std::string out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i) out += ';';
        out += format_double(u[i]);
    }
    return out;
}

std::string state_array_json(const std::vector<double>& u) {
    std::string out = "[";
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i) out += ',';
        out += format_double(u[i]);
    }
    out += ']';
    return out;
}

}  // namespace

std::string events_to_jsonl(const Trajectory& traj, std::uint64_t seed) {
    std::string out = "{\"seed\":" + std::to_string(seed) + ",\"rng\":\"" +
                      RngStream::algorithm() + "\"}\n";
    for (const SpikeEvent& ev : traj.events) {
        out += "{\"t\":" + format_double(ev.t) +
               ",\"i\":" + std::to_string(ev.neuron) +
               ",\"low\":" + (ev.low ? "true" : "false");
        if (!ev.u_pre.empty()) {
            out += ",\"u_pre\":" + state_array_json(ev.u_pre);
            out += ",\"u_post\":" + state_array_json(ev.u_post);
        }
        out += "}\n";
    }
    return out;
}

std::string events_to_csv(const Trajectory& traj, std::uint64_t seed) {
    const bool with_states =
        !traj.events.empty() && !traj.events.front().u_pre.empty();
    std::vector<std::string> cols = {"t", "i", "low"};
    if (with_states) {
        cols.push_back("u_pre");
        cols.push_back("u_post");
    }
    CsvWriter w(seed, cols);
    for (const SpikeEvent& ev : traj.events) {
        std::vector<std::string> row = {format_double(ev.t),
                                        std::to_string(ev.neuron),
                                        ev.low ? "true" : "false"};
        if (with_states) {
            row.push_back(join_states(ev.u_pre));
            row.push_back(join_states(ev.u_post));
        }
        w.add_row(row);
    }
    return w.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() +
                                 " for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

}  // namespace pdmp
