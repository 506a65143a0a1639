#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pdmp/engine.hpp"

namespace pdmp {

// Shortest decimal form that round-trips to the same double, with '.' as
// the separator regardless of locale.
std::string format_double(double x);

// Minimal CSV emitter. Every file starts with a provenance comment line
// carrying the seed and generator name, then the column header.
class CsvWriter {
  public:
    CsvWriter(std::uint64_t seed, std::vector<std::string> columns);

    void add_row(const std::vector<std::string>& cells);
    std::string str() const;
    void write_file(const std::filesystem::path& path) const;

  private:
    std::string buf_;
    std::size_t columns_;
};

std::string cell(double x);
std::string cell(std::uint64_t x);
std::string cell(const std::string& s);

// Event log serialization. JSONL files carry one header object line with
// seed and generator name, then one object per spike with keys t, i, low
// and, when states were recorded, u_pre and u_post. The CSV form has the
// same fields with states joined by ';'.
std::string events_to_jsonl(const Trajectory& traj, std::uint64_t seed);
std::string events_to_csv(const Trajectory& traj, std::uint64_t seed);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace pdmp
