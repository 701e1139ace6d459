#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptdimer/trace.hpp"

namespace ptdimer {

/// Provenance stamped at the top of every output file.
struct RunStamp {
  std::string command;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
};

/// Round-trippable decimal ("%.17g").
std::string format_double(double v);

/// CSV with '#'-prefixed stamp lines, one header row, then numeric rows.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const RunStamp& stamp, const std::vector<std::string>& columns);

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }
  void row(const std::vector<double>& values);
  void close();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::string path_;
};

/// Writes a JSON document with two-space indentation and a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);

/// Trace schema: t_or_detuning, re, im, abs (times in seconds).
void write_trace_csv(const std::string& path, const TimeTrace& trace, const RunStamp& stamp);
/// Reads the trace schema. Comment lines start with '#'; extra columns are ignored.
/// The observable is taken from `re`; shots come from a "# shots: N" line if present.
TimeTrace read_trace_csv(const std::string& path);

}  // namespace ptdimer
