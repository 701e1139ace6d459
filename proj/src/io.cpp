#include "ptdimer/io.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ptdimer {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const RunStamp& stamp, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), columns_(columns.size()), path_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path);
  out_ << "# ptdimer " << stamp.command << "\n";
  out_ << "# config_hash: " << stamp.config_hash << "\n";
  out_ << "# seed: " << (stamp.seed ? std::to_string(*stamp.seed) : std::string("none")) << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::logic_error("CsvWriter: row width differs from header in " + path_);
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << "\n";
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("failed writing " + path_);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_trace_csv(const std::string& path, const TimeTrace& trace, const RunStamp& stamp) {
  CsvWriter w(path, stamp, {"t_or_detuning", "re", "im", "abs"});
  for (std::size_t i = 0; i < trace.size(); ++i) {
    w.row({trace.times[i], trace.values[i].real(), trace.values[i].imag(), std::abs(trace.values[i])});
  }
  w.close();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

}  // namespace

TimeTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::vector<std::string> header;
  std::size_t shots = 0;
  std::vector<double> times;
  std::vector<complex> values;
  long col_t = -1, col_re = -1, col_im = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto pos = line.find("shots:");
      if (pos != std::string::npos) shots = std::stoul(line.substr(pos + 6));
      continue;
    }
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      auto find = [&](const char* name) {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1L : static_cast<long>(it - header.begin());
      };
      col_t = find("t_or_detuning");
      col_re = find("re");
      col_im = find("im");
      if (col_t < 0 || col_re < 0) throw std::runtime_error(path + ": header needs t_or_detuning and re columns");
      continue;
    }
    try {
      times.push_back(std::stod(cells.at(static_cast<std::size_t>(col_t))));
      const double re = std::stod(cells.at(static_cast<std::size_t>(col_re)));
      const double im = col_im >= 0 ? std::stod(cells.at(static_cast<std::size_t>(col_im))) : 0.0;
      values.emplace_back(re, im);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  return TimeTrace(std::move(times), std::move(values), {0.0, 0.0, "input", shots});
}

}  // namespace ptdimer
