#include "qiup/data_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

#include "qiup/format.hpp"

namespace qiup {

void write_scan_csv(std::ostream& out, const FringeScan& scan) {
  out << scan.parameter << ",n_h,n_v\n";
  for (size_t k = 0; k < scan.phis.size(); ++k) {
    out << format_g17(scan.phis[k]) << ',' << format_g17(scan.records[k].n_h) << ','
        << format_g17(scan.records[k].n_v) << '\n';
  }
}

void write_counts_csv(std::ostream& out, const NoisyScan& scan) {
  out << "# shots=" << scan.shots << '\n' << "phi,counts_h,counts_v\n";
  for (size_t k = 0; k < scan.phis.size(); ++k) {
    out << format_g17(scan.phis[k]) << ',' << scan.counts_h[k] << ',' << scan.counts_v[k] << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    std::string f = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.erase(f.begin());
    fields.push_back(std::move(f));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_real(const std::string& s, int line, const char* what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw DataFormatError(line, std::string("malformed ") + what + " '" + s + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, int line, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataFormatError(line, std::string("malformed ") + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

FitData read_data_csv(std::istream& in) {
  FitData data;
  std::optional<std::uint64_t> shots;
  bool header_seen = false;
  bool integer_counts = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto pos = line.find("shots=");
      if (pos != std::string::npos) {
        std::string value = line.substr(pos + 6);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();
        shots = parse_count(value, line_no, "shots");
        if (*shots == 0) throw DataFormatError(line_no, "shots must be positive");
      }
      continue;
    }
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3) throw DataFormatError(line_no, "expected a 3-column header");
      if (fields[1] == "counts_h" && fields[2] == "counts_v") {
        integer_counts = true;
      } else if (!(fields[1] == "n_h" && fields[2] == "n_v")) {
        throw DataFormatError(line_no, "unrecognized header '" + line + "'");
      }
      if (integer_counts && !shots) throw DataFormatError(line_no, "count table without '# shots=N' comment");
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw DataFormatError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    data.phis.push_back(parse_real(fields[0], line_no, "phase"));
    if (integer_counts) {
      const double n = static_cast<double>(*shots);
      data.h.push_back(static_cast<double>(parse_count(fields[1], line_no, "count")) / n);
      data.v.push_back(static_cast<double>(parse_count(fields[2], line_no, "count")) / n);
    } else {
      data.h.push_back(parse_real(fields[1], line_no, "value"));
      data.v.push_back(parse_real(fields[2], line_no, "value"));
    }
  }
  if (!header_seen) throw DataFormatError(line_no, "missing header");
  if (integer_counts) data.shots = shots;
  return data;
}

}  // namespace qiup
