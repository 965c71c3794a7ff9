#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "qiup/estimation.hpp"
#include "qiup/observables.hpp"

namespace qiup {

class DataFormatError : public std::runtime_error {
public:
  DataFormatError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// Header `<parameter>,n_h,n_v`, 17 significant digits, LF endings.
void write_scan_csv(std::ostream& out, const FringeScan& scan);

/// `# shots=N` comment, header `phi,counts_h,counts_v`, integer rows.
void write_counts_csv(std::ostream& out, const NoisyScan& scan);

/// Reads either table. Count tables need the `# shots=N` comment and are
/// converted to per-pair rates; expectation tables are used as given.
FitData read_data_csv(std::istream& in);

}  // namespace qiup
