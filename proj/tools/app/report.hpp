#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace entcost::app {

struct ReportRow {
  std::string channel;
  std::string quantity;
  std::string value;
  std::string direction;
  std::string relaxation = "-";
  double epsilon = 0;
  std::string status;
  double gap = 0;
  double wall_ms = 0;
  std::uint64_t seed = 0;
};

/// Fixed column order of every report.
extern const std::vector<std::string> kReportColumns;

std::string format_number(double v);

/// Header plus one line per row. Wall time is printed as "-" when
/// `omit_timing` is set so runs can be compared byte for byte.
void write_tsv(std::ostream& out, const std::vector<ReportRow>& rows, bool omit_timing);

}  // namespace entcost::app
