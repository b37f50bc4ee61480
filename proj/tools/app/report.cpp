#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace entcost::app {

const std::vector<std::string> kReportColumns = {"channel", "quantity", "value",   "direction", "relaxation",
                                                 "epsilon", "status",   "gap",     "wall_ms",   "seed"};

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_tsv(std::ostream& out, const std::vector<ReportRow>& rows, bool omit_timing) {
  for (std::size_t i = 0; i < kReportColumns.size(); ++i) out << (i ? "\t" : "") << kReportColumns[i];
  out << '\n';
  for (const auto& r : rows) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.1f", r.wall_ms);
    out << r.channel << '\t' << r.quantity << '\t' << r.value << '\t' << r.direction << '\t' << r.relaxation << '\t'
        << format_number(r.epsilon) << '\t' << r.status << '\t' << format_number(r.gap) << '\t'
        << (omit_timing ? "-" : wall) << '\t' << r.seed << '\n';
  }
}

}  // namespace entcost::app
