#include "scafrest/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "scafrest/error.hpp"

namespace scafrest {
namespace {

constexpr const char* kCsvHeader = "dataset,bucket,n,mae,ssim,psnr,frechet_pixel";
constexpr const char* kCsvMagic = "# scafrest run report v1";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw IoError("unterminated quote in report line");
  fields.push_back(std::move(cur));
  return fields;
}

double parse_metric(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IoError("bad number '" + s + "' in report");
  }
  if (used != s.size()) throw IoError("bad number '" + s + "' in report");
  return v;
}

std::string table_cell(std::optional<double> v, int precision) {
  if (!v) return "-";
  if (std::isinf(*v)) return "inf";
  if (std::isnan(*v)) return "nan";
  return fmt::format("{:.{}f}", *v, precision);
}

}  // namespace

const ReportRow* RunReport::find(const std::string& bucket) const {
  for (const auto& r : rows)
    if (r.bucket == bucket) return &r;
  return nullptr;
}

std::string format_metric(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.10g}", v);
}

void write_report_csv(const RunReport& report, std::ostream& out) {
  out << kCsvMagic << '\n';
  for (const auto& [k, v] : report.provenance) out << "# " << k << '=' << v << '\n';
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << csv_field(report.dataset) << ',' << csv_field(r.bucket) << ',' << r.n << ',' << format_metric(r.mae)
        << ',' << format_metric(r.ssim) << ',' << format_metric(r.psnr) << ','
        << (r.frechet ? format_metric(*r.frechet) : std::string("nan")) << '\n';
  }
}

void write_report_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_report_csv(report, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

RunReport read_report_csv(std::istream& in) {
  RunReport report;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kCsvMagic) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      report.provenance.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw IoError("unexpected report header '" + line + "'");
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw IoError("report row has " + std::to_string(f.size()) + " fields, expected 7");
    report.dataset = f[0];
    ReportRow r;
    r.bucket = f[1];
    r.n = std::size_t(std::stoull(f[2]));
    r.mae = parse_metric(f[3]);
    r.ssim = parse_metric(f[4]);
    r.psnr = parse_metric(f[5]);
    if (f[6] != "nan") r.frechet = parse_metric(f[6]);
    report.rows.push_back(std::move(r));
  }
  if (!header_seen) throw IoError("report has no column header");
  for (const auto& [k, v] : report.provenance) {
    if (k == "degenerate") report.degenerate = std::size_t(std::stoull(v));
    if (k == "failures") report.failures = std::size_t(std::stoull(v));
    if (k == "dataset" && report.dataset.empty()) report.dataset = v;
  }
  return report;
}

RunReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report '" + path.string() + "'");
  return read_report_csv(in);
}

void print_report_table(const RunReport& report, std::ostream& out) {
  out << fmt::format("Restoration report: {}\n", report.dataset);
  for (const auto& [k, v] : report.provenance) out << fmt::format("  {:<18} {}\n", k, v);
  out << fmt::format("{:<12} {:>6} {:>8} {:>8} {:>8} {:>9} {:>16}\n", "Missing rate", "n", "MIoU", "MAE", "SSIM",
                     "PSNR", "Frechet (pixel)");
  for (const auto& r : report.rows) {
    out << fmt::format("{:<12} {:>6} {:>8} {:>8} {:>8} {:>9} {:>16}\n", r.bucket, r.n, table_cell(r.miou, 4),
                       table_cell(r.mae, 4), table_cell(r.ssim, 4), table_cell(r.psnr, 2),
                       table_cell(r.frechet, 4));
  }
  if (report.degenerate || report.failures) {
    out << fmt::format("({} degenerate samples excluded, {} failures)\n", report.degenerate, report.failures);
  }
}

}  // namespace scafrest
