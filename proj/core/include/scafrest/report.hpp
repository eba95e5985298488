#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scafrest {

/// One line of a restoration report: a missing-rate bucket or "Total".
struct ReportRow {
  std::string bucket;
  std::size_t n = 0;
  double mae = 0.0;
  double ssim = 0.0;
  /// +infinity when every sample in the row was restored exactly.
  double psnr = 0.0;
  /// Fréchet distance on pixel embeddings; empty when a side has < 2 samples.
  std::optional<double> frechet;
  /// Mean segmentation MIoU; not carried by CSV round trips.
  std::optional<double> miou;
};

struct RunReport {
  std::string dataset;
  /// Ordered key/value provenance echoed into every serialization.
  std::vector<std::pair<std::string, std::string>> provenance;
  /// Populated buckets in interval order, then Total.
  std::vector<ReportRow> rows;
  std::size_t degenerate = 0;
  std::size_t failures = 0;

  const ReportRow* find(const std::string& bucket) const;
};

inline constexpr const char* kTotalRow = "Total";

/// Columns: dataset, bucket, n, mae, ssim, psnr, frechet_pixel, preceded by
/// "# key=value" provenance lines. Infinity is written as "inf", a missing
/// Fréchet value as "nan".
void write_report_csv(const RunReport& report, std::ostream& out);
void write_report_csv(const RunReport& report, const std::filesystem::path& path);
RunReport read_report_csv(std::istream& in);
RunReport read_report_csv(const std::filesystem::path& path);

/// Fixed-width table for terminals.
void print_report_table(const RunReport& report, std::ostream& out);

/// Number formatting used by the CSV writer ("inf", "nan", or %.10g).
std::string format_metric(double v);

}  // namespace scafrest
