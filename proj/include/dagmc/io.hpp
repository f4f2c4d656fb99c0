#pragma once

// CSV data ingestion, trace persistence (CSV and binary) and report text.
//
// Binary trace layout, all integers little-endian:
//   magic "GRAT" (0x47 0x52 0x41 0x54)
//   u32 version = 1
//   u32 column count k
//   k x (u16 name length, UTF-8 name bytes)
//   u64 row count (0xFFFFFFFFFFFFFFFF until the sink is finalized)
//   rows of k x f64

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dagmc/report.hpp"

namespace dagmc::io {

struct Table {
  std::vector<std::string> headers;  // empty when the input had none
  std::vector<std::vector<double>> rows;
  std::size_t ncols = 0;

  /// 0-based column copy.
  std::vector<double> column(std::size_t k) const;
  friend bool operator==(const Table&, const Table&) = default;
};

/// Numeric CSV; a first line with any non-numeric field is taken as header.
Table parse_csv(std::string_view text);
/// Throws IoError(FileNotFound, Parse, RaggedRows).
Table read_csv(const std::filesystem::path& path);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

/// Receives every post-burn-in row and persists every `thin`-th one.
class TraceSink {
public:
  TraceSink(std::vector<std::string> columns, std::uint64_t thin);
  virtual ~TraceSink() = default;
  TraceSink(const TraceSink&) = delete;
  TraceSink& operator=(const TraceSink&) = delete;

  /// Throws DimensionMismatch on a wrong row length, IoError(NonFinite) on NaN/inf.
  void write(std::span<const double> row);
  virtual void finalize() {}

  const std::vector<std::string>& columns() const { return columns_; }
  std::uint64_t rows_written() const { return written_; }

protected:
  virtual void write_row(std::span<const double> row) = 0;

private:
  std::vector<std::string> columns_;
  std::uint64_t thin_;
  std::uint64_t seen_ = 0;
  std::uint64_t written_ = 0;
};

class CsvTraceSink final : public TraceSink {
public:
  CsvTraceSink(const std::filesystem::path& path, std::vector<std::string> columns,
               std::uint64_t thin = 1);
  void finalize() override;

protected:
  void write_row(std::span<const double> row) override;

private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class BinaryTraceSink final : public TraceSink {
public:
  static constexpr std::uint64_t kStreamingRowCount = 0xFFFFFFFFFFFFFFFFULL;

  BinaryTraceSink(const std::filesystem::path& path, std::vector<std::string> columns,
                  std::uint64_t thin = 1);
  ~BinaryTraceSink() override;
  /// Writes the final row count into the header.
  void finalize() override;

protected:
  void write_row(std::span<const double> row) override;

private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::streamoff count_offset_ = 0;
  bool finalized_ = false;
};

/// Keeps rows in memory; used for tests and in-process consumers.
class MemoryTraceSink final : public TraceSink {
public:
  explicit MemoryTraceSink(std::vector<std::string> columns, std::uint64_t thin = 1);
  const Table& table() const { return table_; }

protected:
  void write_row(std::span<const double> row) override;

private:
  Table table_;
};

/// CSV for ".csv", binary otherwise.
std::unique_ptr<TraceSink> open_trace(const std::filesystem::path& path,
                                      std::vector<std::string> columns, std::uint64_t thin = 1);

/// Inverse of BinaryTraceSink. A file still carrying the streaming row count
/// is read up to its last complete row. Throws IoError(BadMagic,
/// UnsupportedVersion, TruncatedRow).
Table read_trace_binary(const std::filesystem::path& path);
Table parse_trace_binary(std::span<const std::uint8_t> bytes);

/// Report text: functional average and per-block acceptance rates.
std::string format_report(const RunReport& report);

}  // namespace dagmc::io
