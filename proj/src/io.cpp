#include "dagmc/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "dagmc/error.hpp"

namespace dagmc::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                           : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

template <typename T>
void put_le(std::ostream& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>(static_cast<std::uint64_t>(value) >> (8 * i) & 0xFF));
  }
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t& pos, std::size_t width) {
  if (pos + width > bytes.size()) {
    throw IoError(IoError::Kind::TruncatedRow, "binary trace ends inside its header");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
  pos += width;
  return v;
}

void check_stream(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw IoError(IoError::Kind::Write, "cannot write " + path.string());
}

}  // namespace

std::vector<double> Table::column(std::size_t k) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.at(k));
  return out;
}

Table parse_csv(std::string_view text) {
  Table table;
  std::size_t line_no = 0;
  bool first = true;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split_fields(line);
    std::vector<double> row(fields.size());
    std::size_t numeric = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric += parse_number(fields[i], row[i]) ? 1 : 0;

    if (first && numeric == 0) {
      for (auto f : fields) table.headers.emplace_back(f);
      table.ncols = fields.size();
      first = false;
      continue;
    }
    if (numeric != fields.size()) {
      for (auto f : fields) {
        double unused;
        if (!parse_number(f, unused)) {
          throw IoError(IoError::Kind::Parse, "not a number: '" + std::string(f) + "'", line_no);
        }
      }
    }
    if (first) table.ncols = fields.size();
    first = false;
    if (fields.size() != table.ncols) {
      throw IoError(IoError::Kind::RaggedRows,
                    "expected " + std::to_string(table.ncols) + " fields, found " +
                        std::to_string(fields.size()),
                    line_no);
    }
    table.rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  return table;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::FileNotFound, "file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

TraceSink::TraceSink(std::vector<std::string> columns, std::uint64_t thin)
    : columns_(std::move(columns)), thin_(thin) {
  if (thin_ == 0) throw InvalidParameter("thinning interval must be positive");
}

void TraceSink::write(std::span<const double> row) {
  if (row.size() != columns_.size()) {
    throw DimensionMismatch("trace row has " + std::to_string(row.size()) + " values, expected " +
                            std::to_string(columns_.size()));
  }
  for (double v : row) {
    if (!std::isfinite(v)) throw IoError(IoError::Kind::NonFinite, "non-finite value in trace row");
  }
  if (++seen_ % thin_ != 0) return;
  write_row(row);
  ++written_;
}

CsvTraceSink::CsvTraceSink(const std::filesystem::path& path, std::vector<std::string> columns,
                           std::uint64_t thin)
    : TraceSink(std::move(columns), thin), out_(path, std::ios::binary), path_(path) {
  check_stream(out_, path_);
  std::string header;
  for (const auto& name : this->columns()) {
    if (!header.empty()) header += ',';
    header += name;
  }
  out_ << header << '\n';
  check_stream(out_, path_);
}

void CsvTraceSink::write_row(std::span<const double> row) {
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) line += ',';
    line += format_double(row[i]);
  }
  line += '\n';
  out_ << line;
  check_stream(out_, path_);
}

void CsvTraceSink::finalize() {
  out_.flush();
  check_stream(out_, path_);
}

BinaryTraceSink::BinaryTraceSink(const std::filesystem::path& path,
                                 std::vector<std::string> columns, std::uint64_t thin)
    : TraceSink(std::move(columns), thin), out_(path, std::ios::binary), path_(path) {
  check_stream(out_, path_);
  out_.write("GRAT", 4);
  put_le<std::uint32_t>(out_, 1);
  put_le<std::uint32_t>(out_, static_cast<std::uint32_t>(this->columns().size()));
  for (const auto& name : this->columns()) {
    if (name.size() > 0xFFFF) throw IoError(IoError::Kind::Write, "column name too long");
    put_le<std::uint16_t>(out_, static_cast<std::uint16_t>(name.size()));
    out_.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  count_offset_ = out_.tellp();
  put_le<std::uint64_t>(out_, kStreamingRowCount);
  check_stream(out_, path_);
}

BinaryTraceSink::~BinaryTraceSink() {
  try {
    finalize();
  } catch (...) {
  }
}

void BinaryTraceSink::write_row(std::span<const double> row) {
  for (double v : row) put_le<std::uint64_t>(out_, std::bit_cast<std::uint64_t>(v));
  check_stream(out_, path_);
}

void BinaryTraceSink::finalize() {
  if (finalized_) return;
  finalized_ = true;
  const auto end = out_.tellp();
  out_.seekp(count_offset_);
  put_le<std::uint64_t>(out_, rows_written());
  out_.seekp(end);
  out_.flush();
  check_stream(out_, path_);
}

MemoryTraceSink::MemoryTraceSink(std::vector<std::string> columns, std::uint64_t thin)
    : TraceSink(std::move(columns), thin) {
  table_.headers = this->columns();
  table_.ncols = table_.headers.size();
}

void MemoryTraceSink::write_row(std::span<const double> row) {
  table_.rows.emplace_back(row.begin(), row.end());
}

std::unique_ptr<TraceSink> open_trace(const std::filesystem::path& path,
                                      std::vector<std::string> columns, std::uint64_t thin) {
  if (path.extension() == ".csv") {
    return std::make_unique<CsvTraceSink>(path, std::move(columns), thin);
  }
  return std::make_unique<BinaryTraceSink>(path, std::move(columns), thin);
}

Table parse_trace_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 0x47 || bytes[1] != 0x52 || bytes[2] != 0x41 ||
      bytes[3] != 0x54) {
    throw IoError(IoError::Kind::BadMagic, "not a binary trace (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = get_le(bytes, pos, 4);
  if (version != 1) {
    throw IoError(IoError::Kind::UnsupportedVersion,
                  "unsupported trace version " + std::to_string(version));
  }
  Table table;
  table.ncols = get_le(bytes, pos, 4);
  for (std::size_t c = 0; c < table.ncols; ++c) {
    const auto len = get_le(bytes, pos, 2);
    if (pos + len > bytes.size()) {
      throw IoError(IoError::Kind::TruncatedRow, "binary trace ends inside its header");
    }
    table.headers.emplace_back(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
  }
  const auto declared = get_le(bytes, pos, 8);
  const std::size_t row_bytes = 8 * table.ncols;
  const std::size_t available = bytes.size() - pos;
  std::uint64_t nrows = 0;
  if (declared == BinaryTraceSink::kStreamingRowCount) {
    nrows = row_bytes == 0 ? 0 : available / row_bytes;
  } else {
    if (row_bytes != 0 && declared > available / row_bytes) {
      throw IoError(IoError::Kind::TruncatedRow,
                    "binary trace declares " + std::to_string(declared) + " rows but holds " +
                        std::to_string(available / row_bytes));
    }
    nrows = declared;
  }
  table.rows.reserve(nrows);
  for (std::uint64_t r = 0; r < nrows; ++r) {
    std::vector<double> row(table.ncols);
    for (auto& v : row) v = std::bit_cast<double>(get_le(bytes, pos, 8));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table read_trace_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::FileNotFound, "file not found: " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_trace_binary(bytes);
}

std::string format_report(const RunReport& report) {
  std::string out;
  char buf[64];
  if (report.functional_average) {
    out += "Functional average = [";
    for (double v : *report.functional_average) {
      std::snprintf(buf, sizeof buf, " %.6f", v);
      out += buf;
    }
    out += " ]\n";
  }
  const std::string header = "Acceptance rates:  ";
  out += header;
  bool first = true;
  for (const auto& block : report.blocks) {
    if (!first) out += std::string(header.size(), ' ');
    first = false;
    std::snprintf(buf, sizeof buf, "%.2f\n", 100.0 * block.rate_total());
    out += "( " + block.name + " ): " + buf;
    if (report.delayed_rejection) {
      std::snprintf(buf, sizeof buf, " (%.2f + %.2f)\n", 100.0 * block.rate_first(),
                    100.0 * block.rate_delayed());
      out += buf;
    }
  }
  if (report.blocks.empty()) out += "\n";
  return out;
}

}  // namespace dagmc::io
