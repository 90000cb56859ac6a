#include "velab/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace velab {

CsvWriter::CsvWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::trunc), columns_(columns.size()) {
  if (!out_) {
    throw std::runtime_error("CsvWriter: cannot open " + path);
  }
  char head[64];
  std::snprintf(head, sizeof(head), "# config_hash=%016llx seed=%llu",
                static_cast<unsigned long long>(config_hash),
                static_cast<unsigned long long>(seed));
  out_ << head << "\n";
  for (std::size_t k = 0; k < columns_; ++k) {
    if (k > 0) out_ << ",";
    out_ << columns[k];
  }
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw std::invalid_argument("CsvWriter: row width does not match header");
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) out_ << ",";
    out_ << cells[k];
  }
  out_ << "\n";
  if (!out_) {
    throw std::runtime_error("CsvWriter: write failed");
  }
}

std::string CsvWriter::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvWriter::num(long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return buf;
}

}  // namespace velab
