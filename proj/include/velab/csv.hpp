#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace velab {

// CSV writer whose first line records run provenance:
//   # config_hash=<16 hex digits> seed=<decimal>
//   name1,name2,...
// Doubles are printed with %.17g so values round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::uint64_t config_hash, std::uint64_t seed,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);

  static std::string num(double v);
  static std::string num(long long v);
  static std::string num(int v) { return num(static_cast<long long>(v)); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace velab
