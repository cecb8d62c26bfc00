#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coolwalk/error.hpp"

namespace coolwalk {

// Headered CSV with printf-stable number formatting, so identical runs give
// byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    out_.open(path);
    if (!out_) fail("io", "cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      out_ << buf;
    }
    out_ << '\n';
  }

  void row_raw(const std::string& line) { out_ << line << '\n'; }

 private:
  std::ofstream out_;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// One JSON record per line, appended to <out>/results.jsonl.
inline void append_result(const std::filesystem::path& out_dir, const nlohmann::ordered_json& record) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "results.jsonl", std::ios::app);
  if (!out) fail("io", "cannot open results.jsonl under " + out_dir.string());
  out << record.dump() << '\n';
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& record) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) fail("io", "cannot open " + path.string() + " for writing");
  out << record.dump(2) << '\n';
}

}  // namespace coolwalk
