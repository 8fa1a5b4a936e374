#include <cstdio>
#include <fstream>

#include "polaron/cli.hpp"

namespace polaron::cli {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::filesystem::path emit_csv(const std::filesystem::path& dir, const Table& t) {
  if (t.rows.empty()) throw ValidationError("table '" + t.name + "' has no rows");
  for (const auto& row : t.rows)
    if (row.size() != t.columns.size())
      throw ValidationError("table '" + t.name + "' row width differs from header");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  const auto path = dir / (t.name + ".csv");
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    f << (c ? "," : "") << t.columns[c];
  f << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << format_real(row[c]);
    f << "\n";
  }
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
  return path;
}

}  // namespace polaron::cli
