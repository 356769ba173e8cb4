#include "output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "mlab/errors.hpp"

namespace mlab::cli {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw ValidationError("CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::render() const {
  auto line = [](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        s += cells[i];
        continue;
      }
      s += '"';
      for (char c : cells[i]) {
        if (c == '"') s += '"';
        s += c;
      }
      s += '"';
    }
    return s + "\n";
  };
  std::string out = line(header_);
  for (const auto& r : rows_) out += line(r);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace mlab::cli
