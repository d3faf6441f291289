#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "contention.hpp"
#include "error.hpp"

namespace lteu {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw ModelError("non-finite value in CSV output");
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// RFC 4180 writer, CRLF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), width_(header.size()) {
    write_row(header);
  }

  class Row {
   public:
    explicit Row(CsvWriter& w) : w_(w) {}
    Row& operator<<(const std::string& s) { cells_.push_back(csv_escape(s)); return *this; }
    Row& operator<<(const char* s) { return *this << std::string(s); }
    Row& operator<<(bool b) { cells_.push_back(b ? "true" : "false"); return *this; }
    template <class T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
    Row& operator<<(T v) { cells_.push_back(std::to_string(v)); return *this; }
    Row& operator<<(double v) { cells_.push_back(format_number(v)); return *this; }
    ~Row() noexcept(false) {
      if (std::uncaught_exceptions() == 0) w_.write_row(cells_, false);
    }

   private:
    CsvWriter& w_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }

 private:
  void write_row(const std::vector<std::string>& cells, bool escape = true) {
    if (cells.size() != width_) throw ModelError("CSV row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << (escape ? csv_escape(cells[i]) : cells[i]);
    }
    os_ << "\r\n";
  }

  std::ostream& os_;
  std::size_t width_;
};

inline void write_pmf_csv(std::ostream& os, const ContentionPmf& p) {
  CsvWriter w(os, {"time_us", "probability"});
  for (std::size_t i = 0; i < p.mass.size(); ++i)
    if (p.mass[i] > 0.0) w.row() << p.time_at(i) << p.mass[i];
}

}  // namespace lteu
