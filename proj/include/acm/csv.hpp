#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

namespace acm {

// Shortest round-trip representation, independent of the stream locale.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  for (int prec = 6; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// RFC 4180 writer (CRLF record separators). Comment records are single
// fields starting with '#', used for key=value metadata ahead of the header.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void comment(const std::string& key, const std::string& value) { record({"# " + key + "=" + value}); }
  void comment(const std::string& key, double value) { comment(key, format_number(value)); }

  void record(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << csv_field(fields[i]);
    }
    os_ << "\r\n";
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> f;
    f.reserve(values.size());
    for (double v : values) f.push_back(format_number(v));
    record(f);
  }

 private:
  std::ostream& os_;
};

// Parser used to read back our own files; returns records as field lists.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text, bool* well_formed = nullptr) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, ok = true, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started) ok = false;
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      rec.push_back(field);
      field.clear();
      field_started = false;
    } else if (c == '\r') {
      if (i + 1 >= text.size() || text[i + 1] != '\n') ok = false;
    } else if (c == '\n') {
      rec.push_back(field);
      out.push_back(rec);
      rec.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) ok = false;
  if (!field.empty() || !rec.empty()) {
    rec.push_back(field);
    out.push_back(rec);
  }
  if (well_formed) *well_formed = ok;
  return out;
}

}  // namespace acm
