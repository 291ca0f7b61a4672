#ifndef BIGJUMP_CSV_HPP
#define BIGJUMP_CSV_HPP

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace bigjump {

// 17 significant digits: enough to round-trip any binary64 value
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_num(std::int64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  return buf;
}

inline void csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace bigjump

#endif
