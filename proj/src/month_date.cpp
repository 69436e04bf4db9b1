#include "carboncast/month_date.hpp"

#include <cstdio>

#include "carboncast/errors.hpp"

namespace carboncast {

MonthDate::MonthDate(int y, int m) : year(y), month(m) {
  if (m < 1 || m > 12) {
    throw data_error("MonthDate: month out of range: " + std::to_string(m));
  }
}

MonthDate MonthDate::from_index(int idx) {
  MonthDate d;
  // floor division keeps negative indices (years < 0) consistent
  int y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
  d.year = y;
  d.month = idx - y * 12 + 1;
  return d;
}

std::string MonthDate::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

MonthDate MonthDate::parse(const std::string& text) {
  int y = 0, m = 0;
  if (std::sscanf(text.c_str(), "%d-%d", &y, &m) != 2 || m < 1 || m > 12) {
    throw data_error("MonthDate: cannot parse '" + text + "' (expected YYYY-MM)");
  }
  return MonthDate(y, m);
}

}  // namespace carboncast
