#pragma once

#include <compare>
#include <string>

namespace carboncast {

// Calendar month, the time index of every series in the toolkit.
// Internally month arithmetic runs on a flat index year*12 + (month-1),
// so successor(Dec Y) == Jan Y+1 by construction.
struct MonthDate {
  int year = 1970;
  int month = 1;  // 1..12

  MonthDate() = default;
  MonthDate(int y, int m);

  static MonthDate from_index(int idx);
  int index() const { return year * 12 + (month - 1); }

  MonthDate plus_months(int k) const { return from_index(index() + k); }
  // Months from other to *this (positive when *this is later).
  int months_since(const MonthDate& other) const { return index() - other.index(); }

  std::string to_string() const;            // "YYYY-MM"
  static MonthDate parse(const std::string& text);

  friend auto operator<=>(const MonthDate& a, const MonthDate& b) {
    return a.index() <=> b.index();
  }
  friend bool operator==(const MonthDate& a, const MonthDate& b) {
    return a.index() == b.index();
  }
};

}  // namespace carboncast
