#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace evotrack {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  bool valid() const noexcept;
  auto operator<=>(const Date&) const = default;
};

/// Parses strict ISO `YYYY-MM-DD`.
std::optional<Date> parse_iso_date(std::string_view text);
std::string format_date(const Date& date);

/// Calendar month as a single ordinal (year * 12 + month - 1) so that windows
/// can be expressed with plain integer arithmetic.
class Month {
public:
  constexpr Month() = default;
  constexpr explicit Month(int ordinal) : ordinal_(ordinal) {}
  constexpr Month(int year, int month) : ordinal_(year * 12 + (month - 1)) {}

  static constexpr Month of(const Date& d) { return Month(d.year, d.month); }

  constexpr int ordinal() const noexcept { return ordinal_; }
  constexpr int year() const noexcept { return floor_div(ordinal_, 12); }
  constexpr int month() const noexcept { return ordinal_ - year() * 12 + 1; }
  constexpr Date first_day() const noexcept { return Date{year(), month(), 1}; }

  /// `YYYY-MM`
  std::string str() const;

  constexpr Month operator+(int months) const { return Month(ordinal_ + months); }
  constexpr Month operator-(int months) const { return Month(ordinal_ - months); }
  constexpr int operator-(Month other) const { return ordinal_ - other.ordinal_; }
  constexpr Month& operator++() {
    ++ordinal_;
    return *this;
  }
  constexpr auto operator<=>(const Month&) const = default;

private:
  static constexpr int floor_div(int a, int b) {
    return a >= 0 ? a / b : -((-a + b - 1) / b);
  }
  int ordinal_ = 0;
};

/// Parses `YYYY-MM`.
std::optional<Month> parse_month(std::string_view text);

int current_year();

}  // namespace evotrack
