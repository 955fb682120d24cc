#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace rrt {

/// Calendar month. Ordered chronologically; `next()` advances one month.
struct MonthStamp {
    int year = 1970;
    int month = 1;  // 1..12

    constexpr MonthStamp() = default;
    constexpr MonthStamp(int y, int m) : year(y), month(m) {}

    /// Months since year 0, used for arithmetic and contiguity checks.
    [[nodiscard]] constexpr int ordinal() const noexcept { return year * 12 + (month - 1); }

    [[nodiscard]] static constexpr MonthStamp from_ordinal(int ord) noexcept {
        return MonthStamp{ord / 12, ord % 12 + 1};
    }

    [[nodiscard]] constexpr MonthStamp next() const noexcept { return from_ordinal(ordinal() + 1); }
    [[nodiscard]] constexpr MonthStamp prev() const noexcept { return from_ordinal(ordinal() - 1); }
    [[nodiscard]] constexpr MonthStamp plus(int months) const noexcept {
        return from_ordinal(ordinal() + months);
    }

    [[nodiscard]] constexpr int yyyymm() const noexcept { return year * 100 + month; }

    /// Parses `yyyymm` (e.g. 192701) or `yyyy-mm`. Throws DataError on malformed input.
    static MonthStamp parse(std::string_view text);
    static MonthStamp from_yyyymm(int yyyymm);

    /// "yyyy-mm"
    [[nodiscard]] std::string iso() const;

    friend constexpr auto operator<=>(const MonthStamp& a, const MonthStamp& b) noexcept {
        return a.ordinal() <=> b.ordinal();
    }
    friend constexpr bool operator==(const MonthStamp& a, const MonthStamp& b) noexcept {
        return a.ordinal() == b.ordinal();
    }
};

/// Number of months in the closed range [first, last]; zero when last < first.
[[nodiscard]] constexpr int months_between(MonthStamp first, MonthStamp last) noexcept {
    return last < first ? 0 : last.ordinal() - first.ordinal() + 1;
}

}  // namespace rrt
