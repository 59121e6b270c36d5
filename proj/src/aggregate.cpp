#include <chrono>
#include <cmath>
#include <limits>

#include "stx/io.hpp"

namespace stx {

namespace {

using std::chrono::sys_days;

sys_days to_days(const CivilDate& d) {
  const std::chrono::year_month_day ymd{std::chrono::year{d.year},
                                        std::chrono::month{static_cast<unsigned>(d.month)},
                                        std::chrono::day{static_cast<unsigned>(d.day)}};
  if (!ymd.ok()) throw DomainError("invalid calendar date");
  return sys_days{ymd};
}

sys_days month_start(MonthIndex m) {
  return to_days(CivilDate{m.year(), m.month(), 1});
}

MonthIndex month_of(sys_days d) {
  const std::chrono::year_month_day ymd{d};
  return MonthIndex::from_year_month(static_cast<int>(ymd.year()),
                                     static_cast<int>(static_cast<unsigned>(ymd.month())));
}

}  // namespace

Grid3D aggregate_monthly(const SubMonthlySeries& series, MonthIndex first, MonthIndex last) {
  series.axes.validate();
  if (last < first) throw DomainError("aggregate_monthly: last month precedes first");
  if (series.cells.size() != series.axes.ncells()) {
    throw ValidationError("aggregate_monthly: one sample list per grid cell is required");
  }
  const auto nt = static_cast<std::size_t>(last - first + 1);
  const std::size_t nc = series.axes.ncells();

  Grid3D g;
  g.variable_name = series.variable_name;
  g.units = series.units;
  g.axes = series.axes;
  g.time = Grid3D::month_range(first, nt);
  g.values.assign(nt * nc, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> weighted(nt), days(nt);
  const sys_days window_begin = month_start(first);
  const sys_days window_end = month_start(last + 1);
  for (std::size_t c = 0; c < nc; ++c) {
    std::fill(weighted.begin(), weighted.end(), 0.0);
    std::fill(days.begin(), days.end(), 0.0);
    for (const auto& s : series.cells[c]) {
      if (s.span_days <= 0 || std::isnan(s.value)) continue;
      sys_days b = std::max(to_days(s.start), window_begin);
      const sys_days e = std::min(to_days(s.start) + std::chrono::days{s.span_days}, window_end);
      while (b < e) {
        const MonthIndex m = month_of(b);
        const sys_days next = std::min(month_start(m + 1), e);
        const double overlap = static_cast<double>((next - b).count());
        const auto t = static_cast<std::size_t>(m - first);
        weighted[t] += overlap * s.value;
        days[t] += overlap;
        b = next;
      }
    }
    for (std::size_t t = 0; t < nt; ++t) {
      if (days[t] > 0.0) g.values[t * nc + c] = weighted[t] / days[t];
    }
  }
  return g;
}

Grid3D aggregate_monthly(const SubMonthlySeries& series) {
  bool any = false;
  sys_days lo{}, hi{};
  for (const auto& cell : series.cells) {
    for (const auto& s : cell) {
      if (s.span_days <= 0) continue;
      const sys_days b = to_days(s.start);
      const sys_days e = b + std::chrono::days{s.span_days - 1};
      if (!any || b < lo) lo = b;
      if (!any || e > hi) hi = e;
      any = true;
    }
  }
  if (!any) throw DomainError("aggregate_monthly: no samples");
  return aggregate_monthly(series, month_of(lo), month_of(hi));
}

}  // namespace stx
