#include <cmath>
#include <string>

#include "stx/io.hpp"

namespace stx {

namespace {

enum class Family { Flux, Temperature, Precip, Unknown };

Family family_of(std::string_view u) {
  if (u == units::kFluxSI || u == units::kFluxDaily) return Family::Flux;
  if (u == units::kKelvin || u == units::kCelsius) return Family::Temperature;
  if (u == units::kPrecipMonthly || u == units::kPrecipSI) return Family::Precip;
  return Family::Unknown;
}

constexpr double kGramsPerKg = 1000.0;
constexpr double kKelvinOffset = 273.15;

// Converts one value into the family's canonical unit (kg m-2 s-1, K, or
// kg m-2 s-1 for precipitation). 1 mm of water over 1 m^2 is 1 kg.
double to_canonical(std::string_view u, double v, double step_seconds) {
  if (u == units::kFluxDaily) return v / (kGramsPerKg * kSecondsPerDay);
  if (u == units::kCelsius) return v + kKelvinOffset;
  if (u == units::kPrecipMonthly) return v / step_seconds;
  return v;
}

double from_canonical(std::string_view u, double v, double step_seconds) {
  if (u == units::kFluxDaily) return v * (kGramsPerKg * kSecondsPerDay);
  if (u == units::kCelsius) return v - kKelvinOffset;
  if (u == units::kPrecipMonthly) return v * step_seconds;
  return v;
}

}  // namespace

bool is_known_unit(std::string_view u) { return family_of(u) != Family::Unknown; }

bool units_compatible(std::string_view from, std::string_view to) {
  const Family f = family_of(from);
  return f != Family::Unknown && f == family_of(to);
}

Grid3D convert_units(const Grid3D& g, std::string_view target) {
  if (!is_known_unit(g.units)) throw DomainError("unrecognized unit '" + g.units + "'");
  if (!is_known_unit(target)) throw DomainError("unrecognized unit '" + std::string(target) + "'");
  if (!units_compatible(g.units, target)) {
    throw DomainError("cannot convert '" + g.units + "' to '" + std::string(target) + "'");
  }
  Grid3D out = g;
  out.units = std::string(target);
  if (g.units == target) return out;
  const std::size_t nc = g.ncells();
  for (std::size_t t = 0; t < g.ntime(); ++t) {
    const double secs = month_seconds(g.time[t]);
    for (std::size_t c = 0; c < nc; ++c) {
      double& v = out.values[t * nc + c];
      if (std::isnan(v)) continue;
      v = from_canonical(target, to_canonical(g.units, v, secs), secs);
    }
  }
  return out;
}

}  // namespace stx
