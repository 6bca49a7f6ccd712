#include "casimir_fp/units.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "casimir_fp/constants.hpp"
#include "casimir_fp/errors.hpp"

namespace casimir_fp {

namespace c = constants;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Leading number; the remainder is returned in `rest`.
bool leading_number(std::string_view s, double& value, std::string_view& rest,
                    std::string_view* digits = nullptr) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || !std::isfinite(value)) return false;
  rest = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
  if (digits) *digits = std::string_view(s.data(), static_cast<std::size_t>(ptr - s.data()));
  return true;
}

// digits x 10^exp10, rounded once, so "0.15um" and "150nm" are the same double.
double decimal_scaled(std::string_view digits, int exp10) {
  std::string_view mantissa = digits;
  int e = exp10;
  if (const auto k = digits.find_first_of("eE"); k != std::string_view::npos) {
    int own = 0;
    std::from_chars(digits.data() + k + 1, digits.data() + digits.size(), own);
    mantissa = digits.substr(0, k);
    e += own;
  }
  const std::string text = std::string(mantissa) + "e" + std::to_string(e);
  double v = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), v);
  return v;
}

[[noreturn]] void bad(std::string_view text, const char* expected) {
  std::ostringstream msg;
  msg << "cannot parse '" << text << "': expected " << expected;
  throw ConfigError(msg.str());
}

// Decimal exponent of each length unit.
const std::map<std::string_view, int>& length_units() {
  static const std::map<std::string_view, int> m{
      {"m", 0}, {"mm", -3}, {"um", -6}, {"nm", -9}, {"A", -10}, {"pm", -12}};
  return m;
}

int length_exponent(std::string_view unit, std::string_view text) {
  const auto& m = length_units();
  auto it = m.find(unit);
  if (it == m.end()) bad(text, "a length with unit m, mm, um, nm, A or pm");
  return it->second;
}

double length_scale(std::string_view unit, std::string_view text) {
  return decimal_scaled("1", length_exponent(unit, text));
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dim) {
  const std::string_view s = trim(text);
  double v = 0.0;
  std::string_view unit, digits;
  if (!leading_number(s, v, unit, &digits) || unit.empty()) {
    switch (dim) {
      case Dimension::kLength: bad(text, "a number with a length unit, e.g. 150nm");
      case Dimension::kVoltage: bad(text, "a number with a voltage unit, e.g. 450V");
      case Dimension::kTemperature: bad(text, "a number with unit K, e.g. 300K");
      case Dimension::kArea: bad(text, "an area such as 20x20um or 400um2");
      case Dimension::kFrequency: bad(text, "a frequency such as 1eV, 2.5e14rad/s or 810nm");
      case Dimension::kDensity: bad(text, "a density such as 19300kg/m3");
      case Dimension::kAcceleration: bad(text, "an acceleration such as 9.8m/s2");
    }
  }
  switch (dim) {
    case Dimension::kLength:
      return decimal_scaled(digits, length_exponent(unit, text));
    case Dimension::kVoltage:
      if (unit == "V") return v;
      if (unit == "mV") return v * 1e-3;
      if (unit == "kV") return v * 1e3;
      bad(text, "a voltage with unit V, mV or kV");
    case Dimension::kTemperature:
      if (unit == "K") return v;
      bad(text, "a temperature with unit K");
    case Dimension::kArea: {
      if (!unit.empty() && (unit.front() == 'x' || unit.front() == 'X')) {
        double w = 0.0;
        std::string_view u2;
        if (!leading_number(trim(unit.substr(1)), w, u2) || u2.empty())
          bad(text, "an area such as 20x20um");
        const double k = length_scale(u2, text);
        return v * k * w * k;
      }
      std::string_view u = unit;
      if (u.size() > 2 && u.substr(u.size() - 2) == "^2") u.remove_suffix(2);
      else if (u.size() > 1 && u.back() == '2') u.remove_suffix(1);
      else bad(text, "an area such as 20x20um, 400um2 or 4e-10m^2");
      const double k = length_scale(u, text);
      return v * k * k;
    }
    case Dimension::kFrequency:
      if (unit == "rad/s") return v;
      if (unit == "Hz") return 2.0 * c::pi * v;
      if (unit == "THz") return 2.0 * c::pi * v * 1e12;
      if (unit == "eV") return v * c::ev_to_rad_per_s;
      if (length_units().count(unit)) {
        const double lambda = v * length_scale(unit, text);
        if (!(lambda > 0)) bad(text, "a positive wavelength");
        return 2.0 * c::pi * c::speed_of_light / lambda;
      }
      bad(text, "a frequency with unit rad/s, Hz, THz, eV, or a wavelength");
    case Dimension::kDensity:
      if (unit == "kg/m3" || unit == "kg/m^3") return v;
      if (unit == "g/cm3" || unit == "g/cm^3") return v * 1e3;
      bad(text, "a density with unit kg/m3 or g/cm3");
    case Dimension::kAcceleration:
      if (unit == "m/s2" || unit == "m/s^2") return v;
      bad(text, "an acceleration with unit m/s2");
  }
  bad(text, "a physical quantity");
}

VoltageSpec parse_voltage(std::string_view text) {
  const std::string_view s = trim(text);
  const auto pos = s.find("Vb");
  if (pos == std::string_view::npos) return {parse_quantity(s, Dimension::kVoltage), false};

  double factor = 1.0;
  const std::string_view head = trim(s.substr(0, pos));
  if (!head.empty()) {
    std::string_view rest;
    std::string_view h = head;
    if (h.back() == '*') h = trim(h.substr(0, h.size() - 1));
    if (!leading_number(h, factor, rest) || !rest.empty()) bad(text, "a breakdown multiple, e.g. 0.5Vb");
  }
  const std::string_view tail = trim(s.substr(pos + 2));
  if (!tail.empty()) {
    double den = 0.0;
    std::string_view rest;
    if (tail.front() != '/' || !leading_number(trim(tail.substr(1)), den, rest) || !rest.empty() ||
        den == 0.0)
      bad(text, "a breakdown fraction, e.g. Vb/2");
    factor /= den;
  }
  if (factor < 0) bad(text, "a non-negative voltage");
  return {factor, true};
}

std::string VoltageSpec::str() const {
  std::ostringstream os;
  os.precision(17);
  if (relative_to_breakdown) os << value << "Vb";
  else os << value << "V";
  return os.str();
}

}  // namespace casimir_fp
