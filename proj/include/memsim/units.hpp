#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>

#include "memsim/errors.hpp"

namespace memsim::units {

constexpr double kCelsiusOffset = 273.15;

inline double celsius_to_kelvin(double c) { return c + kCelsiusOffset; }
inline double kelvin_to_celsius(double k) { return k - kCelsiusOffset; }

namespace detail {

struct SplitQuantity {
    double value = 0.0;
    std::string unit; // may be empty
};

inline SplitQuantity split(std::string_view text, std::string_view what) {
    size_t b = text.find_first_not_of(" \t");
    size_t e = text.find_last_not_of(" \t");
    if (b == std::string_view::npos)
        throw ConfigError("empty quantity for " + std::string(what));
    std::string_view t = text.substr(b, e - b + 1);

    SplitQuantity out;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out.value);
    if (ec != std::errc{} || ptr == first)
        throw ConfigError("cannot parse number in \"" + std::string(text) +
                          "\" for " + std::string(what));
    std::string_view rest(ptr, static_cast<size_t>(last - ptr));
    size_t rb = rest.find_first_not_of(" \t");
    if (rb != std::string_view::npos) out.unit = std::string(rest.substr(rb));
    return out;
}

inline double lookup(const std::map<std::string, double>& table, const SplitQuantity& q,
                     std::string_view what, std::string_view expected) {
    if (q.unit.empty()) return q.value; // bare number: SI base unit
    auto it = table.find(q.unit);
    if (it == table.end())
        throw ConfigError("unknown unit \"" + q.unit + "\" for " + std::string(what) +
                          "; expected " + std::string(expected));
    return q.value * it->second;
}

} // namespace detail

/// "100 nm", "2.5 um", "1e-6 m" -> meters. Bare numbers are meters.
inline double parse_length(std::string_view text, std::string_view what = "length") {
    static const std::map<std::string, double> table = {
        {"m", 1.0},    {"cm", 1e-2},     {"mm", 1e-3},
        {"um", 1e-6},  {"µm", 1e-6}, {"μm", 1e-6},
        {"nm", 1e-9},
    };
    return detail::lookup(table, detail::split(text, what), what, "m, mm, um, nm");
}

/// "130 GPa", "5 MPa", "1e5 Pa" -> pascal. Bare numbers are pascal.
inline double parse_pressure(std::string_view text, std::string_view what = "pressure") {
    static const std::map<std::string, double> table = {
        {"Pa", 1.0}, {"kPa", 1e3}, {"MPa", 1e6}, {"GPa", 1e9},
    };
    return detail::lookup(table, detail::split(text, what), what, "Pa, kPa, MPa, GPa");
}

/// Absolute temperature. A unit is required ("20 C", "800 degC", "293.15 K")
/// so that Celsius inputs are never silently taken as kelvin.
inline double parse_temperature(std::string_view text, std::string_view what = "temperature") {
    auto q = detail::split(text, what);
    if (q.unit == "K") return q.value;
    if (q.unit == "C" || q.unit == "degC" || q.unit == "°C")
        return celsius_to_kelvin(q.value);
    throw ConfigError("temperature \"" + std::string(text) + "\" for " + std::string(what) +
                      " needs a unit: K, C, degC");
}

/// Coefficient of thermal expansion: "2.33e-6 /K", "23.1 ppm/K". 1/C == 1/K.
inline double parse_expansion(std::string_view text, std::string_view what = "thermal_expansion") {
    static const std::map<std::string, double> table = {
        {"/K", 1.0},    {"1/K", 1.0},    {"/C", 1.0},    {"1/C", 1.0},
        {"/degC", 1.0}, {"1/degC", 1.0}, {"ppm/K", 1e-6}, {"ppm/C", 1e-6},
    };
    return detail::lookup(table, detail::split(text, what), what, "/K, 1/K, ppm/K");
}

/// "150 W/(m.K)" and spelling variants -> W/(m*K).
inline double parse_thermal_conductivity(std::string_view text,
                                         std::string_view what = "thermal_conductivity") {
    static const std::map<std::string, double> table = {
        {"W/(m.K)", 1.0}, {"W/(m*K)", 1.0}, {"W/m/K", 1.0}, {"W/mK", 1.0},
    };
    return detail::lookup(table, detail::split(text, what), what, "W/(m.K)");
}

/// "5e4 S/m" -> S/m.
inline double parse_electrical_conductivity(std::string_view text,
                                            std::string_view what = "electrical_conductivity") {
    static const std::map<std::string, double> table = {{"S/m", 1.0}};
    return detail::lookup(table, detail::split(text, what), what, "S/m");
}

/// "1.55 C/m^2" -> C/m^2 (piezoelectric stress coupling).
inline double parse_piezo_coupling(std::string_view text,
                                   std::string_view what = "piezo coupling") {
    static const std::map<std::string, double> table = {{"C/m^2", 1.0}, {"C/m2", 1.0}};
    return detail::lookup(table, detail::split(text, what), what, "C/m^2");
}

/// "9e-11 F/m" -> F/m.
inline double parse_permittivity(std::string_view text, std::string_view what = "permittivity") {
    static const std::map<std::string, double> table = {{"F/m", 1.0}};
    return detail::lookup(table, detail::split(text, what), what, "F/m");
}

/// "10 W/(m^2.K)" -> W/(m^2*K) (surface film coefficient).
inline double parse_film_coefficient(std::string_view text,
                                     std::string_view what = "film_coefficient") {
    static const std::map<std::string, double> table = {
        {"W/(m^2.K)", 1.0}, {"W/(m^2*K)", 1.0}, {"W/m^2/K", 1.0}, {"W/m2K", 1.0},
    };
    return detail::lookup(table, detail::split(text, what), what, "W/(m^2.K)");
}

/// "0.5 V", "250 mV" -> volt.
inline double parse_voltage(std::string_view text, std::string_view what = "voltage") {
    static const std::map<std::string, double> table = {{"V", 1.0}, {"mV", 1e-3}};
    return detail::lookup(table, detail::split(text, what), what, "V, mV");
}

/// Full-precision scientific formatting used for all CSV output.
inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17e", v);
    return buf;
}

} // namespace memsim::units
