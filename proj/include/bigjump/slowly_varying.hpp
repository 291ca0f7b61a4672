#ifndef BIGJUMP_SLOWLY_VARYING_HPP
#define BIGJUMP_SLOWLY_VARYING_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace bigjump {

// Slowly varying factors appearing in tail models.  The oscillating
// variant is special: it describes a full tail exponent
// x^(-gamma + sin(log log x)), not a multiplicative factor, and only
// law-level code evaluates it.
enum class sv_variant {
  constant,
  log_power,
  loglog_power,
  exp_log_ratio, // exp(a log x / log log x): slower than any power
  oscillating_exponent
};

struct sv_spec {
  sv_variant variant = sv_variant::constant;
  double c = 1.0;       // constant value
  double a = 0.0;       // exponent on log / log log, or exp_log_ratio rate
  double x_floor = 1.0; // clamp point, >= e (log) resp. >= e^e (log log)
  double gamma = 0.0;   // oscillating tail exponent

  static sv_spec constant_(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("sv_spec: c must be positive");
    sv_spec s;
    s.variant = sv_variant::constant;
    s.c = c;
    return s;
  }

  static sv_spec log_power(double a, double x_floor = 2.718281828459045) {
    if (x_floor < 2.718281828459045) throw std::invalid_argument("sv_spec: x_floor < e");
    sv_spec s;
    s.variant = sv_variant::log_power;
    s.a = a;
    s.x_floor = x_floor;
    return s;
  }

  static sv_spec loglog_power(double a, double x_floor = 15.154262241479262) {
    if (x_floor < 15.154262241479262) throw std::invalid_argument("sv_spec: x_floor < e^e");
    sv_spec s;
    s.variant = sv_variant::loglog_power;
    s.a = a;
    s.x_floor = x_floor;
    return s;
  }

  static sv_spec exp_log_ratio_(double a, double x_floor = 16.0) {
    if (x_floor < 16.0) throw std::invalid_argument("sv_spec: x_floor < 16");
    sv_spec s;
    s.variant = sv_variant::exp_log_ratio;
    s.a = a;
    s.x_floor = x_floor;
    return s;
  }

  static sv_spec oscillating(double gamma) {
    sv_spec s;
    s.variant = sv_variant::oscillating_exponent;
    s.gamma = gamma;
    return s;
  }

  bool is_factor() const { return variant != sv_variant::oscillating_exponent; }

  double eval(double x) const {
    switch (variant) {
      case sv_variant::constant:
        return c;
      case sv_variant::log_power:
        return std::pow(std::log(std::max(x, x_floor)), a);
      case sv_variant::loglog_power:
        return std::pow(std::log(std::log(std::max(x, x_floor))), a);
      case sv_variant::exp_log_ratio: {
        double lx = std::log(std::max(x, x_floor));
        return std::exp(a * lx / std::log(lx));
      }
      case sv_variant::oscillating_exponent:
        throw std::domain_error("sv_spec: oscillating variant is not a factor");
    }
    return 0.0;
  }

  double log_eval(double x) const {
    switch (variant) {
      case sv_variant::constant:
        return std::log(c);
      case sv_variant::log_power:
        return a * std::log(std::log(std::max(x, x_floor)));
      case sv_variant::loglog_power:
        return a * std::log(std::log(std::log(std::max(x, x_floor))));
      case sv_variant::exp_log_ratio: {
        double lx = std::log(std::max(x, x_floor));
        return a * lx / std::log(lx);
      }
      case sv_variant::oscillating_exponent:
        throw std::domain_error("sv_spec: oscillating variant is not a factor");
    }
    return 0.0;
  }

  std::string describe() const {
    switch (variant) {
      case sv_variant::constant: return "const " + std::to_string(c);
      case sv_variant::log_power: return "(log x)^" + std::to_string(a);
      case sv_variant::loglog_power: return "(log log x)^" + std::to_string(a);
      case sv_variant::exp_log_ratio:
        return "exp(" + std::to_string(a) + " log x / log log x)";
      case sv_variant::oscillating_exponent:
        return "x^(-" + std::to_string(gamma) + "+sin(log log x)) tail";
    }
    return "?";
  }
};

} // namespace bigjump

#endif
