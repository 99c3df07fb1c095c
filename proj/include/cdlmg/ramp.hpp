#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cdlmg/error.hpp"

namespace cdlmg {

/// Time-dependent transverse field h(t) with its analytic derivative.
///
/// Supported shapes, with p = parameters:
///   linear     h = p0 + p1 t
///   quadratic  h = p0 + p1 t^2
///   tanh       h = p0 + p1 tanh(p2 t)
///   constant   h = p0
///   custom     user supplied h(t), hdot(t)
class RampSchedule {
 public:
  enum class Kind { linear, quadratic, tanh, constant, custom };

  RampSchedule() = default;

  static RampSchedule linear(double h0, double rate, double t_start = 0.0, double t_end = 1.0) {
    return RampSchedule(Kind::linear, {h0, rate}, t_start, t_end);
  }
  static RampSchedule quadratic(double h0, double rate, double t_start = 0.0, double t_end = 1.0) {
    return RampSchedule(Kind::quadratic, {h0, rate}, t_start, t_end);
  }
  static RampSchedule tanh(double h0, double amplitude, double speed, double t_start = 0.0,
                           double t_end = 1.0) {
    return RampSchedule(Kind::tanh, {h0, amplitude, speed}, t_start, t_end);
  }
  static RampSchedule constant(double h0, double t_start = 0.0, double t_end = 1.0) {
    return RampSchedule(Kind::constant, {h0}, t_start, t_end);
  }
  static RampSchedule custom(std::function<double(double)> h, std::function<double(double)> hdot,
                             double t_start, double t_end, std::string label = "custom") {
    RampSchedule r(Kind::custom, {}, t_start, t_end);
    r.h_fn_ = std::move(h);
    r.hdot_fn_ = std::move(hdot);
    r.label_ = std::move(label);
    r.validate();
    return r;
  }

  /// Parses "kind:p0,p1,..." e.g. "linear:0.75,0.5" or "tanh:0.75,0.5,5".
  static RampSchedule parse(const std::string& spec, double t_start = 0.0, double t_end = 1.0) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    std::vector<double> p;
    if (colon != std::string::npos) {
      std::stringstream ss(spec.substr(colon + 1));
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          p.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw ValidationError("ramp '" + spec + "': cannot parse parameter '" + item + "'");
        }
      }
    }
    auto want = [&](std::size_t n) {
      if (p.size() != n)
        throw ValidationError("ramp '" + spec + "': kind '" + kind + "' takes " +
                              std::to_string(n) + " parameters");
    };
    if (kind == "linear") { want(2); return linear(p[0], p[1], t_start, t_end); }
    if (kind == "quadratic") { want(2); return quadratic(p[0], p[1], t_start, t_end); }
    if (kind == "tanh") { want(3); return tanh(p[0], p[1], p[2], t_start, t_end); }
    if (kind == "constant") { want(1); return constant(p[0], t_start, t_end); }
    throw ValidationError("unknown ramp kind '" + kind +
                          "' (expected linear, quadratic, tanh or constant)");
  }

  double h(double t) const {
    switch (kind_) {
      case Kind::linear: return p_[0] + p_[1] * t;
      case Kind::quadratic: return p_[0] + p_[1] * t * t;
      case Kind::tanh: return p_[0] + p_[1] * std::tanh(p_[2] * t);
      case Kind::constant: return p_[0];
      case Kind::custom: return h_fn_(t);
    }
    return 0.0;
  }

  double hdot(double t) const {
    switch (kind_) {
      case Kind::linear: return p_[1];
      case Kind::quadratic: return 2.0 * p_[1] * t;
      case Kind::tanh: {
        const double c = std::cosh(p_[2] * t);
        return p_[1] * p_[2] / (c * c);
      }
      case Kind::constant: return 0.0;
      case Kind::custom: return hdot_fn_(t);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& parameters() const { return p_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }

  /// Round-trippable description, e.g. "linear:0.75,0.5".
  std::string describe() const {
    if (kind_ == Kind::custom) return label_;
    static const char* names[] = {"linear", "quadratic", "tanh", "constant"};
    std::ostringstream os;
    os.precision(15);
    os << names[static_cast<int>(kind_)] << ':';
    for (std::size_t i = 0; i < p_.size(); ++i) os << (i ? "," : "") << p_[i];
    return os.str();
  }

  /// Field values are strictly positive on the whole domain (checked on a fine sample).
  void validate() const {
    detail::require(std::isfinite(t_start_) && std::isfinite(t_end_) && t_end_ > t_start_,
                    "ramp domain must satisfy t_start < t_end");
    constexpr int samples = 1000;
    for (int i = 0; i <= samples; ++i) {
      const double t = t_start_ + (t_end_ - t_start_) * i / samples;
      const double v = h(t);
      if (!(std::isfinite(v) && v > 0.0))
        throw ValidationError("ramp " + describe() + " must keep h(t) > 0 on [" +
                              std::to_string(t_start_) + ", " + std::to_string(t_end_) + "]");
    }
  }

 private:
  RampSchedule(Kind kind, std::vector<double> p, double t_start, double t_end)
      : kind_(kind), p_(std::move(p)), t_start_(t_start), t_end_(t_end) {
    if (kind_ != Kind::custom) validate();
  }

  Kind kind_ = Kind::constant;
  std::vector<double> p_{1.0};
  double t_start_ = 0.0;
  double t_end_ = 1.0;
  std::function<double(double)> h_fn_;
  std::function<double(double)> hdot_fn_;
  std::string label_;
};

}  // namespace cdlmg
