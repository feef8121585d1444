#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>

#include "raceway/params.hpp"
#include "raceway/types.hpp"
#include "raceway/units.hpp"

// The pH PI loop (SIMC-tuned, with back-calculation anti-windup) and the
// rule-based standard-operation benchmark controller.

namespace raceway {

/// First-order-plus-delay response of pH to the CO2 injection flow.
struct FirstOrderModel {
  double gain = -0.55;   ///< k   [pH per (L/min)]
  double tau = 1250.0;   ///< tau [s]
  double delay = 300.0;  ///< L   [s]
};

struct PiGains {
  double kp = 0.0;  ///< [L/min per pH unit]
  double ti = 0.0;  ///< [s]
};

/// SIMC PI tuning for a first-order-plus-delay model:
///   Kp = (1/k) * tau/(tau_c + L),  Ti = min(tau, 4*(tau_c + L)).
inline PiGains simc_tune(const FirstOrderModel& m, double tau_c) {
  if (m.gain == 0.0) throw invalid_parameter("simc_tune: zero process gain");
  if (!(m.tau > 0.0) || m.delay < 0.0 || !(tau_c > 0.0))
    throw invalid_parameter("simc_tune: require tau > 0, delay >= 0, tau_c > 0");
  return {(1.0 / m.gain) * m.tau / (tau_c + m.delay),
          std::min(m.tau, 4.0 * (tau_c + m.delay))};
}

/// Fixed-length FIFO used to emulate the pH measurement delay: push the
/// current sample, receive the one from `steps` samples ago.
class DelayLine {
 public:
  DelayLine() = default;
  DelayLine(int steps, double initial)
      : buf_(static_cast<std::size_t>(std::max(0, steps)), initial) {}

  double push(double v) {
    if (buf_.empty()) return v;
    buf_.push_back(v);
    const double out = buf_.front();
    buf_.pop_front();
    return out;
  }

 private:
  std::deque<double> buf_;
};

/// Discrete PI controller with back-calculation anti-windup:
///   u = Kp*e + I,  I += dt*Kp*e/Ti + min(1, dt/Tt)*(u_sat - u).
/// The tracking correction factor is clamped at 1 so a tracking constant
/// shorter than the sample period snaps the integrator to the saturated
/// output instead of oscillating. The tracking constant is scheduled: fast
/// (tt_clipping) until the measurement first reaches the setpoint each day,
/// slow (tt_tracking) afterwards.
class PiController {
 public:
  explicit PiController(const PiConfig& cfg) : cfg_(cfg) {
    if (!(cfg.ti > 0.0) || !(cfg.tt_clipping > 0.0) || !(cfg.tt_tracking > 0.0))
      throw invalid_parameter("PiController: time constants must be positive");
    new_day();
  }

  /// Resets the integrator and the tracking-constant schedule (called at the
  /// start of each operating day).
  void new_day() {
    integral_ = 0.0;
    crossed_ = false;
    have_sign_ = false;
  }

  double step(double measured, double dt) {
    const double e = cfg_.setpoint - measured;
    if (!have_sign_) {
      start_sign_ = (e > 0.0) ? 1.0 : -1.0;
      have_sign_ = true;
    }
    if (!crossed_ && start_sign_ * e <= 0.0) crossed_ = true;
    const double tt = crossed_ ? cfg_.tt_tracking : cfg_.tt_clipping;
    const double u = cfg_.kp * e + integral_;
    const double u_sat = std::clamp(u, cfg_.out_min, cfg_.out_max);
    integral_ += dt * cfg_.kp * e / cfg_.ti +
                 std::min(1.0, dt / tt) * (u_sat - u);
    return u_sat;
  }

  double integral() const { return integral_; }
  bool setpoint_reached() const { return crossed_; }

 private:
  PiConfig cfg_;
  double integral_ = 0.0;
  double start_sign_ = 1.0;
  bool have_sign_ = false;
  bool crossed_ = false;
};

/// Standard operation: fixed morning harvest window sized to the daily
/// dilution rate, on/off dilution on a level threshold, constant aeration,
/// and an on/off CO2 relay around the pH setpoint. Stateless except the
/// harvest-window clock, the dilution latch and the CO2 relay latch.
class BenchmarkController {
 public:
  BenchmarkController(const BenchmarkConfig& cfg, const ModelParams& model)
      : cfg_(cfg), model_(model) {
    cfg.validate();
  }

  /// Per-period flows (air, dilution, harvest). CO2 comes from co2_flow().
  /// Flows are zeroed while the plant is outside the active window.
  ControlInput plan(std::int64_t t, const ReactorState& s, bool active) {
    const std::int64_t day = t / static_cast<std::int64_t>(seconds_per_day);
    const double tod = static_cast<double>(t % static_cast<std::int64_t>(seconds_per_day));
    const double start = cfg_.harvest_start_hour * 3600.0;
    if (day != harvest_day_ && tod >= start) {
      // size the window from the volume present when the pump starts
      const double volume = model_.area * s.level;
      harvest_day_ = day;
      harvest_until_ = start + cfg_.dilution_rate * volume / (cfg_.q_h * lpm_to_m3s);
    }
    if (s.level < cfg_.level_threshold) diluting_ = true;
    if (s.level >= cfg_.level_threshold + cfg_.level_hysteresis) diluting_ = false;

    ControlInput u;
    if (!active) return u;
    u.q_air = cfg_.q_air;
    u.q_d = diluting_ ? cfg_.q_d : 0.0;
    u.q_h = (day == harvest_day_ && tod >= start && tod < harvest_until_) ? cfg_.q_h : 0.0;
    return u;
  }

  /// On/off CO2 relay: on above setpoint + band/2, off below setpoint - band/2.
  double co2_flow(double ph_measured, bool active) {
    if (ph_measured > cfg_.ph_setpoint + 0.5 * cfg_.ph_band) co2_on_ = true;
    if (ph_measured < cfg_.ph_setpoint - 0.5 * cfg_.ph_band) co2_on_ = false;
    return (active && co2_on_) ? cfg_.q_co2 : 0.0;
  }

 private:
  BenchmarkConfig cfg_;
  ModelParams model_;
  std::int64_t harvest_day_ = -1;
  double harvest_until_ = 0.0;
  bool diluting_ = false;
  bool co2_on_ = false;
};

}  // namespace raceway
