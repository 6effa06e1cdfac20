#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "blockalt/linalg2.hpp"
#include "blockalt/multistart.hpp"
#include "blockalt/rng.hpp"

// Closed-loop thermal demo: a nonlinear heater plant integrated with RK4, a
// discrete 2-state linear model with a Luenberger observer, and a one-step-
// ahead predictive controller that picks the heater input together with a
// Lyapunov matrix P each tick by solving a small constrained problem with
// the coordinate solver. A discrete LQR is included as the baseline.

namespace blockalt {

// ---------------------------------------------------------------------------
// Nonlinear plant: m*cp*dT/dt = U*A*(Tamb - T) + eps*sigma*A*(Tamb^4 - T^4) + alpha*Q
// with T in kelvin and Q the heater percentage.
struct PlantParams {
  double mass_kg = 0.004;
  double heat_capacity = 500.0;       // J/(kg K)
  double transfer_coeff = 10.0;       // W/(m^2 K)
  double area_m2 = 12e-4;
  double t_amb_K = 298.15;
  double emissivity = 0.9;
  double stefan_boltzmann = 5.67e-8;  // W/(m^2 K^4)
  double heater_gain = 0.01;          // W per percent of heater output

  double rhs(double t_K, double q_percent) const {
    double conv = transfer_coeff * area_m2 * (t_amb_K - t_K);
    double t4 = t_K * t_K * t_K * t_K;
    double amb4 = t_amb_K * t_amb_K * t_amb_K * t_amb_K;
    double rad = emissivity * stefan_boltzmann * area_m2 * (amb4 - t4);
    return (conv + rad + heater_gain * q_percent) / (mass_kg * heat_capacity);
  }
};

// Integrate the plant over dt with the heater held constant (zero-order
// hold), RK4 at a fixed 0.01 s internal step.
inline double plant_step(const PlantParams& params, double t_K, double q_percent,
                         double dt_s) {
  if (dt_s <= 0.0) return t_K;
  const long long steps = std::max<long long>(1, std::llround(dt_s / 0.01));
  const double h = dt_s / static_cast<double>(steps);
  double t = t_K;
  for (long long i = 0; i < steps; ++i) {
    double k1 = params.rhs(t, q_percent);
    double k2 = params.rhs(t + 0.5 * h * k1, q_percent);
    double k3 = params.rhs(t + 0.5 * h * k2, q_percent);
    double k4 = params.rhs(t + h * k3, q_percent);
    t += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Identified discrete model: x(t+1) = A x(t) + B u(t), y = x2 + T_amb(C).
struct LinearModel {
  Mat2 A{0.0, -0.0005, 1.0, -0.0965};
  Vec2 B{0.0004, 0.0};
  double t_amb_C = 25.0;
  double sample_period_s = 0.5;

  double output(const Vec2& x) const { return x.b + t_amb_C; }
};

struct EquilibriumTarget {
  Vec2 x_bar;
  double u_bar = 0.0;
};

// Steady state of the linear model holding the output at r:
// x = A x + B u together with x2 = r - T_amb pins x1 and u.
inline EquilibriumTarget equilibrium_target(const LinearModel& m, double r_C) {
  double x2 = r_C - m.t_amb_C;
  // Rows of (I - A) x = B u with x2 known:
  //   (1-a11) x1 - b1 u = a12 x2
  //   (-a21)  x1 - b2 u = -(1-a22) x2
  Vec2 sol = solve2x2(1.0 - m.A.m11, -m.B.a, -m.A.m21, -m.B.b, m.A.m12 * x2,
                      -(1.0 - m.A.m22) * x2);
  return {{sol.a, x2}, sol.b};
}

// Luenberger update: x^ <- A x^ + B u + L (y - T_amb - x^_2).
inline Vec2 observer_step(const LinearModel& m, const Vec2& x_hat, const Vec2& gain,
                          double u, double y_C) {
  double innovation = y_C - m.t_amb_C - x_hat.b;
  return m.A * x_hat + m.B * u + gain * innovation;
}

// ---------------------------------------------------------------------------
// Discrete infinite-horizon LQR via the Riccati recursion, iterated to a
// fixed point. K is the 1x2 feedback row; control law u = u_bar - K (x - x_bar).
struct LqrGain {
  Vec2 K;
  Mat2 P;
  int iterations = 0;
};

inline LqrGain dlqr(const LinearModel& m, const Mat2& Qx, double Qu,
                    double tol = 1e-12, int max_iterations = 1000000) {
  Mat2 P = Qx;
  Mat2 At = m.A.transposed();
  for (int it = 1; it <= max_iterations; ++it) {
    Vec2 PB = P * m.B;
    double denom = Qu + m.B.dot(PB);
    if (!(denom > 0.0)) throw std::runtime_error("Riccati recursion lost definiteness");
    Vec2 BtPA{m.B.a * (P.m11 * m.A.m11 + P.m12 * m.A.m21) +
                  m.B.b * (P.m21 * m.A.m11 + P.m22 * m.A.m21),
              m.B.a * (P.m11 * m.A.m12 + P.m12 * m.A.m22) +
                  m.B.b * (P.m21 * m.A.m12 + P.m22 * m.A.m22)};
    // P+ = Qx + A'PA - outer(B'PA, B'PA)/denom, symmetric by construction.
    Mat2 APA = At * P * m.A;
    Mat2 correction = Mat2{BtPA.a * BtPA.a, BtPA.a * BtPA.b, BtPA.b * BtPA.a,
                           BtPA.b * BtPA.b} *
                      (1.0 / denom);
    Mat2 next = Qx + APA - correction;
    double delta = (next - P).max_abs();
    P = next;
    if (P.max_abs() > 1e15) throw std::runtime_error("Riccati recursion diverged");
    if (delta <= tol) {
      Vec2 PB2 = P * m.B;
      double den2 = Qu + m.B.dot(PB2);
      Vec2 BtPA2{m.B.a * (P.m11 * m.A.m11 + P.m12 * m.A.m21) +
                     m.B.b * (P.m21 * m.A.m11 + P.m22 * m.A.m21),
                 m.B.a * (P.m11 * m.A.m12 + P.m12 * m.A.m22) +
                     m.B.b * (P.m21 * m.A.m12 + P.m22 * m.A.m22)};
      return {{BtPA2.a / den2, BtPA2.b / den2}, P, it};
    }
  }
  throw std::runtime_error("Riccati recursion did not converge");
}

// ---------------------------------------------------------------------------
// One-step-ahead predictive controller.

enum class LyapunovNorm { Sqrt, Squared };

struct OsapConfig {
  Mat2 Qx = Mat2::diag(0.1, 10.0);
  double Qu = 0.001;
  double theta = 0.01;           // contraction parameter
  double delta_pd = 1e-6;        // margin realizing P > 0
  double delta_contract = 1e-9;  // margin realizing the strict decrease
  LyapunovNorm norm = LyapunovNorm::Sqrt;
  double u_max = 100.0;
  double p_max = 50.0;  // box edge for the P entries
  int n_starts = 16;    // warm start plus hybrid-sampled remainder
  int sampler_cap = 4096;
  int workers = 1;
  SolverConfig solver{.max_iterations = 400,
                      .x_tol = 1e-6,
                      .cost_tol = 1e-9,
                      .scalar = {.interval_tol = 1e-9, .line_tol = 1e-7,
                                 .feas_tol = 1e-9}};
};

struct ControllerState {
  Vec2 x_hat{0.0, 0.0};
  Mat2 P_prev = Mat2::identity();
  double u_prev = 0.0;
  Vec2 observer_gain{0.85, 0.9};
  double r_C = 50.0;
  Vec2 x_bar;
  double u_bar = 0.0;
};

struct TickDecision {
  double u = 0.0;
  Mat2 P = Mat2::identity();
  bool accepted = false;
  int solver_iterations = 0;
  int starts_used = 0;
  double solve_time_s = 0.0;
  double contraction_residual = 0.0;  // value of the decrease constraint at (u, P)
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "(%.17g)", v);
  return buf;
}

}  // namespace detail

// Lyapunov value of P at deviation z under the configured reading.
inline double lyapunov_value(const Mat2& P, const Vec2& z, LyapunovNorm norm) {
  double q = P.quad(z);
  if (q < 0.0) q = 0.0;
  return norm == LyapunovNorm::Sqrt ? std::sqrt(q) : q;
}

// Decision vector of the per-tick problem: (u, p11, p22, p12). The input
// drives tracking so it leads the cycle; the off-diagonal entry goes last.
// P > 0 is realized as box lower bounds on p11, p22 plus the determinant
// margin constraint; the strict Lyapunov decrease carries its own margin.
inline Problem build_tick_problem(const LinearModel& m, const ControllerState& st,
                                  const OsapConfig& cfg) {
  using detail::num;
  const Vec2 z = st.x_hat - st.x_bar;
  const Vec2 ax = m.A * st.x_hat;
  // Predicted deviation, affine in u: w = A x^ + B u - x_bar.
  const double w1c = ax.a - st.x_bar.a, w1u = m.B.a;
  const double w2c = ax.b - st.x_bar.b, w2u = m.B.b;

  std::string W1 = "(" + num(w1c) + " + " + num(w1u) + "*x1)";
  std::string W2 = "(" + num(w2c) + " + " + num(w2u) + "*x1)";
  std::string quad_next =
      "(x2*" + W1 + "^2 + x3*" + W2 + "^2 + 2*x4*" + W1 + "*" + W2 + ")";
  std::string quad_cur = "(x2*" + num(z.a * z.a) + " + x3*" + num(z.b * z.b) +
                         " + x4*" + num(2.0 * z.a * z.b) + ")";
  const bool sq = cfg.norm == LyapunovNorm::Squared;
  std::string v_next = sq ? quad_next : ("sqrt" + quad_next);
  std::string v_cur = sq ? quad_cur : ("sqrt" + quad_cur);

  std::string cost = num(cfg.Qx.m11) + "*" + W1 + "^2 + " + num(cfg.Qx.m22) + "*" +
                     W2 + "^2 + " + num(2.0 * cfg.Qx.m12) + "*" + W1 + "*" + W2 +
                     " + " + num(cfg.Qu) + "*(x1 - " + num(st.u_bar) + ")^2 + " +
                     v_cur;
  std::string det_c = "x2*x3 - x4^2 >= " + num(cfg.delta_pd);
  std::string decrease_c = v_next + " - " + num(1.0 - cfg.theta) + "*" + v_cur +
                           " <= " + num(-cfg.delta_contract);

  std::vector<Bounds> bounds{{0.0, cfg.u_max},
                             {cfg.delta_pd, cfg.p_max},
                             {cfg.delta_pd, cfg.p_max},
                             {-cfg.p_max, cfg.p_max}};
  return Problem(std::move(bounds), parse_expression(cost, 4),
                 {parse_constraint(det_c, 4), parse_constraint(decrease_c, 4)},
                 {det_c, decrease_c});
}

// Solve one tick. On success the returned (u, P) satisfies the decrease
// constraint and P passes a strict Cholesky check; an infeasible tick keeps
// the previous input and is flagged. `tick_seed` feeds the hybrid sampler.
inline TickDecision controller_step(const LinearModel& m, ControllerState& st,
                                    const OsapConfig& cfg,
                                    std::uint64_t tick_seed = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  TickDecision decision;
  decision.u = st.u_prev;
  decision.P = st.P_prev;

  Problem tick = build_tick_problem(m, st, cfg);

  StartSet starts;
  starts.method = SampleMethod::Hybrid;
  starts.seed = tick_seed;
  Point warm{std::clamp(st.u_prev, 0.0, cfg.u_max),
             std::clamp(st.P_prev.m11, cfg.delta_pd, cfg.p_max),
             std::clamp(st.P_prev.m22, cfg.delta_pd, cfg.p_max),
             std::clamp(st.P_prev.m12, -cfg.p_max, cfg.p_max)};
  if (tick.check_feasible(warm, cfg.solver.scalar.feas_tol).feasible) {
    starts.points.push_back(warm);
    starts.provenance.push_back(Provenance::Grid);
  }
  int remaining = cfg.n_starts - static_cast<int>(starts.points.size());
  if (remaining > 0) {
    SamplerConfig sampler;
    sampler.n_points = remaining;
    sampler.method = SampleMethod::Hybrid;
    sampler.seed = tick_seed;
    sampler.grid_candidate_cap = cfg.sampler_cap;
    sampler.feas_tol = cfg.solver.scalar.feas_tol;
    try {
      StartSet sampled = hybrid(tick, sampler);
      for (std::size_t i = 0; i < sampled.points.size(); ++i) {
        starts.points.push_back(std::move(sampled.points[i]));
        starts.provenance.push_back(sampled.provenance[i]);
      }
    } catch (const SamplerError&) {
      // No feasible samples this tick; the warm start may still carry it.
    }
  }
  decision.starts_used = static_cast<int>(starts.points.size());
  if (starts.points.empty()) {
    decision.accepted = false;
    decision.solve_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return decision;
  }

  SolverReport report;
  try {
    report = run_multistart(tick, starts, cfg.solver, cfg.workers);
  } catch (const AllStartsFailedError&) {
    decision.accepted = false;
    decision.solve_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return decision;
  }

  const Point& best = report.best_point;
  Mat2 P{best[1], best[3], best[3], best[2]};
  const Vec2 z = st.x_hat - st.x_bar;
  const Vec2 w = m.A * st.x_hat + m.B * best[0] - st.x_bar;
  double v_cur = lyapunov_value(P, z, cfg.norm);
  double v_next = lyapunov_value(P, w, cfg.norm);
  decision.contraction_residual = v_next - (1.0 - cfg.theta) * v_cur;

  if (!P.cholesky_pd() || decision.contraction_residual > 0.0) {
    decision.accepted = false;  // numerically off the feasible set; keep u_prev
  } else {
    decision.accepted = true;
    decision.u = best[0];
    decision.P = P;
    st.u_prev = decision.u;
    st.P_prev = P;
  }
  int total_iters = 0;
  for (const StartOutcome& o : report.per_start)
    if (!o.failed) total_iters += o.iterations;
  decision.solver_iterations = total_iters;
  decision.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return decision;
}

// ---------------------------------------------------------------------------
// Closed-loop scenario.

enum class ControllerKind { Osap, Lqr };

struct Scenario {
  ControllerKind controller = ControllerKind::Osap;
  double duration_s = 600.0;
  double t_amb_C = 25.0;
  double r_C = 50.0;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;  // measurement noise, off by default
  OsapConfig osap{};
  PlantParams plant{};
  LinearModel model{};
};

struct Telemetry {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> u;
  std::vector<double> x1_hat;
  std::vector<double> x2_hat;
  std::vector<int> solver_iterations;
  std::vector<double> tick_time_s;
  std::vector<bool> accepted;
  std::vector<double> contraction_residual;
  std::vector<double> p11, p12, p22;
  int rejected_ticks = 0;

  std::size_t size() const { return t.size(); }
};

inline Telemetry run_closed_loop(Scenario scenario) {
  scenario.plant.t_amb_K = scenario.t_amb_C + 273.15;
  scenario.model.t_amb_C = scenario.t_amb_C;

  Telemetry telemetry;
  const double ts = scenario.model.sample_period_s;
  const long long ticks = std::llround(scenario.duration_s / ts);
  if (ticks <= 0) return telemetry;

  EquilibriumTarget target = equilibrium_target(scenario.model, scenario.r_C);
  ControllerState st;
  st.r_C = scenario.r_C;
  st.x_bar = target.x_bar;
  st.u_bar = target.u_bar;

  LqrGain lqr;
  if (scenario.controller == ControllerKind::Lqr)
    lqr = dlqr(scenario.model, scenario.osap.Qx, scenario.osap.Qu);

  SplitMix64 noise_rng = substream(scenario.seed, 0x4E5EULL);
  double plant_T = scenario.t_amb_C + 273.15;
  double applied_u = 0.0;

  for (long long k = 0; k < ticks; ++k) {
    double y = plant_T - 273.15;
    if (scenario.noise_sigma > 0.0) y += scenario.noise_sigma * noise_rng.next_normal();

    st.x_hat = observer_step(scenario.model, st.x_hat, st.observer_gain, applied_u, y);

    double tick_time = 0.0;
    int iterations = 0;
    bool accepted = true;
    double residual = 0.0;
    Mat2 P = st.P_prev;
    double u;
    if (scenario.controller == ControllerKind::Osap) {
      std::uint64_t tick_seed = substream(scenario.seed, static_cast<std::uint64_t>(k)).next();
      TickDecision d = controller_step(scenario.model, st, scenario.osap, tick_seed);
      u = d.u;
      tick_time = d.solve_time_s;
      iterations = d.solver_iterations;
      accepted = d.accepted;
      residual = d.contraction_residual;
      P = d.P;
      if (!d.accepted) ++telemetry.rejected_ticks;
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      Vec2 dev = st.x_hat - st.x_bar;
      u = std::clamp(st.u_bar - lqr.K.dot(dev), 0.0, scenario.osap.u_max);
      tick_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    telemetry.t.push_back(static_cast<double>(k) * ts);
    telemetry.y.push_back(y);
    telemetry.u.push_back(u);
    telemetry.x1_hat.push_back(st.x_hat.a);
    telemetry.x2_hat.push_back(st.x_hat.b);
    telemetry.solver_iterations.push_back(iterations);
    telemetry.tick_time_s.push_back(tick_time);
    telemetry.accepted.push_back(accepted);
    telemetry.contraction_residual.push_back(residual);
    telemetry.p11.push_back(P.m11);
    telemetry.p12.push_back(P.m12);
    telemetry.p22.push_back(P.m22);

    plant_T = plant_step(scenario.plant, plant_T, u, ts);
    applied_u = u;
  }
  return telemetry;
}

}  // namespace blockalt
