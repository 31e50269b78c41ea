#pragma once

#include <iosfwd>
#include <random>

namespace gradcode {

// Pareto delay parameters plus the cost constants of the round-time models.
struct DelayParams {
  double t0 = 0.001;  // minimum delay, seconds
  double xi = 1.1;    // Pareto tail exponent
  double c_g = 3e-6;  // seconds per per-sample gradient
  double c_m = 1e-9;  // seconds per decode FLOP
  int N = 0;          // dataset size
  int n = 0;          // worker count

  friend bool operator==(const DelayParams&, const DelayParams&) = default;
};

void validate(const DelayParams& params);

// Whether decoding-vector computation is charged inside the round time.
enum class DecodeMode { online, offline };

struct TimeModel {
  DecodeMode mode = DecodeMode::offline;
  DelayParams params;
};

// Inverse-CDF sample t0 * u^{-1/xi} with u uniform on (0, 1]; never below t0.
double sample_delay(const DelayParams& params, std::mt19937_64& rng);

/// Expected f-th smallest of n i.i.d. Pareto delays,
/// t0 * Gamma(n-f+1-1/xi) Gamma(n+1) / (Gamma(n-f+1) Gamma(n+1-1/xi)),
/// evaluated through log-Gamma so large n stays in range.  Throws
/// std::domain_error when a Gamma argument hits the pole.
double order_stat_exact(int n, int f, const DelayParams& params);

// Large-n limit of the above at load fraction alpha: t0 * alpha^{-1/xi}.
double order_stat_asymptotic(double alpha, const DelayParams& params);

// Machines required for recovery at load fraction alpha:
// ceil((1 - alpha) n) + 1, clamped into [1, n].
int f_of_alpha(double alpha, int n);

// Inverse of the above: the load fraction at which waiting for f suffices.
double alpha_of_f(int f, int n);

// Expected round time at load alpha.  Online mode adds the decode term
// c_m (1-alpha)^2 n^2 on top of t0 alpha^{-1/xi} + c_g N alpha.
double total_time(double alpha, const TimeModel& model);

struct OptimalAlpha {
  double alpha = 0.0;
  bool valid = false;  // closed form is meaningful only when t0 < c_g N xi
};

// Minimizer of the offline model: alpha* = (t0 / (c_g N xi))^(xi/(1+xi)).
OptimalAlpha optimal_alpha_offline(const DelayParams& params);

// Integer minimizer over f in [1, n] of
// E[T^(f)] + c_g N alpha(f) + (online only) c_m f (f-1),
// with the exact Gamma order statistic; ties break toward smaller f.
int optimal_f(const TimeModel& model);

// CSV sweep "alpha,T_offline,T_online" over alpha in (0, 1] at the given step.
void write_time_sweep(std::ostream& os, const DelayParams& params, double step = 1e-3);

}  // namespace gradcode
