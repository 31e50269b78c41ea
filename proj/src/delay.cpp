#include "gradcode/delay.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace gradcode {

void validate(const DelayParams& p) {
  if (!(p.t0 > 0) || !(p.xi > 0))
    throw std::invalid_argument("delay params: t0 and xi must be positive");
  if (p.c_g < 0 || p.c_m < 0)
    throw std::invalid_argument("delay params: cost constants must be nonnegative");
  if (p.N < 0 || p.n < 0) throw std::invalid_argument("delay params: N and n must be nonnegative");
}

double sample_delay(const DelayParams& params, std::mt19937_64& rng) {
  // 53-bit draw in [0,1) flipped into (0,1]; identical across platforms
  const double u = 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return params.t0 * std::pow(u, -1.0 / params.xi);
}

double order_stat_exact(int n, int f, const DelayParams& params) {
  validate(params);
  if (n < 1 || f < 1 || f > n)
    throw std::invalid_argument("order_stat_exact: need 1 <= f <= n");
  const double inv_xi = 1.0 / params.xi;
  const double shifted = n - f + 1 - inv_xi;
  if (shifted <= 0.0 || n + 1 - inv_xi <= 0.0)
    throw std::domain_error("order_stat_exact: Gamma argument n - f + 1 - 1/xi must be positive");
  return params.t0 * std::exp(std::lgamma(shifted) + std::lgamma(n + 1.0) -
                              std::lgamma(n - f + 1.0) - std::lgamma(n + 1.0 - inv_xi));
}

double order_stat_asymptotic(double alpha, const DelayParams& params) {
  validate(params);
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("order_stat_asymptotic: alpha must lie in (0, 1]");
  return params.t0 * std::pow(alpha, -1.0 / params.xi);
}

int f_of_alpha(double alpha, int n) {
  if (n < 1) throw std::invalid_argument("f_of_alpha: n must be positive");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("f_of_alpha: alpha must lie in (0, 1]");
  // absolute 1e-9 guard keeps exact-rational products from ceiling up a ulp
  const double v = (1.0 - alpha) * n;
  const int f = static_cast<int>(std::ceil(v - 1e-9)) + 1;
  return std::min(std::max(f, 1), n);
}

double alpha_of_f(int f, int n) {
  if (n < 1 || f < 1 || f > n) throw std::invalid_argument("alpha_of_f: need 1 <= f <= n");
  return static_cast<double>(n - f + 1) / n;
}

double total_time(double alpha, const TimeModel& model) {
  validate(model.params);
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("total_time: alpha must lie in (0, 1]");
  const DelayParams& p = model.params;
  double t = p.t0 * std::pow(alpha, -1.0 / p.xi) + p.c_g * p.N * alpha;
  if (model.mode == DecodeMode::online)
    t += p.c_m * (1.0 - alpha) * (1.0 - alpha) * static_cast<double>(p.n) * p.n;
  return t;
}

OptimalAlpha optimal_alpha_offline(const DelayParams& params) {
  validate(params);
  if (!(params.c_g > 0) || params.N < 1)
    throw std::invalid_argument("optimal_alpha_offline: needs c_g > 0 and N >= 1");
  const double ratio = params.t0 / (params.c_g * params.N * params.xi);
  OptimalAlpha result;
  result.alpha = std::pow(ratio, params.xi / (1.0 + params.xi));
  result.valid = ratio < 1.0;
  return result;
}

int optimal_f(const TimeModel& model) {
  const DelayParams& p = model.params;
  validate(p);
  if (p.n < 1) throw std::invalid_argument("optimal_f: worker count must be positive");
  int best_f = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int f = 1; f <= p.n; ++f) {
    double wait;
    try {
      wait = order_stat_exact(p.n, f, p);
    } catch (const std::domain_error&) {
      continue;  // infinite expected wait at this f
    }
    double cost = wait + p.c_g * p.N * alpha_of_f(f, p.n);
    if (model.mode == DecodeMode::online)
      cost += p.c_m * static_cast<double>(f) * (f - 1);
    if (cost < best) {
      best = cost;
      best_f = f;
    }
  }
  if (best_f == 0)
    throw std::domain_error("optimal_f: no finite expected wait for any f (xi too small)");
  return best_f;
}

void write_time_sweep(std::ostream& os, const DelayParams& params, double step) {
  validate(params);
  if (!(step > 0.0) || step > 1.0)
    throw std::invalid_argument("write_time_sweep: step must lie in (0, 1]");
  os << "alpha,T_offline,T_online\n" << std::setprecision(12);
  const long points = std::lround(1.0 / step);
  const TimeModel offline{DecodeMode::offline, params};
  const TimeModel online{DecodeMode::online, params};
  for (long i = 1; i <= points; ++i) {
    const double alpha = std::min(1.0, i * step);
    os << alpha << ',' << total_time(alpha, offline) << ',' << total_time(alpha, online) << '\n';
  }
}

}  // namespace gradcode
