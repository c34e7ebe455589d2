#include "qportfolio/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>

#include "qportfolio/errors.hpp"
#include "qportfolio/rng.hpp"
#include "parallel_util.hpp"

namespace qportfolio {

namespace {

constexpr double k_inf = std::numeric_limits<double>::infinity();

void check_finite_integrand(double value) {
  if (std::isnan(value) || std::isinf(value)) {
    throw NumericalError("integrate: integrand returned a non-finite value (" +
                         std::to_string(value) + ")");
  }
}

// ---------------------------------------------------------------------------
// Axis folding: every axis is mapped onto t in [-1, 1].  Finite axes use the
// affine map; (semi-)infinite axes use tangent maps whose nodes never touch
// the singular endpoints: the rules below evaluate interior points only, and
// the adaptive drivers keep panels wide enough that interior nodes cannot
// round onto t = +/-1.
// ---------------------------------------------------------------------------

enum class AxisKind { finite, lower_infinite, upper_infinite, doubly_infinite };

struct AxisMap {
  AxisKind kind;
  double a = 0.0;  // finite: center; half-infinite: the finite endpoint
  double h = 1.0;  // finite: halfwidth

  // x(t) and dx/dt at t in (-1, 1).
  void eval(double t, double& x, double& jac) const {
    constexpr double half_pi = std::numbers::pi / 2.0;
    constexpr double quarter_pi = std::numbers::pi / 4.0;
    switch (kind) {
      case AxisKind::finite:
        x = a + h * t;
        jac = h;
        return;
      case AxisKind::upper_infinite: {  // [a, inf)
        const double angle = quarter_pi * (t + 1.0);
        const double tn = std::tan(angle);
        x = a + tn;
        jac = quarter_pi * (1.0 + tn * tn);
        return;
      }
      case AxisKind::lower_infinite: {  // (-inf, a]
        const double angle = quarter_pi * (1.0 - t);
        const double tn = std::tan(angle);
        x = a - tn;
        jac = quarter_pi * (1.0 + tn * tn);
        return;
      }
      case AxisKind::doubly_infinite: {
        const double angle = half_pi * t;
        const double tn = std::tan(angle);
        x = tn;
        jac = half_pi * (1.0 + tn * tn);
        return;
      }
    }
  }
};

AxisMap make_axis_map(double lo, double hi) {
  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) return {AxisKind::doubly_infinite};
  if (hi_inf) return {AxisKind::upper_infinite, lo};
  if (lo_inf) return {AxisKind::lower_infinite, hi};
  return {AxisKind::finite, 0.5 * (lo + hi), 0.5 * (hi - lo)};
}

// f folded onto the t-cube [-1,1]^d: g(t) = f(x(t)) * prod_i |dx_i/dt_i|.
class FoldedIntegrand {
 public:
  FoldedIntegrand(const ScalarField& f, const Region& region)
      : f_(f), maps_(), x_(region.axes.size()) {
    maps_.reserve(region.axes.size());
    for (const auto& [lo, hi] : region.axes) maps_.push_back(make_axis_map(lo, hi));
  }

  int dim() const noexcept { return static_cast<int>(maps_.size()); }

  double operator()(std::span<const double> t) const {
    double jac = 1.0;
    for (std::size_t i = 0; i < maps_.size(); ++i) {
      double xi, ji;
      maps_[i].eval(t[i], xi, ji);
      x_[i] = xi;
      jac *= ji;
    }
    const double fx = f_(x_);
    check_finite_integrand(fx);
    return fx * jac;
  }

 private:
  const ScalarField& f_;
  std::vector<AxisMap> maps_;
  mutable std::vector<double> x_;
};

// ---------------------------------------------------------------------------
// Gauss-Kronrod 15(7) on [-1, 1] subintervals (QUADPACK nodes and weights).
// ---------------------------------------------------------------------------

constexpr double kr_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kr_weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double gauss_weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GkEstimate {
  double value;
  double error;
};

template <typename F1>
GkEstimate gauss_kronrod_15(const F1& g, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double fv[15];
  const double f_center = g(center);
  double resk = kr_weights[7] * f_center;
  double resg = gauss_weights[3] * f_center;
  double resabs = std::abs(resk);
  fv[7] = f_center;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kr_nodes[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    resk += kr_weights[j] * (f1 + f2);
    if (j % 2 == 1) resg += gauss_weights[j / 2] * (f1 + f2);
    resabs += kr_weights[j] * (std::abs(f1) + std::abs(f2));
  }
  const double mean = 0.5 * resk;
  double resasc = kr_weights[7] * std::abs(f_center - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kr_weights[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }
  resasc *= half;
  resabs *= half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  return {resk * half, err};
}

struct Interval {
  double lo, hi, value, error;
  long long id;  // insertion sequence: deterministic heap order on ties
};

// Panels narrower than this are never split again: below it the extreme
// Kronrod nodes round onto the panel endpoints, and the folding maps send
// t = +/-1 to the region boundary, where integrands may be singular.
constexpr double k_min_panel_width = 1024.0 * std::numeric_limits<double>::epsilon();

struct IntervalWorse {
  bool operator()(const Interval& a, const Interval& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.id > b.id;
  }
};

IntegralResult integrate_gk_adaptive(const FoldedIntegrand& g, const IntegratorSpec& spec) {
  long long evaluations = 0;
  const auto g1 = [&](double t) {
    ++evaluations;
    const double arr[1] = {t};
    return g(std::span<const double>(arr, 1));
  };

  long long next_id = 0;
  std::priority_queue<Interval, std::vector<Interval>, IntervalWorse> heap;
  auto push = [&](double lo, double hi) {
    const GkEstimate e = gauss_kronrod_15(g1, lo, hi);
    heap.push({lo, hi, e.value, e.error, next_id++});
    return e;
  };

  GkEstimate whole = push(-1.0, 1.0);
  double total_value = whole.value;
  double total_error = whole.error;

  while (total_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value)) &&
         evaluations + 30 <= spec.max_evaluations && heap.top().error > 0.0) {
    const Interval worst = heap.top();
    heap.pop();
    total_value -= worst.value;
    total_error -= worst.error;
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (worst.hi - worst.lo < k_min_panel_width || mid <= worst.lo || mid >= worst.hi) {
      total_value += worst.value;
      total_error += worst.error;
      heap.push(worst);
      break;
    }
    const GkEstimate left = push(worst.lo, mid);
    const GkEstimate right = push(mid, worst.hi);
    total_value += left.value + right.value;
    total_error += left.error + right.error;
  }

  IntegralResult out;
  out.value = total_value;
  out.error_estimate = total_error;
  out.converged = total_error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value));
  out.evaluations = evaluations;
  return out;
}

// ---------------------------------------------------------------------------
// Genz-Malik 7(5) cubature over hyperrectangles of the t-cube.
// ---------------------------------------------------------------------------

struct GmRule {
  int dim;
  double w1, w2, w3, w4, w5;      // degree-7 weights (sum to 1 over the points)
  double e1, e2, e3, e4;          // degree-5 weights for the error rule
  static constexpr double lambda2 = 0.35856858280031809199064515390793;  // sqrt(9/70)
  static constexpr double lambda3 = 0.94868329805051379959966806332982;  // sqrt(9/10)
  static constexpr double lambda4 = lambda3;
  static constexpr double lambda5 = 0.68824720161168529772162873429362;  // sqrt(9/19)

  explicit GmRule(int d) : dim(d) {
    const double dd = d;
    w1 = (12824.0 - 9120.0 * dd + 400.0 * dd * dd) / 19683.0;
    w2 = 980.0 / 6561.0;
    w3 = (1820.0 - 400.0 * dd) / 19683.0;
    w4 = 200.0 / 19683.0;
    w5 = (6859.0 / 19683.0) / std::pow(2.0, dd);
    e1 = (729.0 - 950.0 * dd + 50.0 * dd * dd) / 729.0;
    e2 = 245.0 / 486.0;
    e3 = (265.0 - 100.0 * dd) / 1458.0;
    e4 = 25.0 / 729.0;
  }

  long long points() const {
    return 1 + 4LL * dim + 2LL * dim * (dim - 1) + (1LL << dim);
  }
};

struct SubRegion {
  std::vector<double> center;     // in the t-cube
  std::vector<double> halfwidth;
  double value = 0.0;
  double error = 0.0;
  int split_axis = 0;
  long long id = 0;
};

struct SubRegionWorse {
  bool operator()(const SubRegion& a, const SubRegion& b) const {
    if (a.error != b.error) return a.error < b.error;
    return a.id > b.id;
  }
};

void genz_malik_evaluate(const FoldedIntegrand& g, const GmRule& rule, SubRegion& r) {
  const int d = rule.dim;
  std::vector<double> p(r.center.begin(), r.center.end());
  double volume = 1.0;
  for (int i = 0; i < d; ++i) volume *= 2.0 * r.halfwidth[i];

  const double f_center = g(p);
  double sum2 = 0.0;  // lambda2 axis points
  double sum3 = 0.0;  // lambda3 axis points
  double best_indicator = -1.0;
  int best_axis = 0;
  for (int i = 0; i < d; ++i) {
    const double c = r.center[i];
    const double h = r.halfwidth[i];
    p[i] = c - rule.lambda2 * h;
    const double f2a = g(p);
    p[i] = c + rule.lambda2 * h;
    const double f2b = g(p);
    p[i] = c - rule.lambda3 * h;
    const double f3a = g(p);
    p[i] = c + rule.lambda3 * h;
    const double f3b = g(p);
    p[i] = c;
    sum2 += f2a + f2b;
    sum3 += f3a + f3b;
    // Fourth-divided-difference indicator for the split axis.
    const double ratio = (rule.lambda3 * rule.lambda3) / (rule.lambda2 * rule.lambda2);
    const double indicator =
        std::abs(f3a + f3b - 2.0 * f_center - ratio * (f2a + f2b - 2.0 * f_center));
    if (indicator > best_indicator) {
      best_indicator = indicator;
      best_axis = i;
    }
  }

  double sum4 = 0.0;  // lambda4 two-axis points
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const double ci = r.center[i], hi = r.halfwidth[i];
      const double cj = r.center[j], hj = r.halfwidth[j];
      for (int si = -1; si <= 1; si += 2) {
        for (int sj = -1; sj <= 1; sj += 2) {
          p[i] = ci + si * rule.lambda4 * hi;
          p[j] = cj + sj * rule.lambda4 * hj;
          sum4 += g(p);
        }
      }
      p[i] = ci;
      p[j] = cj;
    }
  }

  double sum5 = 0.0;  // lambda5 corner points
  for (long long mask = 0; mask < (1LL << d); ++mask) {
    for (int i = 0; i < d; ++i) {
      const double sign = (mask >> i) & 1 ? 1.0 : -1.0;
      p[i] = r.center[i] + sign * rule.lambda5 * r.halfwidth[i];
    }
    sum5 += g(p);
  }

  const double rule7 =
      rule.w1 * f_center + rule.w2 * sum2 + rule.w3 * sum3 + rule.w4 * sum4 + rule.w5 * sum5;
  const double rule5 = rule.e1 * f_center + rule.e2 * sum2 + rule.e3 * sum3 + rule.e4 * sum4;
  r.value = rule7 * volume;
  r.error = std::abs(rule7 - rule5) * volume;
  r.split_axis = best_axis;
}

IntegralResult integrate_genz_malik(const FoldedIntegrand& g, const IntegratorSpec& spec) {
  const int d = g.dim();
  const GmRule rule(d);
  long long evaluations = 0;
  long long next_id = 0;

  std::priority_queue<SubRegion, std::vector<SubRegion>, SubRegionWorse> heap;
  auto evaluate_and_push = [&](SubRegion&& r) {
    genz_malik_evaluate(g, rule, r);
    evaluations += rule.points();
    const double v = r.value, e = r.error;
    r.id = next_id++;
    heap.push(std::move(r));
    return std::pair<double, double>(v, e);
  };

  SubRegion whole;
  whole.center.assign(d, 0.0);
  whole.halfwidth.assign(d, 1.0);
  auto [total_value, total_error] = evaluate_and_push(std::move(whole));

  while (total_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value)) &&
         evaluations + 2 * rule.points() <= spec.max_evaluations && heap.top().error > 0.0) {
    SubRegion worst = heap.top();
    heap.pop();
    total_value -= worst.value;
    total_error -= worst.error;

    const int axis = worst.split_axis;
    SubRegion left = worst;
    left.halfwidth[axis] *= 0.5;
    left.center[axis] -= left.halfwidth[axis];
    SubRegion right = std::move(worst);
    right.halfwidth[axis] *= 0.5;
    right.center[axis] += right.halfwidth[axis];

    const auto [lv, le] = evaluate_and_push(std::move(left));
    const auto [rv, re] = evaluate_and_push(std::move(right));
    total_value += lv + rv;
    total_error += le + re;
  }

  IntegralResult out;
  out.value = total_value;
  out.error_estimate = total_error;
  out.converged = total_error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value));
  out.evaluations = evaluations;
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo (uniform over the folded cube, or importance sampling).
// ---------------------------------------------------------------------------

IntegralResult integrate_monte_carlo(const FoldedIntegrand& g, const IntegratorSpec& spec) {
  const int d = g.dim();
  RngStream rng(spec.seed);
  std::vector<double> t(d);
  double sum = 0.0;
  double sum_sq = 0.0;
  const long long n = spec.mc_samples;
  for (long long k = 0; k < n; ++k) {
    for (int i = 0; i < d; ++i) {
      double u = rng.uniform();
      if (u == 0.0) u = 0x1.0p-54;  // keep tangent maps off their poles
      t[i] = 2.0 * u - 1.0;
    }
    // Uniform density on the t-cube is 2^-d, so the estimator carries 2^d.
    const double w = g(t) * std::pow(2.0, d);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
  IntegralResult out;
  out.value = mean;
  out.error_estimate = std::sqrt(var / static_cast<double>(n));
  out.converged =
      out.error_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::abs(out.value));
  out.evaluations = n;
  return out;
}

IntegralResult integrate_monte_carlo_is(const ScalarField& f, int dim, const IntegratorSpec& spec,
                                        const Proposal& proposal) {
  RngStream rng(spec.seed);
  std::vector<double> x(dim);
  double sum = 0.0;
  double sum_sq = 0.0;
  const long long n = spec.mc_samples;
  for (long long k = 0; k < n; ++k) {
    proposal.draw(rng, x);
    const double pdf = proposal.density(x);
    if (!(pdf > 0.0) || !std::isfinite(pdf)) {
      throw NumericalError("integrate: importance proposal density must be finite and > 0 "
                           "at every drawn point");
    }
    const double fx = f(x);
    check_finite_integrand(fx);
    const double w = fx / pdf;
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
  IntegralResult out;
  out.value = mean;
  out.error_estimate = std::sqrt(var / static_cast<double>(n));
  out.converged =
      out.error_estimate <= std::max(spec.abs_tol, spec.rel_tol * std::abs(out.value));
  out.evaluations = n;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Region / spec plumbing
// ---------------------------------------------------------------------------

Region Region::box(std::vector<std::pair<double, double>> axes) {
  Region r{std::move(axes)};
  r.validate();
  return r;
}

Region Region::full_space(int dim) {
  Region r;
  r.axes.assign(static_cast<std::size_t>(dim), {-k_inf, k_inf});
  r.validate();
  return r;
}

Region Region::orthant(int dim, double lo) {
  Region r;
  r.axes.assign(static_cast<std::size_t>(dim), {lo, k_inf});
  r.validate();
  return r;
}

void Region::validate() const {
  if (axes.empty()) throw std::invalid_argument("Region: dimension must be >= 1");
  for (const auto& [lo, hi] : axes) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
      throw std::invalid_argument("Region: each axis needs lo < hi (infinities allowed)");
    }
  }
}

void IntegratorSpec::validate() const {
  if (!(rel_tol >= 0.0) || !(abs_tol >= 0.0) || (rel_tol == 0.0 && abs_tol == 0.0)) {
    throw std::invalid_argument("IntegratorSpec: tolerances must be >= 0 and not both 0");
  }
  if (max_evaluations <= 0) {
    throw std::invalid_argument("IntegratorSpec: max_evaluations must be positive");
  }
  if (method == IntegrationMethod::monte_carlo && mc_samples < 1000) {
    throw std::invalid_argument("IntegratorSpec: mc_samples must be >= 1000");
  }
}

IntegralResult integrate(const ScalarField& f, const Region& region, const IntegratorSpec& spec) {
  region.validate();
  spec.validate();
  const FoldedIntegrand g(f, region);
  switch (spec.method) {
    case IntegrationMethod::adaptive_quadrature_1d:
      if (region.dim() != 1) {
        throw std::invalid_argument("integrate: adaptive_quadrature_1d requires dim == 1");
      }
      return integrate_gk_adaptive(g, spec);
    case IntegrationMethod::cubature_nd:
      if (region.dim() < 2) {
        throw std::invalid_argument(
            "integrate: cubature_nd requires dim >= 2 (use adaptive_quadrature_1d)");
      }
      return integrate_genz_malik(g, spec);
    case IntegrationMethod::monte_carlo:
      return integrate_monte_carlo(g, spec);
  }
  throw std::invalid_argument("integrate: unknown method");
}

IntegralResult integrate(const ScalarField& f, const Region& region, const IntegratorSpec& spec,
                         const Proposal& proposal) {
  region.validate();
  spec.validate();
  if (spec.method != IntegrationMethod::monte_carlo) {
    throw std::invalid_argument("integrate: proposals are a monte_carlo feature");
  }
  if (!proposal.draw || !proposal.density) {
    throw std::invalid_argument("integrate: proposal needs both draw and density");
  }
  return integrate_monte_carlo_is(f, region.dim(), spec, proposal);
}

// ---------------------------------------------------------------------------
// Differential evolution
// ---------------------------------------------------------------------------

void DEConfig::validate() const {
  if (population_size < 0 || (population_size > 0 && population_size < 4)) {
    throw std::invalid_argument("DEConfig: population_size must be 0 (auto) or >= 4");
  }
  if (!(differential_weight > 0.0) || differential_weight > 2.0) {
    throw std::invalid_argument("DEConfig: differential_weight must be in (0, 2]");
  }
  if (!(crossover_rate >= 0.0) || crossover_rate > 1.0) {
    throw std::invalid_argument("DEConfig: crossover_rate must be in [0, 1]");
  }
  if (max_generations <= 0) throw std::invalid_argument("DEConfig: max_generations must be > 0");
  if (!(tolerance > 0.0)) throw std::invalid_argument("DEConfig: tolerance must be > 0");
  if (threads < 1) throw std::invalid_argument("DEConfig: threads must be >= 1");
}

namespace {

// Fold a coordinate back into [lo, hi] by reflection at the walls.
double reflect_into(double v, double lo, double hi) {
  if (v >= lo && v <= hi) return v;
  const double span = hi - lo;
  double t = std::fmod(v - lo, 2.0 * span);
  if (t < 0.0) t += 2.0 * span;
  return lo + (t <= span ? t : 2.0 * span - t);
}

// Non-finite objective values (NaN, +-inf) are never selected.
double as_score(double v) { return std::isfinite(v) ? v : -k_inf; }

}  // namespace

DEResult differential_evolution(const ScalarField& f,
                                std::span<const std::pair<double, double>> bounds,
                                const DEConfig& config) {
  config.validate();
  const int d = static_cast<int>(bounds.size());
  if (d == 0) throw std::invalid_argument("differential_evolution: empty bounds");
  for (const auto& [lo, hi] : bounds) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw std::invalid_argument("differential_evolution: bounds need finite lo < hi");
    }
  }
  const int np = config.population_size > 0 ? config.population_size : 10 * d;

  RngStream rng(config.seed);
  std::vector<std::vector<double>> pop(np, std::vector<double>(d));
  std::vector<double> score(np);
  for (auto& member : pop) {
    for (int j = 0; j < d; ++j) member[j] = rng.uniform(bounds[j].first, bounds[j].second);
  }
  detail::parallel_for(np, config.threads,
                       [&](long long i) { score[i] = as_score(f(pop[i])); });

  int best = 0;
  for (int i = 1; i < np; ++i) {
    if (score[i] > score[best]) best = i;
  }
  if (std::isinf(score[best]) && score[best] < 0.0) {
    throw OptimizationError(
        "differential_evolution: objective is non-finite on the entire initial population",
        {score[best]});
  }

  DEResult result;
  result.trace.push_back(score[best]);

  std::vector<std::vector<double>> trials(np, std::vector<double>(d));
  std::vector<double> trial_score(np);
  for (int gen = 1; gen <= config.max_generations; ++gen) {
    // All random choices happen here, on one thread, before any evaluation.
    for (int i = 0; i < np; ++i) {
      std::uint64_t r1, r2, r3;
      do { r1 = rng.uniform_below(np); } while (static_cast<int>(r1) == i);
      do { r2 = rng.uniform_below(np); } while (r2 == r1 || static_cast<int>(r2) == i);
      do { r3 = rng.uniform_below(np); } while (r3 == r2 || r3 == r1 || static_cast<int>(r3) == i);
      const std::uint64_t forced = rng.uniform_below(static_cast<std::uint64_t>(d));
      auto& trial = trials[i];
      for (int j = 0; j < d; ++j) {
        if (static_cast<std::uint64_t>(j) == forced || rng.uniform() < config.crossover_rate) {
          const double mutant = pop[r1][j] + config.differential_weight *
                                                 (pop[r2][j] - pop[r3][j]);
          trial[j] = reflect_into(mutant, bounds[j].first, bounds[j].second);
        } else {
          trial[j] = pop[i][j];
        }
      }
    }
    detail::parallel_for(np, config.threads,
                         [&](long long i) { trial_score[i] = as_score(f(trials[i])); });

    for (int i = 0; i < np; ++i) {
      if (trial_score[i] >= score[i] && std::isfinite(trial_score[i])) {
        pop[i].swap(trials[i]);
        score[i] = trial_score[i];
        if (score[i] > score[best]) best = i;
      }
    }
    result.trace.push_back(score[best]);
    result.generations = gen;

    // Converged once the whole population has collapsed into one basin;
    // best-so-far stalls are normal mid-run and say nothing by themselves.
    double worst = score[0];
    for (int i = 1; i < np; ++i) worst = std::min(worst, score[i]);
    if (std::isfinite(worst) &&
        score[best] - worst <= config.tolerance * std::max(1.0, std::abs(score[best]))) {
      result.converged = true;
      break;
    }
  }

  result.argmax = pop[best];
  result.value = score[best];
  return result;
}

}  // namespace qportfolio
