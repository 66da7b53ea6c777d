#include "intermittent/solenoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "intermittent/csv.hpp"
#include "intermittent/rng.hpp"

namespace intermittent {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SolenoidState solenoid_step(const CircleMapFamily& map, const SolenoidState& s) {
  const double angle = kTwoPi * s.x;
  return {map.f(s.x), 0.5 * std::cos(angle) + s.y / 5.0, 0.5 * std::sin(angle) + s.z / 5.0};
}

NamedTorusObservable NamedTorusObservable::base_cos() {
  return {"cos", [](const SolenoidState& s) { return std::cos(kTwoPi * s.x); }, 0.0};
}

NamedTorusObservable NamedTorusObservable::fiber_y() {
  return {"y", [](const SolenoidState& s) { return s.y; }, 1.0};
}

NamedTorusObservable NamedTorusObservable::one() {
  return {"one", [](const SolenoidState&) { return 1.0; }, 0.0};
}

double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::vector<double> level = v;
  while (level.size() > 1) {
    std::vector<double> next((level.size() + 1) / 2);
    for (std::size_t k = 0; k + 1 < level.size(); k += 2) next[k / 2] = level[k] + level[k + 1];
    if (level.size() % 2) next.back() = level.back();
    level.swap(next);
  }
  return level[0];
}

namespace {

SolenoidState random_state(CounterRng& rng) {
  SolenoidState s;
  s.x = rng.uniform();
  const double r = std::sqrt(rng.uniform());
  const double t = kTwoPi * rng.uniform();
  s.y = r * std::cos(t);
  s.z = r * std::sin(t);
  return s;
}

/// Runs `fn(k)` for k in [0, n) on `workers` threads with a static stride.
template <class Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (int k = t; k < n; k += workers) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

BirkhoffResult birkhoff_average(const CircleMapFamily& map,
                                const std::vector<NamedTorusObservable>& observables,
                                const BirkhoffConfig& cfg) {
  if (cfg.streams < 1 || cfg.batches < 1) throw std::invalid_argument("streams and batches must be positive");
  const long per_stream = cfg.orbit_length / cfg.streams;
  const long batch_len = per_stream / cfg.batches;
  if (batch_len < 1) throw std::invalid_argument("orbit too short for the requested batches");
  const std::size_t nobs = observables.size();
  // batch_means[stream][obs * batches + b]
  std::vector<std::vector<double>> batch_means(cfg.streams);

  parallel_for(cfg.streams, cfg.workers, [&](int stream) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(stream));
    SolenoidState s = random_state(rng);
    for (long n = 0; n < cfg.burn_in; ++n) s = solenoid_step(map, s);
    auto& out = batch_means[stream];
    out.assign(nobs * cfg.batches, 0.0);
    std::vector<double> acc(nobs);
    for (int b = 0; b < cfg.batches; ++b) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (long n = 0; n < batch_len; ++n) {
        for (std::size_t o = 0; o < nobs; ++o) acc[o] += observables[o].fn(s);
        s = solenoid_step(map, s);
      }
      for (std::size_t o = 0; o < nobs; ++o) out[o * cfg.batches + b] = acc[o] / batch_len;
    }
  });

  BirkhoffResult res;
  res.samples = batch_len * cfg.batches * cfg.streams;
  const int total_batches = cfg.batches * cfg.streams;
  for (std::size_t o = 0; o < nobs; ++o) {
    std::vector<double> means;
    means.reserve(total_batches);
    for (int st = 0; st < cfg.streams; ++st) {
      for (int b = 0; b < cfg.batches; ++b) means.push_back(batch_means[st][o * cfg.batches + b]);
    }
    const double mean = pairwise_sum(means) / total_batches;
    std::vector<double> sq(means.size());
    for (std::size_t k = 0; k < means.size(); ++k) sq[k] = (means[k] - mean) * (means[k] - mean);
    const double var = total_batches > 1 ? pairwise_sum(sq) / (total_batches - 1) : 0.0;
    res.mean.push_back(mean);
    res.std_error.push_back(std::sqrt(var / total_batches));
  }
  return res;
}

namespace {

/// Inverse distribution function of the measure with cell-average density h.
class Quantile {
 public:
  explicit Quantile(const GridDensity& h) : h_(h) {
    const auto& g = h.grid();
    cum_.resize(g.size() + 1, 0.0);
    for (int k = 0; k < g.size(); ++k) cum_[k + 1] = cum_[k] + std::max(h[k], 0.0) * g.width(k);
    for (double& c : cum_) c /= cum_.back();
  }

  double operator()(double q) const {
    const auto& g = h_.grid();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), q);
    int k = static_cast<int>(it - cum_.begin()) - 1;
    k = std::clamp(k, 0, g.size() - 1);
    const double mass = cum_[k + 1] - cum_[k];
    const double t = mass > 0.0 ? (q - cum_[k]) / mass : 0.5;
    return std::min(g.left(k) + std::clamp(t, 0.0, 1.0) * g.width(k), std::nextafter(1.0, 0.0));
  }

 private:
  GridDensity h_;
  std::vector<double> cum_;
};

}  // namespace

LiftResult lift_expectation(const CircleMapFamily& map, const GridDensity& h,
                            const NamedTorusObservable& phi, const LiftConfig& cfg) {
  if (cfg.k_depth < 1) throw std::invalid_argument("k_depth must be at least 1");
  if (cfg.x_bins < 1 || cfg.x_per_bin < 1 || cfg.n_fiber < 1) {
    throw std::invalid_argument("lift sampling sizes must be positive");
  }
  const Quantile quantile(h);
  LiftResult res;
  std::vector<double> ups, downs;
  double var_sum = 0.0;
  for (int b = 0; b < cfg.x_bins; ++b) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(b));
    FiberEnvelope env{b, -std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), 0};
    double bin_gap = 0.0;
    const std::size_t first = ups.size();
    for (int j = 0; j < cfg.x_per_bin; ++j) {
      const double q = (b + (j + rng.uniform()) / cfg.x_per_bin) / cfg.x_bins;
      const double x = quantile(q);
      double sup = -std::numeric_limits<double>::infinity();
      double inf = std::numeric_limits<double>::infinity();
      for (int w = 0; w < cfg.n_fiber; ++w) {
        SolenoidState s = random_state(rng);
        s.x = x;
        for (int k = 0; k < cfg.k_depth; ++k) s = solenoid_step(map, s);
        const double val = phi.fn(s);
        sup = std::max(sup, val);
        inf = std::min(inf, val);
      }
      ups.push_back(sup);
      downs.push_back(inf);
      bin_gap = std::max(bin_gap, sup - inf);
      env.phi_sup = std::max(env.phi_sup, sup);
      env.phi_inf = std::min(env.phi_inf, inf);
      env.count += cfg.n_fiber;
    }
    if (cfg.x_per_bin > 1) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t k = first; k < ups.size(); ++k) mean += 0.5 * (ups[k] + downs[k]);
      mean /= cfg.x_per_bin;
      for (std::size_t k = first; k < ups.size(); ++k) {
        const double d = 0.5 * (ups[k] + downs[k]) - mean;
        sq += d * d;
      }
      var_sum += sq / (cfg.x_per_bin - 1) / cfg.x_per_bin;
    }
    res.envelope_gap = std::max(res.envelope_gap, bin_gap);
    res.envelopes.push_back(env);
  }
  res.upper = pairwise_sum(ups) / ups.size();
  res.lower = pairwise_sum(downs) / downs.size();
  res.estimate = 0.5 * (res.upper + res.lower);
  res.std_error = std::sqrt(var_sum) / cfg.x_bins;
  res.envelope_bound = phi.fiber_lipschitz * 2.0 * std::pow(5.0, -cfg.k_depth);
  return res;
}

SrbEstimate srb_expectation(const CircleMapFamily& map, const GridPtr& grid,
                            const NamedTorusObservable& phi, const BirkhoffConfig& bcfg,
                            const LiftConfig& lcfg) {
  SrbEstimate est;
  const auto dens = invariant_density(map, grid);
  est.density_converged = dens.converged;
  const auto b = birkhoff_average(map, {phi}, bcfg);
  est.birkhoff = b.mean[0];
  est.birkhoff_se = b.std_error[0];
  est.lift = lift_expectation(map, dens.density, phi, lcfg);
  return est;
}

StabilityTable stability_experiment(const CircleMapFamily& family,
                                    const std::vector<double>& alphas, double alpha0,
                                    const std::vector<NamedTorusObservable>& observables,
                                    const BirkhoffConfig& cfg) {
  if (alphas.empty()) throw std::invalid_argument("stability_experiment: empty alpha sequence");
  for (double a : alphas) {
    if (!(a >= 0.0 && a < 1.0)) throw DomainError("stability_experiment: alpha outside [0,1)");
  }
  StabilityTable t;
  t.alpha0 = alpha0;
  const auto ref = birkhoff_average(*family.with_alpha(alpha0), observables, cfg);
  std::vector<BirkhoffResult> runs;
  for (double a : alphas) runs.push_back(birkhoff_average(*family.with_alpha(a), observables, cfg));

  for (std::size_t o = 0; o < observables.size(); ++o) {
    const auto& id = observables[o].id;
    t.phi_ids.push_back(id);
    t.rows.push_back({alpha0, id, ref.mean[o], ref.std_error[o], 0.0});
    std::vector<double> gaps, ses;
    for (std::size_t n = 0; n < alphas.size(); ++n) {
      const double gap = std::abs(runs[n].mean[o] - ref.mean[o]);
      const double se = std::hypot(runs[n].std_error[o], ref.std_error[o]);
      t.rows.push_back({alphas[n], id, runs[n].mean[o], runs[n].std_error[o], gap});
      gaps.push_back(gap);
      ses.push_back(se);
    }
    // Closest and farthest by distance to alpha0.
    std::size_t closest = 0, farthest = 0;
    for (std::size_t n = 1; n < alphas.size(); ++n) {
      if (std::abs(alphas[n] - alpha0) < std::abs(alphas[closest] - alpha0)) closest = n;
      if (std::abs(alphas[n] - alpha0) > std::abs(alphas[farthest] - alpha0)) farthest = n;
    }
    t.closest_below_farthest.push_back(gaps[closest] < gaps[farthest]);
    bool dec = true;
    for (std::size_t n = 1; n < alphas.size(); ++n) {
      dec = dec && gaps[n] <= gaps[n - 1] + 2.0 * std::hypot(ses[n], ses[n - 1]);
    }
    t.decreasing.push_back(dec);
  }
  return t;
}

SolenoidInvariants check_invariants(const CircleMapFamily& map, int pairs, long orbit_steps,
                                    std::uint64_t seed) {
  SolenoidInvariants out;
  out.pairs = pairs;
  out.orbit_steps = orbit_steps;
  CounterRng rng(seed, 0x5eed1);
  for (int k = 0; k < pairs; ++k) {
    SolenoidState a = random_state(rng), b = random_state(rng);
    b.x = a.x;
    const double before = std::hypot(a.y - b.y, a.z - b.z);
    if (before == 0.0) continue;
    const auto fa = solenoid_step(map, a), fb = solenoid_step(map, b);
    const double after = std::hypot(fa.y - fb.y, fa.z - fb.z);
    out.contraction_error = std::max(out.contraction_error, std::abs(after / before - 0.2));
  }
  SolenoidState s = random_state(rng);
  for (long n = 0; n < orbit_steps; ++n) {
    const SolenoidState next = solenoid_step(map, s);
    if (project_base(next) != map.f(project_base(s))) ++out.semiconjugacy_mismatches;
    out.max_fiber_radius = std::max(out.max_fiber_radius, std::hypot(next.y, next.z));
    s = next;
  }
  return out;
}

void write_stability_csv(std::ostream& os, const StabilityTable& t) {
  os << "alpha,phi,expectation,std_error,gap\n";
  for (const auto& r : t.rows) {
    os << csv::num(r.alpha) << ',' << r.phi_id << ',' << csv::num(r.expectation) << ','
       << csv::num(r.std_error) << ',' << csv::num(r.gap) << '\n';
  }
}

void write_orbit_csv(std::ostream& os, const CircleMapFamily& map, SolenoidState s, long steps,
                     long every) {
  os << "step,x,y,z\n";
  every = std::max(1L, every);
  for (long n = 0; n <= steps; ++n) {
    if (n % every == 0) {
      os << n << ',' << csv::num(s.x) << ',' << csv::num(s.y) << ',' << csv::num(s.z) << '\n';
    }
    if (n < steps) s = solenoid_step(map, s);
  }
}

}  // namespace intermittent
