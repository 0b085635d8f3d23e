#include "cclab/fleming_viot.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

namespace cclab {

namespace {

std::uint64_t mix(std::uint64_t z) {
  // splitmix64 finaliser
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

unsigned resolve_threads(unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return threads;
}

void move_walkers(ParticleEnsemble& ens, double sd, Index begin, Index end) {
  const int d = ens.domain.dim();
  for (Index w = begin; w < end; ++w) {
    for (int c = 0; c < d; ++c) {
      ens.positions(c, w) += sd * ens.rng.normal(CounterRng::Stream::kIncrement,
                                                 static_cast<std::uint64_t>(w), ens.step,
                                                 static_cast<std::uint64_t>(c));
    }
  }
}

// Sequential re-injection; finishes the step.
void reinject(ParticleEnsemble& ens) {
  const Index n = ens.size();
  std::vector<char> inside(static_cast<std::size_t>(n));
  Index alive = 0;
  for (Index w = 0; w < n; ++w) {
    inside[w] = ens.domain.contains(ens.positions.col(w));
    alive += inside[w];
  }
  if (alive == 0) {
    throw EnsembleCollapse("fleming-viot: all " + std::to_string(n) + " walkers left D in step " +
                           std::to_string(ens.step + 1) + "; reduce dt");
  }
  std::int64_t kills = 0;
  for (Index w = 0; w < n; ++w) {
    if (inside[w]) continue;
    for (std::uint64_t attempt = 0;; ++attempt) {
      const std::uint64_t r =
          ens.rng.bits(CounterRng::Stream::kReinjection, static_cast<std::uint64_t>(w), ens.step, attempt);
      Index j = static_cast<Index>(r % static_cast<std::uint64_t>(n - 1));
      if (j >= w) ++j;
      if (inside[j]) {
        ens.positions.col(w) = ens.positions.col(j);
        inside[w] = 1;
        break;
      }
    }
    ++kills;
  }
  ens.kill_log.push_back(kills);
  ++ens.step;
}

// Advances `n_steps` steps, calling after_step() once each step is complete.
void advance(ParticleEnsemble& ens, double dt, std::uint64_t n_steps, unsigned threads,
             const std::function<void()>& after_step) {
  const double sd = std::sqrt(dt);
  const Index n = ens.size();
  threads = static_cast<unsigned>(std::min<Index>(resolve_threads(threads), n));
  if (threads <= 1) {
    for (std::uint64_t s = 0; s < n_steps; ++s) {
      move_walkers(ens, sd, 0, n);
      reinject(ens);
      after_step();
    }
    return;
  }

  std::exception_ptr failure;
  std::atomic<bool> stop{false};
  std::uint64_t done = 0;
  auto complete = [&]() noexcept {
    try {
      reinject(ens);
      after_step();
    } catch (...) {
      failure = std::current_exception();
      stop = true;
    }
    if (++done == n_steps) stop = true;
  };
  std::barrier sync(static_cast<std::ptrdiff_t>(threads), complete);
  auto worker = [&](unsigned t) {
    const Index begin = n * t / threads;
    const Index end = n * (t + 1) / threads;
    while (!stop) {
      move_walkers(ens, sd, begin, end);
      sync.arrive_and_wait();
    }
  };
  if (n_steps > 0) {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
  }
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t steps_for(double t, double dt, const char* what) {
  const double s = std::round(t / dt);
  if (!(t >= 0.0) || std::abs(s * dt - t) > 1e-9 * std::max(1.0, t)) {
    throw ArgumentError(std::string("fv_run: ") + what + "=" + std::to_string(t) +
                        " is not a nonnegative multiple of dt=" + std::to_string(dt));
  }
  return static_cast<std::uint64_t>(s);
}

EmpiricalEstimate estimate(const ParticleEnsemble& ens, double t, Index bins, double kill_rate) {
  EmpiricalEstimate e;
  e.t = t;
  e.kill_rate = kill_rate;
  const double a = ens.domain.lower()[0];
  const double b = ens.domain.upper()[0];
  e.bin_edges = Eigen::VectorXd::LinSpaced(bins + 1, a, b);
  e.histogram = Eigen::VectorXd::Zero(bins);
  const Index n = ens.size();
  e.axis0_sorted.resize(static_cast<std::size_t>(n));
  for (Index w = 0; w < n; ++w) {
    const double x = ens.positions(0, w);
    e.axis0_sorted[static_cast<std::size_t>(w)] = x;
    const Index k = std::clamp<Index>(static_cast<Index>((x - a) / (b - a) * bins), 0, bins - 1);
    e.histogram[k] += 1.0;
  }
  e.histogram /= static_cast<double>(n);
  std::sort(e.axis0_sorted.begin(), e.axis0_sorted.end());
  return e;
}

}  // namespace

std::uint64_t CounterRng::bits(Stream stream, std::uint64_t walker, std::uint64_t step,
                               std::uint64_t slot) const {
  std::uint64_t h = mix(seed_ ^ mix(static_cast<std::uint64_t>(stream)));
  h = mix(h ^ walker);
  h = mix(h ^ step);
  return mix(h ^ slot);
}

double CounterRng::uniform(Stream stream, std::uint64_t walker, std::uint64_t step,
                           std::uint64_t slot) const {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(bits(stream, walker, step, slot) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(Stream stream, std::uint64_t walker, std::uint64_t step,
                          std::uint64_t slot) const {
  const double u1 = uniform(stream, walker, step, 2 * slot);
  const double u2 = uniform(stream, walker, step, 2 * slot + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BoxDomain::BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() < 1 || lower_.size() > 3) {
    throw ArgumentError("BoxDomain: dimension must be 1, 2 or 3 with matching bounds");
  }
  for (Index k = 0; k < lower_.size(); ++k) {
    if (!(lower_[k] < upper_[k])) {
      throw ArgumentError("BoxDomain: empty extent along axis " + std::to_string(k));
    }
  }
}

BoxDomain BoxDomain::cube(int dim, double lower, double upper) {
  return BoxDomain(Eigen::VectorXd::Constant(dim, lower), Eigen::VectorXd::Constant(dim, upper));
}

bool BoxDomain::contains(const Eigen::Ref<const Eigen::VectorXd>& p) const {
  return (p.array() > lower_.array()).all() && (p.array() < upper_.array()).all();
}

PointSampler sine_product_sampler() {
  return [](const BoxDomain& box, const std::function<double(std::uint64_t)>& u) {
    Eigen::VectorXd p(box.dim());
    for (int k = 0; k < box.dim(); ++k) {
      const double a = box.lower()[k], b = box.upper()[k];
      p[k] = a + (b - a) / std::numbers::pi * std::acos(1.0 - 2.0 * u(k));
    }
    return p;
  };
}

PointSampler uniform_sampler() {
  return [](const BoxDomain& box, const std::function<double(std::uint64_t)>& u) {
    Eigen::VectorXd p(box.dim());
    for (int k = 0; k < box.dim(); ++k) p[k] = box.lower()[k] + (box.upper()[k] - box.lower()[k]) * u(k);
    return p;
  };
}

ParticleEnsemble make_ensemble(const PointSampler& sampler, const BoxDomain& domain, Index n,
                               std::uint64_t seed) {
  if (n < 2) throw ArgumentError("fleming-viot: need N >= 2 walkers, got " + std::to_string(n));
  ParticleEnsemble ens{Eigen::MatrixXd(domain.dim(), n), domain, CounterRng(seed), 0, {}};
  for (Index w = 0; w < n; ++w) {
    auto u = [&](std::uint64_t slot) {
      return ens.rng.uniform(CounterRng::Stream::kInitial, static_cast<std::uint64_t>(w), 0, slot);
    };
    Eigen::VectorXd p = sampler(domain, u);
    if (p.size() != domain.dim() || !domain.contains(p)) {
      throw ArgumentError("fleming-viot: the sampler produced a point outside D for walker " +
                          std::to_string(w));
    }
    ens.positions.col(w) = p;
  }
  return ens;
}

ParticleEnsemble fv_step(const ParticleEnsemble& ens, double dt, unsigned threads) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ArgumentError("fv_step: dt must be positive, got " + std::to_string(dt));
  }
  if (ens.size() < 2) throw ArgumentError("fv_step: need N >= 2 walkers");
  ParticleEnsemble next = ens;
  advance(next, dt, 1, threads, [] {});
  return next;
}

FvRun fv_run(const PointSampler& sampler, const BoxDomain& domain, double dt, double t_final,
             Index n, std::uint64_t seed, std::vector<double> sample_times,
             const FvRunOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ArgumentError("fv_run: dt must be positive, got " + std::to_string(dt));
  }
  if (options.bins < 1) throw ArgumentError("fv_run: bins must be positive");
  const std::uint64_t total = steps_for(t_final, dt, "t_final");
  std::vector<std::uint64_t> marks;
  for (double t : sample_times) {
    const std::uint64_t s = steps_for(t, dt, "sample time");
    if (s == 0 || s > total) throw ArgumentError("fv_run: sample time outside (0, t_final]");
    marks.push_back(s);
  }
  marks.push_back(total);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  ParticleEnsemble ens = make_ensemble(sampler, domain, n, seed);
  FvRun run;
  run.dt = dt;
  run.walkers = n;
  run.estimates.push_back(estimate(ens, 0.0, options.bins, 0.0));
  std::size_t next_mark = 0;
  std::uint64_t last_mark = 0;
  std::int64_t kills_since = 0;
  advance(ens, dt, total, options.threads, [&] {
    kills_since += ens.kill_log.back();
    if (next_mark < marks.size() && ens.step == marks[next_mark]) {
      const double window = static_cast<double>(ens.step - last_mark) * dt;
      const double rate = static_cast<double>(kills_since) / (static_cast<double>(n) * window);
      run.estimates.push_back(estimate(ens, static_cast<double>(ens.step) * dt, options.bins, rate));
      last_mark = ens.step;
      kills_since = 0;
      ++next_mark;
    }
  });
  run.kill_log = std::move(ens.kill_log);
  return run;
}

FluxSeries empirical_flux(const std::vector<std::int64_t>& kill_log, Index walkers, double dt,
                          Index window_steps) {
  if (kill_log.size() < 2) throw InsufficientDataError("empirical_flux: history shorter than 2 steps");
  if (window_steps < 10) {
    throw InsufficientDataError("empirical_flux: window of " + std::to_string(window_steps) +
                                " steps is shorter than 10");
  }
  if (static_cast<Index>(kill_log.size()) < window_steps) {
    throw InsufficientDataError("empirical_flux: history shorter than one window");
  }
  FluxSeries f;
  const Index windows = static_cast<Index>(kill_log.size()) / window_steps;
  for (Index k = 0; k < windows; ++k) {
    std::int64_t kills = 0;
    for (Index s = k * window_steps; s < (k + 1) * window_steps; ++s) kills += kill_log[s];
    f.times.push_back(static_cast<double>((k + 1) * window_steps) * dt);
    f.values.push_back(static_cast<double>(kills) /
                       (static_cast<double>(walkers) * static_cast<double>(window_steps) * dt));
  }
  return f;
}

RateEstimate mean_kill_rate(const std::vector<std::int64_t>& kill_log, Index walkers, double dt,
                            double t_from, double t_to, Index window_steps) {
  const Index first = static_cast<Index>(std::llround(t_from / dt));
  const Index last = std::min<Index>(static_cast<Index>(kill_log.size()),
                                     static_cast<Index>(std::llround(t_to / dt)));
  std::vector<std::int64_t> slice(kill_log.begin() + first, kill_log.begin() + last);
  const FluxSeries f = empirical_flux(slice, walkers, dt, window_steps);
  const double m = static_cast<double>(f.values.size());
  double mean = 0.0;
  for (double v : f.values) mean += v;
  mean /= m;
  double var = 0.0;
  for (double v : f.values) var += (v - mean) * (v - mean);
  RateEstimate r{mean, 0.0};
  if (f.values.size() > 1) r.standard_error = std::sqrt(var / (m - 1.0) / m);
  return r;
}

double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
  if (sorted.empty()) throw InsufficientDataError("ks_distance: no samples");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double sine_profile_cdf(double x, double a, double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * (x - a) / (b - a)));
}

double ks_distance(const std::vector<double>& sorted, const DensityField& density) {
  const Grid1D& g = density.grid();
  const auto& v = density.values();
  Eigen::VectorXd cum(g.size());
  cum[0] = 0.0;
  for (Index i = 1; i < g.size(); ++i) cum[i] = cum[i - 1] + 0.5 * g.dx() * (v[i - 1] + v[i]);
  const double total = cum[g.size() - 1];
  if (!(total > 0.0)) throw DegenerateConditioningError("ks_distance: density has no mass");
  return ks_distance(sorted, [&](double x) {
    if (x <= g.x_min()) return 0.0;
    if (x >= g.x_max()) return 1.0;
    const double s = (x - g.x_min()) / g.dx();
    const Index i = std::min<Index>(static_cast<Index>(s), g.size() - 2);
    const double f = s - static_cast<double>(i);
    return ((1.0 - f) * cum[i] + f * cum[i + 1]) / total;
  });
}

}  // namespace cclab
