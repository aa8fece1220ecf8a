#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include "entswitch/ctmc.hpp"
#include "entswitch/model.hpp"

namespace entswitch::sim {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for substream `index` of `base`; used to give every replication its
/// own decorrelated generator.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t state = base;
  std::uint64_t v = splitmix64_next(state);
  for (std::uint64_t i = 0; i < index; ++i) v = splitmix64_next(state);
  return v;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Exponential by inversion; log1p keeps small samples accurate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 gen_;
};

/// Two-sided 95% Student-t quantile (upper 2.5%).
inline double student_t_975(int df) {
  static constexpr double kTable[31] = {
      0.0,   12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262,
      2.228, 2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093,
      2.086, 2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045,
      2.042};
  if (df < 1) throw std::invalid_argument("student_t_975: df >= 1 required");
  if (df <= 30) return kTable[df];
  if (df <= 40) return 2.021;
  if (df <= 60) return 2.000;
  if (df <= 120) return 1.980;
  return 1.960;
}

}  // namespace detail

/// Whole-run event counters.  Every generated qubit is eventually measured
/// (2 per BSM, 3 per GHZ), dropped, decohered, or still stored at the end:
///   generated = 2*bsm + 3*ghz + dropped + decohered + stored_at_end
struct SimCounters {
  std::uint64_t generated = 0;
  std::uint64_t bsm = 0;
  std::uint64_t ghz = 0;
  std::uint64_t dropped = 0;
  std::uint64_t decohered = 0;
  std::uint64_t stored_at_end = 0;

  bool operator==(const SimCounters&) const = default;
};

struct SimulationEstimate {
  double c2_hat = 0.0;  // BSMs per second, post-warm-up
  double c3_hat = 0.0;  // GHZs per second, post-warm-up
  double ci2 = 0.0;     // 95% half-widths
  double ci3 = 0.0;
  std::vector<double> occupancy;     // time fraction per chain state
  std::vector<double> occupancy_ci;  // 95% half-widths
  SimCounters counters{};
  std::uint64_t total_events = 0;  // arrivals + decoherence events processed
  std::uint64_t seed = 0;
  double duration = 0.0;  // per-replication simulated seconds

  bool operator==(const SimulationEstimate&) const = default;
};

struct SimOptions {
  double warmup_fraction = 0.01;  // discarded prefix of each run
  int batches = 20;               // batch-means count for the CIs
  std::ostream* trace = nullptr;  // optional per-event CSV log
};

namespace detail {

struct StoredQubit {
  double created = 0.0;
  double decays_at = std::numeric_limits<double>::infinity();
};

struct StoredLink {
  int link = -1;
  int n = 0;
  std::array<StoredQubit, 2> q{};
};

/// Event-by-event simulation of the switch.  Each link has its own
/// exponential arrival clock and each stored qubit its own decoherence
/// deadline.  Random draws per arrival happen in a fixed order: (1) the
/// generating link's next arrival time, (2) the policy coin when a decision
/// point is reached, (3) the deadline of a freshly stored qubit.
class SwitchSimulator {
 public:
  SwitchSimulator(const SwitchConfig& cfg, const PolicyParams& pol,
                  double duration, std::uint64_t seed, const SimOptions& opts)
      : cfg_(cfg),
        pol_(pol),
        duration_(duration),
        seed_(seed),
        opts_(opts),
        rng_(seed),
        n_states_(cfg.buffer_size == 1 ? 3 : 6) {
    t0_ = duration * opts.warmup_fraction;
    t_end_ = duration;
    batch_len_ = (t_end_ - t0_) / opts.batches;
    bsm_batch_.assign(opts.batches, 0);
    ghz_batch_.assign(opts.batches, 0);
    occ_batch_.assign(static_cast<std::size_t>(n_states_) * opts.batches, 0.0);
  }

  SimulationEstimate run() {
    next_arrival_.resize(cfg_.k);
    for (int i = 0; i < cfg_.k; ++i) next_arrival_[i] = rng_.exponential(cfg_.mu);
    cur_state_ = 0;

    while (true) {
      double ta = std::numeric_limits<double>::infinity();
      int link = -1;
      for (int i = 0; i < cfg_.k; ++i)
        if (next_arrival_[i] < ta) {
          ta = next_arrival_[i];
          link = i;
        }
      double td = std::numeric_limits<double>::infinity();
      int dslot = -1, dq = -1;
      if (cfg_.alpha > 0.0) {
        for (int s = 0; s < n_stored_; ++s)
          for (int j = 0; j < stored_[s].n; ++j)
            if (stored_[s].q[j].decays_at < td) {
              td = stored_[s].q[j].decays_at;
              dslot = s;
              dq = j;
            }
      }
      const double t = std::min(ta, td);
      if (t >= duration_) break;
      advance_to(t);
      if (td < ta)
        on_decoherence(dslot, dq);
      else
        on_arrival(link);
      ++total_events_;
      cur_state_ = state_index();
      assert(n_stored_ <= 2);
    }
    advance_to(duration_);

    for (int s = 0; s < n_stored_; ++s)
      counters_.stored_at_end += static_cast<std::uint64_t>(stored_[s].n);
    return finalize();
  }

 private:
  // --- qubit bookkeeping -------------------------------------------------

  StoredQubit make_qubit() {
    StoredQubit q;
    q.created = now_;
    if (cfg_.alpha > 0.0) q.decays_at = now_ + rng_.exponential(cfg_.alpha);
    return q;
  }

  int stored_slot(int link) const {
    for (int s = 0; s < n_stored_; ++s)
      if (stored_[s].link == link) return s;
    return -1;
  }

  void store_new(int link) {
    assert(n_stored_ < 2);
    stored_[n_stored_].link = link;
    stored_[n_stored_].n = 1;
    stored_[n_stored_].q[0] = make_qubit();
    ++n_stored_;
    trace("gen", link, "store");
  }

  void append_qubit(int slot) {
    StoredLink& sl = stored_[slot];
    assert(sl.n < cfg_.buffer_size);
    sl.q[sl.n++] = make_qubit();
    trace("gen", sl.link, "store");
  }

  /// Removes the oldest qubit of a stored link without compacting the
  /// stored-link array (so a sibling slot index stays valid).
  void pop_oldest(int slot) {
    StoredLink& sl = stored_[slot];
    assert(sl.n > 0);
    sl.q[0] = sl.q[1];
    --sl.n;
  }

  void compact() {
    int w = 0;
    for (int s = 0; s < n_stored_; ++s)
      if (stored_[s].n > 0) stored_[w++] = stored_[s];
    n_stored_ = w;
  }

  int state_index() const {
    int a = n_stored_ >= 1 ? stored_[0].n : 0;
    int b = n_stored_ == 2 ? stored_[1].n : 0;
    if (a < b) std::swap(a, b);
    if (a == 0) return 0;
    if (a == 1) return 1 + b;  // (1,0), (1,1)
    return 3 + b;              // (2,0), (2,1), (2,2)
  }

  // --- event handlers ----------------------------------------------------

  void on_arrival(int link) {
    ++counters_.generated;
    next_arrival_[link] = now_ + rng_.exponential(cfg_.mu);
    const int slot = stored_slot(link);
    const int cnt = slot >= 0 ? stored_[slot].n : 0;
    if (cfg_.buffer_size == 1)
      arrival_b1(link, slot, cnt);
    else
      arrival_b2(link, slot, cnt);
  }

  bool coin(double p) { return rng_.uniform() < p; }

  void arrival_b1(int link, int slot, int cnt) {
    if (cnt == 1) {
      if (n_stored_ == 1 || !coin(pol_.r3)) {
        drop(link);
      } else {
        // Swap BSM: the two oldest (stored) qubits are measured and the
        // fresh qubit takes this link's buffer slot.
        count_bsm(link);
        stored_[1 - slot].n = 0;
        compact();
        stored_[0].q[0] = make_qubit();
      }
    } else if (n_stored_ == 0) {
      store_new(link);
    } else if (n_stored_ == 1) {
      if (coin(pol_.r1)) {
        count_bsm(link);
        stored_[0].n = 0;
        compact();
      } else {
        store_new(link);
      }
    } else if (coin(pol_.r2)) {
      count_ghz(link);
      stored_[0].n = stored_[1].n = 0;
      compact();
    } else {
      // BSM against the oldest stored qubit.
      count_bsm(link);
      const int victim =
          stored_[0].q[0].created <= stored_[1].q[0].created ? 0 : 1;
      pop_oldest(victim);
      compact();
    }
  }

  void arrival_b2(int link, int slot, int cnt) {
    if (cnt == 2) {
      // Arrival on a full link: optionally swap against the other stored
      // link's oldest qubit.
      if (n_stored_ == 1 || !coin(pol_.r3)) {
        drop(link);
      } else {
        count_bsm(link);
        pop_oldest(1 - slot);
        compact();
      }
    } else if (cnt == 1) {
      append_qubit(slot);
    } else if (n_stored_ <= 1) {
      store_new(link);
    } else if (coin(pol_.r2)) {
      count_ghz(link);  // fresh qubit + the oldest of each stored link
      pop_oldest(0);
      pop_oldest(1);
      compact();
    } else {
      // BSM partner: from the fuller link when the counts differ (so a GHZ
      // stays possible), otherwise the oldest stored qubit overall.
      count_bsm(link);
      int victim;
      if (stored_[0].n != stored_[1].n)
        victim = stored_[0].n == 2 ? 0 : 1;
      else
        victim = stored_[0].q[0].created <= stored_[1].q[0].created ? 0 : 1;
      pop_oldest(victim);
      compact();
    }
  }

  void on_decoherence(int slot, int qidx) {
    ++counters_.decohered;
    StoredLink& sl = stored_[slot];
    trace("decoh", sl.link, "decohere");
    if (qidx == 0)
      pop_oldest(slot);
    else
      --sl.n;
    compact();
  }

  void drop(int link) {
    ++counters_.dropped;
    trace("gen", link, "drop");
  }

  void count_bsm(int link) {
    ++counters_.bsm;
    record_measurement(false);
    trace("gen", link, "bsm");
  }

  void count_ghz(int link) {
    ++counters_.ghz;
    record_measurement(true);
    trace("gen", link, "ghz");
  }

  // --- statistics --------------------------------------------------------

  int batch_of(double t) const {
    const int b = static_cast<int>((t - t0_) / batch_len_);
    return std::min(opts_.batches - 1, std::max(0, b));
  }

  void record_measurement(bool ghz) {
    if (now_ < t0_) return;
    const int b = batch_of(now_);
    if (ghz)
      ++ghz_batch_[b];
    else
      ++bsm_batch_[b];
  }

  void advance_to(double t) {
    const double lo = std::max(now_, t0_);
    const double hi = std::min(t, t_end_);
    if (hi > lo) {
      const int b0 = batch_of(lo);
      const int b1 = batch_of(hi);
      for (int b = b0; b <= b1; ++b) {
        const double bs = t0_ + b * batch_len_;
        const double be = b == opts_.batches - 1 ? t_end_ : bs + batch_len_;
        const double seg = std::min(hi, be) - std::max(lo, bs);
        if (seg > 0.0)
          occ_batch_[static_cast<std::size_t>(cur_state_) * opts_.batches + b] += seg;
      }
    }
    now_ = t;
  }

  void trace(const char* type, int link, const char* action) {
    if (!opts_.trace) return;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.9f,%s,%d,%s\n", now_, type, link, action);
    *opts_.trace << buf;
  }

  SimulationEstimate finalize() const {
    SimulationEstimate est;
    est.seed = seed_;
    est.duration = duration_;
    est.counters = counters_;
    est.total_events = total_events_;

    const int nb = opts_.batches;
    const double window = t_end_ - t0_;
    std::vector<double> blen(nb);
    for (int b = 0; b < nb; ++b) {
      const double bs = t0_ + b * batch_len_;
      const double be = b == nb - 1 ? t_end_ : bs + batch_len_;
      blen[b] = be - bs;
    }

    const double tq = student_t_975(nb - 1);
    auto batch_ci = [&](const std::vector<double>& values) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= values.size();
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      var /= (values.size() - 1);
      return tq * std::sqrt(var / values.size());
    };

    std::uint64_t bsm_total = 0, ghz_total = 0;
    std::vector<double> bsm_rates(nb), ghz_rates(nb);
    for (int b = 0; b < nb; ++b) {
      bsm_total += bsm_batch_[b];
      ghz_total += ghz_batch_[b];
      bsm_rates[b] = static_cast<double>(bsm_batch_[b]) / blen[b];
      ghz_rates[b] = static_cast<double>(ghz_batch_[b]) / blen[b];
    }
    est.c2_hat = static_cast<double>(bsm_total) / window;
    est.c3_hat = static_cast<double>(ghz_total) / window;
    est.ci2 = batch_ci(bsm_rates);
    est.ci3 = batch_ci(ghz_rates);

    est.occupancy.resize(n_states_);
    est.occupancy_ci.resize(n_states_);
    std::vector<double> fractions(nb);
    for (int s = 0; s < n_states_; ++s) {
      double total = 0.0;
      for (int b = 0; b < nb; ++b) {
        const double v = occ_batch_[static_cast<std::size_t>(s) * nb + b];
        total += v;
        fractions[b] = v / blen[b];
      }
      est.occupancy[s] = total / window;
      est.occupancy_ci[s] = batch_ci(fractions);
    }
    return est;
  }

  // --- members -------------------------------------------------------------

  SwitchConfig cfg_;
  PolicyParams pol_;
  double duration_;
  std::uint64_t seed_;
  SimOptions opts_;
  RandomStream rng_;
  int n_states_;

  std::vector<double> next_arrival_;
  std::array<StoredLink, 2> stored_{};
  int n_stored_ = 0;
  double now_ = 0.0;
  int cur_state_ = 0;

  SimCounters counters_{};
  std::uint64_t total_events_ = 0;

  double t0_ = 0.0, t_end_ = 0.0, batch_len_ = 0.0;
  std::vector<std::uint64_t> bsm_batch_, ghz_batch_;
  std::vector<double> occ_batch_;
};

}  // namespace detail

/// Runs one replication.  Identical arguments produce bit-identical results.
inline SimulationEstimate simulate(const SwitchConfig& cfg, const PolicyParams& pol,
                                   double duration, std::uint64_t seed,
                                   const SimOptions& opts = {}) {
  validate_config(cfg, pol);
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw ValidationError("duration must be positive and finite");
  if (opts.batches < 2) throw ValidationError("at least 2 batches required");
  if (!(opts.warmup_fraction >= 0.0) || opts.warmup_fraction >= 0.9)
    throw ValidationError("warmup fraction must lie in [0, 0.9)");
  detail::SwitchSimulator sim(cfg, pol, duration, seed, opts);
  return sim.run();
}

/// Runs n_reps independent replications on substreams of base_seed (in
/// parallel) and aggregates them: point estimates are averaged and the CIs
/// are Student-t intervals across replications.  Counters are summed.
/// Traces are disabled here; run simulate() directly to record one.
inline SimulationEstimate replicate(const SwitchConfig& cfg, const PolicyParams& pol,
                                    double duration, int n_reps,
                                    std::uint64_t base_seed, SimOptions opts = {}) {
  validate_config(cfg, pol);
  if (n_reps < 2) throw ValidationError("at least 2 replications required");
  opts.trace = nullptr;

  std::vector<std::future<SimulationEstimate>> futures;
  futures.reserve(n_reps);
  for (int r = 0; r < n_reps; ++r) {
    const std::uint64_t seed = detail::stream_seed(base_seed, static_cast<std::uint64_t>(r));
    futures.emplace_back(std::async(std::launch::async, [=]() {
      return simulate(cfg, pol, duration, seed, opts);
    }));
  }
  std::vector<SimulationEstimate> reps;
  reps.reserve(n_reps);
  for (auto& f : futures) reps.push_back(f.get());

  SimulationEstimate agg;
  agg.seed = base_seed;
  agg.duration = duration;

  const double tq = detail::student_t_975(n_reps - 1);
  auto mean_ci = [&](auto proj, double& mean_out, double& ci_out) {
    double mean = 0.0;
    for (const auto& r : reps) mean += proj(r);
    mean /= n_reps;
    double var = 0.0;
    for (const auto& r : reps) {
      const double d = proj(r) - mean;
      var += d * d;
    }
    var /= (n_reps - 1);
    mean_out = mean;
    ci_out = tq * std::sqrt(var / n_reps);
  };

  mean_ci([](const SimulationEstimate& r) { return r.c2_hat; }, agg.c2_hat, agg.ci2);
  mean_ci([](const SimulationEstimate& r) { return r.c3_hat; }, agg.c3_hat, agg.ci3);

  const std::size_t ns = reps.front().occupancy.size();
  agg.occupancy.resize(ns);
  agg.occupancy_ci.resize(ns);
  for (std::size_t s = 0; s < ns; ++s)
    mean_ci([s](const SimulationEstimate& r) { return r.occupancy[s]; },
            agg.occupancy[s], agg.occupancy_ci[s]);

  for (const auto& r : reps) {
    agg.counters.generated += r.counters.generated;
    agg.counters.bsm += r.counters.bsm;
    agg.counters.ghz += r.counters.ghz;
    agg.counters.dropped += r.counters.dropped;
    agg.counters.decohered += r.counters.decohered;
    agg.counters.stored_at_end += r.counters.stored_at_end;
    agg.total_events += r.total_events;
  }
  return agg;
}

}  // namespace entswitch::sim
