#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "entswitch/analytic.hpp"
#include "entswitch/ctmc.hpp"
#include "entswitch/sim.hpp"
#include "oracles.hpp"

using namespace entswitch;
using namespace entswitch::sim;

namespace {

std::uint64_t conserved_sum(const SimCounters& c) {
  return 2 * c.bsm + 3 * c.ghz + c.dropped + c.decohered + c.stored_at_end;
}

}  // namespace

TEST(Simulate, SameSeedIsBitIdentical) {
  const SwitchConfig cfg{4, 1.5, 0.2, 2};
  const PolicyParams pol{0, 0.6, 0.3};
  const auto a = simulate(cfg, pol, 5000.0, 77);
  const auto b = simulate(cfg, pol, 5000.0, 77);
  EXPECT_TRUE(a == b);
  const auto ra = replicate(cfg, pol, 2000.0, 6, 123);
  const auto rb = replicate(cfg, pol, 2000.0, 6, 123);
  EXPECT_TRUE(ra == rb);  // std::async scheduling must not leak into results
}

TEST(Simulate, DifferentSeedsDiffer) {
  const SwitchConfig cfg{3, 1.0, 0.0, 1};
  const PolicyParams pol{0, 1, 1};
  const auto a = simulate(cfg, pol, 5000.0, 1);
  const auto b = simulate(cfg, pol, 5000.0, 2);
  EXPECT_NE(a.c2_hat, b.c2_hat);
}

TEST(Simulate, EveryQubitIsAccountedFor) {
  int case_no = 0;
  for (int k : {3, 5, 10})
    for (int buffer : {1, 2})
      for (double alpha : {0.0, 0.3})
        for (const PolicyParams pol :
             {PolicyParams{0, 1, 1}, PolicyParams{0, 0.4, 0.7},
              PolicyParams{buffer == 1 ? 0.5 : 0.0, 0.0, 0.2}}) {
          const SwitchConfig cfg{k, 1.0, alpha, buffer};
          const auto est = simulate(cfg, pol, 3000.0, 1000 + case_no++);
          EXPECT_EQ(est.counters.generated, conserved_sum(est.counters))
              << "k=" << k << " B=" << buffer << " alpha=" << alpha;
          EXPECT_GT(est.counters.generated, 0u);
        }
}

TEST(Simulate, ReplicateSumsCountersAcrossSubstreams) {
  const SwitchConfig cfg{5, 1.0, 0.1, 2};
  const PolicyParams pol{0, 0.5, 0.5};
  const int reps = 4;
  const std::uint64_t base = 42;
  const auto agg = replicate(cfg, pol, 1000.0, reps, base);
  SimCounters manual;
  for (int r = 0; r < reps; ++r) {
    const auto one = simulate(
        cfg, pol, 1000.0, sim::detail::stream_seed(base, static_cast<std::uint64_t>(r)));
    manual.generated += one.counters.generated;
    manual.bsm += one.counters.bsm;
    manual.ghz += one.counters.ghz;
    manual.dropped += one.counters.dropped;
    manual.decohered += one.counters.decohered;
    manual.stored_at_end += one.counters.stored_at_end;
  }
  EXPECT_TRUE(agg.counters == manual);
  EXPECT_EQ(agg.counters.generated, conserved_sum(agg.counters));
}

TEST(Simulate, MatchesClosedFormOnLongRun) {
  const SwitchConfig cfg{3, 1.0, 0.0, 1};
  const PolicyParams pol{0, 1, 1};
  const auto est = simulate(cfg, pol, 1e6, 42);
  EXPECT_LE(oracles::rel_diff(est.c2_hat, 12.0 / 17.0), 0.01);
  EXPECT_LE(oracles::rel_diff(est.c3_hat, 6.0 / 17.0), 0.01);
  EXPECT_GT(est.total_events, 1'000'000u);
}

TEST(Simulate, ChainRatesLieInsideReplicationIntervals) {
  struct Case {
    SwitchConfig cfg;
    PolicyParams pol;
  };
  const std::vector<Case> cases = {
      {{3, 1.0, 0.0, 1}, {0.2, 0.5, 0.8}},
      {{5, 1.0, 0.2, 2}, {0, 0.7, 0.4}},
      {{4, 2.0, 0.5, 2}, {0, 0.3, 0.9}},
  };
  for (const auto& c : cases) {
    const auto truth = ctmc::solve_capacities(c.cfg, c.pol);
    const auto est = replicate(c.cfg, c.pol, 2e5, 8, 7);
    EXPECT_LE(std::fabs(est.c2_hat - truth.c2), est.ci2)
        << "k=" << c.cfg.k << " alpha=" << c.cfg.alpha;
    if (truth.c3 > 0)
      EXPECT_LE(std::fabs(est.c3_hat - truth.c3), est.ci3)
          << "k=" << c.cfg.k << " alpha=" << c.cfg.alpha;
    EXPECT_GT(est.ci2, 0.0);
  }
}

TEST(Simulate, OccupancyTracksStationaryDistribution) {
  for (int buffer : {1, 2}) {
    const SwitchConfig cfg{4, 1.0, 0.15, buffer};
    const PolicyParams pol{0, 0.5, 0.6};
    const auto dist = ctmc::solve_stationary(ctmc::build_chain(cfg, pol));
    const auto est = replicate(cfg, pol, 1e5, 6, 11);
    ASSERT_EQ(est.occupancy.size(), dist.pi.size());
    double total = 0.0;
    for (std::size_t i = 0; i < dist.pi.size(); ++i) {
      EXPECT_LE(std::fabs(est.occupancy[i] - dist.pi[i]),
                std::max(3.0 * est.occupancy_ci[i], 1e-3))
          << "B=" << buffer << " state " << i;
      total += est.occupancy[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Simulate, IntervalsCoverTruthAtNominalRate) {
  // 95% intervals should cover the exact rate in the large majority of
  // independent runs; with 20 runs, P(coverage < 16) is about 0.3%.
  const SwitchConfig cfg{3, 1.0, 0.0, 1};
  const PolicyParams pol{0, 1, 1};
  const double truth_c2 = 12.0 / 17.0;
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto est = simulate(cfg, pol, 5e4, 900 + seed);
    if (std::fabs(est.c2_hat - truth_c2) <= est.ci2) ++covered;
  }
  EXPECT_GE(covered, 16) << "coverage " << covered << "/20";
}

TEST(Simulate, RejectsBadArguments) {
  const SwitchConfig cfg{3, 1.0, 0.0, 1};
  const PolicyParams pol{0, 1, 1};
  EXPECT_THROW(simulate(cfg, pol, 0.0, 1), ValidationError);
  EXPECT_THROW(simulate(cfg, pol, -5.0, 1), ValidationError);
  SimOptions one_batch;
  one_batch.batches = 1;
  EXPECT_THROW(simulate(cfg, pol, 100.0, 1, one_batch), ValidationError);
  SimOptions deep_warmup;
  deep_warmup.warmup_fraction = 0.95;
  EXPECT_THROW(simulate(cfg, pol, 100.0, 1, deep_warmup), ValidationError);
  EXPECT_THROW(replicate(cfg, pol, 100.0, 1, 1), ValidationError);
  EXPECT_THROW(simulate({3, 1.0, 0.0, 2}, {0.5, 1, 1}, 100.0, 1), ValidationError);
}

TEST(Simulate, PointEstimateIndependentOfBatchCount) {
  // batching only affects the interval widths, not the draws or the rates
  const SwitchConfig cfg{4, 1.0, 0.1, 2};
  const PolicyParams pol{0, 0.5, 0.5};
  SimOptions five;
  five.batches = 5;
  const auto a = simulate(cfg, pol, 10000.0, 5, five);
  const auto b = simulate(cfg, pol, 10000.0, 5);
  EXPECT_EQ(a.c2_hat, b.c2_hat);
  EXPECT_EQ(a.c3_hat, b.c3_hat);
  EXPECT_TRUE(a.counters == b.counters);
  EXPECT_NE(a.ci2, b.ci2);
}

TEST(Simulate, TraceRecordsWellFormedEvents) {
  std::ostringstream log;
  SimOptions opts;
  opts.trace = &log;
  const SwitchConfig cfg{3, 1.0, 0.4, 1};
  const auto est = simulate(cfg, {0.3, 0.5, 0.5}, 50.0, 9, opts);

  std::istringstream in(log.str());
  std::string line;
  double prev_t = 0.0;
  std::uint64_t gen_lines = 0, decoh_lines = 0;
  while (std::getline(in, line)) {
    char type[16], action[16];
    double t;
    int link;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%15[^,],%d,%15s", &t, type, &link, action), 4)
        << line;
    EXPECT_GE(t, prev_t);
    prev_t = t;
    EXPECT_GE(link, 0);
    EXPECT_LT(link, cfg.k);
    const std::string ty = type, ac = action;
    EXPECT_TRUE(ty == "gen" || ty == "decoh") << line;
    EXPECT_TRUE(ac == "store" || ac == "drop" || ac == "bsm" || ac == "ghz" ||
                ac == "decohere")
        << line;
    if (ty == "gen") ++gen_lines;
    if (ty == "decoh") {
      EXPECT_EQ(ac, "decohere");
      ++decoh_lines;
    }
  }
  EXPECT_EQ(gen_lines, est.counters.generated);
  EXPECT_EQ(decoh_lines, est.counters.decohered);
  EXPECT_GT(decoh_lines, 0u);
}
