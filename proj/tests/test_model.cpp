#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "entswitch/model.hpp"

using namespace entswitch;

TEST(ValidateConfig, AcceptsBoundaryValues) {
  const SwitchConfig cfg{3, 1.0, 0.0, 1};
  const PolicyParams pol{0.0, 1.0, 1.0};
  const auto [c, p] = validate_config(cfg, pol);
  EXPECT_EQ(c, cfg);
  EXPECT_EQ(p, pol);
}

TEST(ValidateConfig, IsIdempotent) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    SwitchConfig cfg{3 + static_cast<int>(rng() % 100), 0.01 + u(rng) * 10,
                     u(rng) * 2, 1};
    PolicyParams pol{u(rng), u(rng), u(rng)};
    auto [c1, p1] = validate_config(cfg, pol);
    auto [c2, p2] = validate_config(c1, p1);
    EXPECT_EQ(c1, c2);
    EXPECT_EQ(p1, p2);
  }
}

TEST(ValidateConfig, RejectsSmallK) {
  EXPECT_THROW(validate_config({2, 1.0, 0.0, 1}, {}), ValidationError);
  try {
    validate_config({2, 1.0, 0.0, 1}, {});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("k >= 3"), std::string::npos);
  }
}

TEST(ValidateConfig, RejectsHugeK) {
  EXPECT_THROW(validate_config({kMaxLinks + 1, 1.0, 0.0, 1}, {}), ValidationError);
  EXPECT_NO_THROW(validate_config({kMaxLinks, 1.0, 0.0, 1}, {0, 1, 1}));
}

TEST(ValidateConfig, RejectsBadRates) {
  EXPECT_THROW(validate_config({3, 0.0, 0.0, 1}, {}), ValidationError);
  EXPECT_THROW(validate_config({3, -1.0, 0.0, 1}, {}), ValidationError);
  EXPECT_THROW(validate_config({3, std::nan(""), 0.0, 1}, {}), ValidationError);
  EXPECT_THROW(validate_config({3, 1.0, -0.1, 1}, {}), ValidationError);
  EXPECT_THROW(validate_config({3, 1.0, std::nan(""), 1}, {}), ValidationError);
}

TEST(ValidateConfig, RejectsBadBufferSize) {
  EXPECT_THROW(validate_config({3, 1.0, 0.0, 0}, {}), ValidationError);
  EXPECT_THROW(validate_config({3, 1.0, 0.0, 3}, {}), ValidationError);
}

TEST(ValidateConfig, RejectsOutOfRangeProbabilities) {
  EXPECT_THROW(validate_config({3, 1.0, 0.0, 1}, {-0.1, 1, 1}), ValidationError);
  EXPECT_THROW(validate_config({3, 1.0, 0.0, 1}, {0, 1.5, 1}), ValidationError);
  EXPECT_THROW(validate_config({3, 1.0, 0.0, 1}, {0, 1, std::nan("")}), ValidationError);
  try {
    validate_config({3, 1.0, 0.0, 1}, {0, 1.5, 1});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("r2"), std::string::npos);
  }
}

TEST(ValidateConfig, RejectsR1WithBufferTwo) {
  EXPECT_THROW(validate_config({3, 1.0, 0.0, 2}, {0.5, 1, 1}), ValidationError);
  EXPECT_NO_THROW(validate_config({3, 1.0, 0.0, 2}, {0.0, 1, 1}));
  try {
    validate_config({3, 1.0, 0.0, 2}, {0.5, 1, 1});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("r1"), std::string::npos);
  }
}

TEST(RateFromSlot, KnownValues) {
  EXPECT_DOUBLE_EQ(rate_from_slot(1.0, 1.0), 1.0);
  EXPECT_NEAR(rate_from_slot(0.001, 0.01), 10.0, 10.0 * 1e-12);
  EXPECT_DOUBLE_EQ(rate_from_slot(2.0, 0.5), 0.25);
}

TEST(RateFromSlot, RejectsBadInputs) {
  EXPECT_THROW(rate_from_slot(0.0, 0.5), ValidationError);
  EXPECT_THROW(rate_from_slot(-1.0, 0.5), ValidationError);
  EXPECT_THROW(rate_from_slot(1.0, 0.0), ValidationError);
  EXPECT_THROW(rate_from_slot(1.0, 1.1), ValidationError);
  EXPECT_THROW(rate_from_slot(1.0, -0.2), ValidationError);
}

TEST(RateFromSlot, InverseProperty) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double tau = std::exp(u(rng) * 14.0 - 7.0);  // ~1e-3 .. 1e3
    const double p = std::nextafter(u(rng), 2.0);      // (0, 1]
    const double mu = rate_from_slot(tau, p);
    EXPECT_NEAR(mu * tau, p, std::fabs(p) * 1e-14);
  }
}
