#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rfls/delay.hpp"
#include "rfls/errors.hpp"
#include "rfls/numkernel.hpp"

using rfls::DelayRealization;

namespace {
constexpr double kDelta = 3.1e-6;
}

TEST(Pade, CoefficientsMatchClosedFormForEveryOrder) {
  for (int n = 1; n <= rfls::kMaxPadeOrder; ++n) {
    const auto got = rfls::pade_coefficients(n, kDelta);
    const auto want = rfls::oracle::pade_coefficients(n, kDelta);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_NEAR(got[k] / want[k], 1.0, 1e-12) << "order " << n << " k " << k;
    }
  }
}

TEST(Pade, SecondOrderDenominator) {
  const auto d = rfls::pade_delay(2, kDelta);
  EXPECT_NEAR(-d.Fa.trace() / (6.0 / kDelta), 1.0, 1e-12);
  EXPECT_NEAR(d.Fa.determinant() / (12.0 / (kDelta * kDelta)), 1.0, 1e-12);
}

TEST(Pade, DcGainIsOne) {
  for (int n = 1; n <= rfls::kMaxPadeOrder; ++n) {
    for (auto r : {DelayRealization::companion, DelayRealization::balanced}) {
      EXPECT_NEAR(rfls::pade_delay(n, kDelta, 1, r).dc_gain()(0, 0), 1.0, 1e-12);
    }
  }
}

TEST(Pade, AllPassAndAnalyticResponse) {
  const auto d = rfls::pade_delay(2, kDelta);
  const auto c = rfls::oracle::pade_coefficients(2, kDelta);
  for (double w : {1e2, 1e4, 2 * std::numbers::pi * 1e4, 1e6, 1e7}) {
    const auto h = d.frequency_response(w)(0, 0);
    EXPECT_NEAR(std::abs(h), 1.0, 1e-10);
    EXPECT_LE(std::abs(h - rfls::oracle::pade_response(c, w)), 1e-10);
  }
}

TEST(Pade, PhaseLagAtTenKilohertz) {
  const auto d = rfls::pade_delay(2, kDelta);
  const double w = 2 * std::numbers::pi * 1e4;
  const double lag = -std::arg(d.frequency_response(w)(0, 0));
  EXPECT_NEAR(lag / (w * kDelta), 1.0, 1e-2);
}

TEST(Pade, RealizationsShareTheTransferFunction) {
  const auto a = rfls::pade_delay(3, kDelta, 1, DelayRealization::companion);
  const auto b = rfls::pade_delay(3, kDelta, 1, DelayRealization::balanced);
  for (double w : {0.0, 1e5, 1e6}) {
    EXPECT_LE(std::abs(a.frequency_response(w)(0, 0) - b.frequency_response(w)(0, 0)), 1e-12);
  }
  const auto ma = a.markov_parameters(4);
  const auto mb = b.markov_parameters(4);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    EXPECT_NEAR(ma[i](0, 0), mb[i](0, 0), 1e-9 * std::max(1.0, std::abs(ma[i](0, 0))));
  }
}

TEST(Pade, ResponseError) {
  const auto d = rfls::pade_delay(2, kDelta);
  EXPECT_LT(rfls::delay_response_error(d, 2 * std::numbers::pi * 1e4), 1e-3);
  EXPECT_LT(rfls::delay_response_error(d, 1e-3), 1e-12);
  EXPECT_LT(rfls::delay_response_error(rfls::pade_delay(4, kDelta), 1e6),
            rfls::delay_response_error(rfls::pade_delay(2, kDelta), 1e6));
}

TEST(Pade, MultiChannelIsBlockDiagonal) {
  const auto d = rfls::pade_delay(2, kDelta, 2);
  EXPECT_EQ(d.states(), 4);
  EXPECT_EQ(d.channels(), 2);
  const auto h = d.frequency_response(1e5);
  EXPECT_LE(std::abs(h(0, 1)), 1e-14);
  EXPECT_LE(std::abs(h(0, 0) - h(1, 1)), 1e-14);
}

TEST(Pade, Errors) {
  EXPECT_THROW(rfls::pade_delay(2, 0.0), rfls::DomainError);
  EXPECT_THROW(rfls::pade_delay(2, -1.0), rfls::DomainError);
  EXPECT_THROW(rfls::pade_delay(0, kDelta), rfls::ConfigError);
  EXPECT_THROW(rfls::pade_delay(rfls::kMaxPadeOrder + 1, kDelta), rfls::ConfigError);
}

TEST(Pade, IdentityDelay) {
  const auto d = rfls::identity_delay(2);
  EXPECT_EQ(d.states(), 0);
  EXPECT_TRUE(d.Ja.isApprox(rfls::Matrix::Identity(2, 2)));
  EXPECT_NEAR(std::abs(d.frequency_response(1e3)(1, 1) - 1.0), 0.0, 1e-15);
}
