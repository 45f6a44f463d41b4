#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sfe_oracle.hpp"
#include "sfelab/analytic_sfe.hpp"
#include "sfelab/error.hpp"

using namespace sfelab;
using namespace sfelab::sfe;
using market::CostLadder;
using market::TechnologyPortfolio;

namespace {

const CostLadder kLadder{0.0, 1.0, 2.0};

}  // namespace

using oracle::binding_slope;
using oracle::limits;
using oracle::random_duopoly;

TEST(SolveDuopoly, AbundanceCase) {
  const auto s = solve_duopoly({9, 0, 0}, {0, 4, 0}, kLadder);
  EXPECT_EQ(s.regime, Regime::abundance);
  EXPECT_NEAR(s.c1, 4.0, 1e-12);
  EXPECT_NEAR(sfe_clearing_price(s, 6.0), 1.25, 1e-10);
}

TEST(SolveDuopoly, ScarcityCase) {
  const auto s = solve_duopoly({5, 0, 0}, {0, 4, 0}, kLadder);
  EXPECT_EQ(s.regime, Regime::scarcity);
  EXPECT_NEAR(s.c1, 2.5, 1e-12);
  EXPECT_NEAR(s.p_hat, 2.0, 1e-12);
  EXPECT_NEAR(sfe_clearing_price(s, 6.0), 1.7, 1e-10);
}

TEST(SolveDuopoly, ScarcityAfterTransferMatchesAlgebraicRoot) {
  // (c/2)(2 + c/(5 - c)) + 0.5(5 - c) = 5.5 solved independently.
  const double root = oracle::bisect(
      [](double c) { return 0.5 * c * (2.0 + c / (5.0 - c)) + 0.5 * (5.0 - c) - 5.5; }, 0.1, 4.9);
  EXPECT_NEAR(root, 30.0 / 11.0, 1e-12);
  const auto s = solve_duopoly({5, 0.5, 0}, {0, 3.5, 0}, kLadder);
  EXPECT_EQ(s.regime, Regime::scarcity);
  EXPECT_NEAR(s.c1, root, 1e-11);
  EXPECT_NEAR(s.p_hat, 11.0 / 6.0, 1e-11);
  EXPECT_NEAR(sfe_clearing_price(s, 6.0), 1.6, 1e-10);
}

TEST(SolveDuopoly, CoefficientsSatisfyDefinitions) {
  const auto s = solve_duopoly({5, 0.5, 0}, {0, 3.5, 0}, kLadder);
  const double dl = 1.0;
  EXPECT_NEAR(s.alpha, 5.0, 1e-15);
  EXPECT_NEAR(s.c4, 0.5 * dl * dl * (s.alpha - s.c1), 1e-9);
  EXPECT_NEAR(s.c3, 0.5 * s.c1 * (1 + s.alpha / (s.alpha - s.c1)), 1e-9);
  EXPECT_NEAR(s.c3, 48.0 / 11.0, 1e-10);
  EXPECT_NEAR(s.c4, 25.0 / 22.0, 1e-10);
}

TEST(SolveDuopoly, TooMuchLeaderHighCapacityInScarcity) {
  try {
    // A full unit moved out of the follower's four (the transfer delta = 1).
    solve_duopoly({5, 1.0, 0}, {0, 3, 0}, kLadder);
    FAIL() << "expected a regime violation";
  } catch (const RegimeViolationError& e) {
    EXPECT_GT(e.threshold, 0.0);
    EXPECT_LT(e.threshold, 1.0);
  }
}

TEST(SolveDuopoly, KnifeEdgeUsesAbundance) {
  // ratio = 2, so K1^l = 8 = 2 * K2^h sits on the boundary.
  const auto s = solve_duopoly({8, 0, 0}, {0, 4, 0}, kLadder);
  EXPECT_EQ(s.regime, Regime::abundance);
  EXPECT_TRUE(s.knife_edge);
  EXPECT_NEAR(s.c1, 4.0, 1e-12);
}

TEST(SolveDuopoly, RejectsInadmissiblePortfolios) {
  EXPECT_THROW(solve_duopoly({0, 1, 0}, {0, 4, 0}, kLadder), ValidationError);
  EXPECT_THROW(solve_duopoly({5, 0, 1}, {0, 4, 0}, kLadder), ValidationError);
  EXPECT_THROW(solve_duopoly({5, 0, 0}, {1, 4, 0}, kLadder), ValidationError);
  EXPECT_THROW(solve_duopoly({5, 0, 0}, {0, 4, 0}, CostLadder{0, 2, 2}), ValidationError);
}

TEST(EvalSupply, Examples) {
  const auto ab = solve_duopoly({9, 0, 0}, {0, 4, 0}, kLadder);
  EXPECT_NEAR(eval_sfe_supply(ab, 1, 1.25), 5.0, 1e-12);
  EXPECT_EQ(eval_sfe_supply(ab, 2, 0.9), 0.0);
  const auto post = solve_duopoly({5, 0.5, 0}, {0, 3.5, 0}, kLadder);
  EXPECT_NEAR(eval_sfe_supply(post, 2, 1.6), 30.0 / 11.0 * 0.6, 1e-10);
  EXPECT_EQ(eval_sfe_supply(post, 1, 2.0), 5.5);
  EXPECT_EQ(eval_sfe_supply(post, 2, 2.5), 3.5);
}

TEST(ClearingPrice, ScarcityBaseline) {
  EXPECT_NEAR(sfe_clearing_price(solve_duopoly({5, 0, 0}, {0, 4, 0}, kLadder), 6.0), 1.7, 1e-10);
}

TEST(ClearingPrice, FringeClearsExcessDemand) {
  EXPECT_EQ(sfe_clearing_price(solve_duopoly({9, 0, 0}, {0, 4, 0}, kLadder), 20.0), 2.0);
}

TEST(ClearingPrice, InvertsAggregateSupply) {
  // Supplies jump to capacity at the fringe cost, so demand inside the jump
  // clears there.
  const auto s = solve_duopoly({5, 0.5, 0}, {0, 3.5, 0}, kLadder);
  const double below_fringe = aggregate_supply(s, kLadder.c_fringe - 1e-12);
  for (double d = 3.0; d < 8.95; d += 0.1) {
    const double p = sfe_clearing_price(s, d);
    if (d < below_fringe) {
      EXPECT_NEAR(aggregate_supply(s, p), d, 1e-9) << d;
    } else {
      EXPECT_EQ(p, kLadder.c_fringe) << d;
      EXPECT_GE(aggregate_supply(s, p), d);
    }
  }
}

TEST(TransferSweep, AbundancePricesRise) {
  const std::vector<double> deltas{0.0, 0.5};
  const auto pts = transfer_sweep({9, 0, 0}, {0, 4, 0}, kLadder, deltas, 6.0);
  EXPECT_NEAR(pts[0].price, 1.25, 1e-10);
  EXPECT_NEAR(pts[1].price, 19.0 / 14.0, 1e-10);
}

TEST(TransferSweep, ScarcityPricesFall) {
  const std::vector<double> deltas{0.0, 0.5};
  const auto pts = transfer_sweep({5, 0, 0}, {0, 4, 0}, kLadder, deltas, 6.0);
  EXPECT_NEAR(pts[0].price, 1.7, 1e-9);
  EXPECT_NEAR(pts[1].price, 1.6, 1e-9);
}

TEST(TransferSweep, ZeroDeltaMatchesBaseline) {
  const std::vector<double> deltas{0.0};
  const auto pts = transfer_sweep({5, 0, 0}, {0, 4, 0}, kLadder, deltas, 6.0);
  const auto s = solve_duopoly({5, 0, 0}, {0, 4, 0}, kLadder);
  EXPECT_EQ(pts[0].c1, s.c1);
  EXPECT_EQ(pts[0].price, sfe_clearing_price(s, 6.0));
}

TEST(TransferSweep, RejectsDeltaAboveFollowerCapacity) {
  const std::vector<double> deltas{5.0};
  EXPECT_THROW(transfer_sweep({9, 0, 0}, {0, 4, 0}, kLadder, deltas, 6.0), ValidationError);
}

TEST(TransferSweep, StrictlyMonotoneWithRegimeSign) {
  std::vector<double> ab_deltas, sc_deltas;
  for (int i = 0; i <= 10; ++i) ab_deltas.push_back(0.3 * i);
  for (int i = 0; i <= 10; ++i) sc_deltas.push_back(0.05 * i);
  const auto ab = transfer_sweep({9, 0, 0}, {0, 4, 0}, kLadder, ab_deltas, 6.0);
  const auto sc = transfer_sweep({5, 0, 0}, {0, 4, 0}, kLadder, sc_deltas, 6.0);
  // Strict until the price reaches the fringe cost, which caps it.
  for (std::size_t i = 1; i < ab.size(); ++i) {
    if (ab[i - 1].price < kLadder.c_fringe) {
      EXPECT_TRUE(ab[i].price > ab[i - 1].price || ab[i].price == kLadder.c_fringe) << i;
    } else {
      EXPECT_EQ(ab[i].price, kLadder.c_fringe) << i;
    }
  }
  EXPECT_LT(ab[1].price, kLadder.c_fringe);
  for (std::size_t i = 1; i < sc.size(); ++i) EXPECT_LT(sc[i].price, sc[i - 1].price);
}

TEST(Symmetric, HandCase) {
  const auto s = solve_symmetric(3, 2, kLadder, 0.0);
  EXPECT_NEAR(s.low_slope, 15.0 / 8.0, 1e-12);
  EXPECT_NEAR(s.p_hat, 1.6, 1e-12);
  EXPECT_NEAR(s.clearing_price(5.0), 4.0 / 3.0, 1e-10);
  EXPECT_NEAR(s.low_slope * (s.p_hat - kLadder.c_low), 3.0, 1e-12);
}

TEST(Symmetric, DeltaAboveHighCapacityRejected) {
  EXPECT_THROW(solve_symmetric(3, 2, kLadder, 2.5), ValidationError);
}

TEST(Symmetric, ContinuousAtSwitchingPrice) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const CostLadder L{u(gen), 0, 0};
    CostLadder ladder{L.c_low, L.c_low + 0.1 + u(gen), 0};
    ladder.c_fringe = ladder.c_high + 0.1 + u(gen);
    const double kl = 0.1 + 5 * u(gen), kh = 5 * u(gen);
    const auto s = solve_symmetric(kl, kh, ladder, kh * u(gen));
    EXPECT_NEAR(s.low_slope * (s.p_hat - ladder.c_low), s.high_slope * (s.p_hat - ladder.c_high), 1e-9);
  }
}

TEST(Markup, AbundanceEquilibriumHoldsForBothFirms) {
  const auto s = solve_duopoly({9, 0, 0}, {0, 4, 0}, kLadder);
  const auto r = verify_markup(s, 1.25, 6.0);
  EXPECT_NEAR(r[0], 0.0, 1e-12);
  EXPECT_NEAR(r[1], 0.0, 1e-12);
}

TEST(Markup, SwitchingPriceRejected) {
  const auto s = solve_duopoly({5, 0.5, 0}, {0, 3.5, 0}, kLadder);
  EXPECT_THROW(verify_markup(s, s.p_hat, aggregate_supply(s, s.p_hat)), NonDifferentiablePointError);
  EXPECT_THROW(verify_markup(s, 1.0, aggregate_supply(s, 1.0)), NonDifferentiablePointError);
}

TEST(Markup, DemandMustClear) {
  const auto s = solve_duopoly({9, 0, 0}, {0, 4, 0}, kLadder);
  EXPECT_THROW(verify_markup(s, 1.25, 7.0), ValidationError);
}

TEST(Markup, WrongMarginalCostBreaksIdentity) {
  // Every slope of the linear family satisfies the identity, so the control
  // exhausts the leader's low-cost capacity below its dispatch instead.
  auto s = solve_duopoly({9, 0, 0}, {0, 4, 0}, kLadder);
  s.k1.k_low = 4.0;
  const double p = 1.25;
  const auto r = verify_markup(s, p, aggregate_supply(s, p));
  EXPECT_GT(std::abs(r[0]) + std::abs(r[1]), 1e-3);
}

TEST(FocIdentity, HoldsOnInteriorGrid) {
  for (const auto& [k1, k2] : {std::pair<TechnologyPortfolio, TechnologyPortfolio>{{9, 0, 0}, {0, 4, 0}},
                               {{5, 0, 0}, {0, 4, 0}},
                               {{5, 0.5, 0}, {0, 3.5, 0}}}) {
    const auto s = solve_duopoly(k1, k2, kLadder);
    for (int i = 1; i <= 100; ++i) {
      const double p = kLadder.c_high + (kLadder.c_fringe - kLadder.c_high) * i / 101.0;
      if (std::abs(p - s.p_hat) < 1e-6) continue;
      const double s1 = eval_sfe_supply(s, 1, p), s2 = eval_sfe_supply(s, 2, p);
      const double mc1 = s1 < k1.k_low ? kLadder.c_low : kLadder.c_high;
      EXPECT_NEAR((p - mc1) * eval_sfe_slope(s, 2, p), s1, 1e-9);
      EXPECT_NEAR((p - kLadder.c_high) * eval_sfe_slope(s, 1, p), s2, 1e-9);
    }
  }
}

TEST(EquilibriumShape, RandomAdmissibleDuopolies) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto d = random_duopoly(gen);
    const auto s = solve_duopoly(d.k1, d.k2, d.ladder);
    const double k1_total = d.k1.k_low + d.k1.k_high;
    // Independent root: the smaller of the two binding slopes.
    const double c_a = binding_slope(d.ladder, d.k1.k_low, 0, k1_total);
    const double c_b = binding_slope(d.ladder, d.k1.k_low, 1, d.k2.k_high);
    EXPECT_NEAR(s.c1, std::min(c_a, c_b), 1e-10 * std::max(1.0, s.c1));
    const bool b1 = std::abs(s.limit1 - k1_total) <= 1e-8 * k1_total;
    const bool b2 = std::abs(s.limit2 - d.k2.k_high) <= 1e-8 * d.k2.k_high;
    EXPECT_TRUE(b1 || b2);
    if (!s.knife_edge) EXPECT_NE(b1, b2);
    EXPECT_EQ(s.regime == Regime::abundance, b2);
  }
}
