#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "moneystat/dynamics.hpp"
#include "moneystat/ensemble.hpp"
#include "moneystat/transform.hpp"

using namespace moneystat;

namespace {

const double kE = std::exp(1.0);

ModelSpec gas(std::int64_t n) { return ModelSpec::credit_market(n, 1.0); }

}  // namespace

TEST(WorkAlongPath, Examples) {
  ProcessPath same{gas(100), {Segment::isothermal(2.0, 1.0, 1.0)}};
  EXPECT_EQ(work_along_path(same).quadrature, 0.0);

  ProcessPath iso{gas(100), {Segment::isothermal(2.0, 1.0, kE)}};
  const auto w = work_along_path(iso);
  EXPECT_NEAR(w.closed_form, 200.0, 1e-12);
  EXPECT_NEAR(w.quadrature, 200.0, 1e-8 * 200.0);

  ProcessPath isochoric{gas(100), {Segment::isochoric(3.0, 1.0, 5.0)}};
  EXPECT_EQ(work_along_path(isochoric).quadrature, 0.0);
  EXPECT_NEAR(credit_along_path(isochoric).quadrature, 400.0, 1e-6);
}

TEST(CreditAlongPath, Examples) {
  ProcessPath iso{gas(1), {Segment::isothermal(4.0, 1.0, kE)}};
  const auto c = credit_along_path(iso);
  EXPECT_NEAR(c.closed_form, 4.0, 1e-12);
  EXPECT_NEAR(c.quadrature, 4.0, 1e-8);

  ProcessPath ad{gas(1), {Segment::isothermal(4.0, 1.0, 1.0)}};
  ad.adiabatic_to(2.0);
  ad.segments.erase(ad.segments.begin());
  EXPECT_EQ(credit_along_path(ad).quadrature, 0.0);

  ProcessPath fe{gas(1), {Segment::free_expansion(4.0, 1.0, 2.0)}};
  EXPECT_THROW(credit_along_path(fe), ModelError);
}

TEST(CreditAlongPath, ClosedCycleCreditEqualsWork) {
  const auto path = carnot_path(gas(3), 5.0, 1.5, 2.0, 7.0);
  const double c = credit_along_path(path).quadrature;
  const double l = work_along_path(path).quadrature;
  EXPECT_NEAR(c, l, 1e-8 * std::abs(l));
}

TEST(AdiabatSolve, Examples) {
  const auto r = adiabat_solve(gas(1), 4.0, 1.0, 2.0);
  EXPECT_NEAR(r.t_end, 2.0, 1e-12);
  EXPECT_NEAR(r.entropy_end, r.entropy_start, 1e-10 * std::abs(r.entropy_start));
  EXPECT_NEAR(r.delta_money, -2.0, 1e-12);
  EXPECT_NEAR(r.work, 2.0, 1e-8);
  EXPECT_LT(r.energy_residual, 1e-8);

  const auto id = adiabat_solve(gas(1), 4.0, 1.0, 1.0);
  EXPECT_EQ(id.t_end, 4.0);
  EXPECT_THROW(adiabat_solve(gas(1), 4.0, 1.0, 0.0), ModelError);
  EXPECT_THROW(adiabat_solve(ModelSpec::combined(1, 1.0), 4.0, 1.0, 2.0), ModelError);
}

TEST(AdiabatSolve, EntropyPreservedAcrossVolumeModels) {
  for (const auto& spec : {ModelSpec::cash_only(5, 1.0), ModelSpec::overdraft_model(5, 2.0), gas(5)}) {
    const auto r = adiabat_solve(spec, 3.0, 2.0, 11.0);
    EXPECT_LT(std::abs(r.entropy_end - r.entropy_start) / std::abs(r.entropy_start), 1e-10);
  }
}

TEST(CarnotCycle, ReferenceCycle) {
  const auto c = carnot_cycle(gas(1), 4.0, 2.0, 1.0, kE);
  EXPECT_NEAR(c.delta_s_hot, 1.0, 1e-9);
  EXPECT_NEAR(c.work_l, 2.0, 1e-9);
  EXPECT_NEAR(c.credit_in_ch, 4.0, 1e-9);
  EXPECT_NEAR(c.credit_out_cc, -2.0, 1e-9);
  EXPECT_NEAR(c.eta, 0.5, 1e-9);
  EXPECT_NEAR(c.carnot_eta, 0.5, 1e-12);
}

TEST(CarnotCycle, ScalingAndDegenerateLimit) {
  const auto a = carnot_cycle(gas(1), 4.0, 2.0, 1.0, kE);
  const auto b = carnot_cycle(gas(2), 4.0, 2.0, 1.0, kE);
  EXPECT_NEAR(b.work_l, 2.0 * a.work_l, 1e-9);
  EXPECT_NEAR(b.credit_in_ch, 2.0 * a.credit_in_ch, 1e-9);
  EXPECT_NEAR(b.eta, a.eta, 1e-12);
  const auto near = carnot_cycle(gas(1), 4.0, 4.0 - 1e-6, 1.0, kE);
  EXPECT_LT(near.eta, 1e-6);
  EXPECT_LT(near.work_l, 1e-5);
  EXPECT_THROW(carnot_cycle(gas(1), 2.0, 4.0, 1.0, kE), ModelError);
  EXPECT_THROW(carnot_cycle(gas(1), 4.0, 2.0, 3.0, 2.0), ModelError);
}

TEST(CarnotCycle, EfficiencyOnGrid) {
  for (double th : {2.0, 5.0, 40.0}) {
    for (double frac : {0.1, 0.5, 0.9}) {
      for (double ratio : {1.1, 3.0, 20.0}) {
        const auto c = carnot_cycle(ModelSpec::cash_only(3, 1.0), th, frac * th, 0.7, 0.7 * ratio);
        EXPECT_NEAR(c.eta, 1.0 - frac, 1e-9);
      }
    }
  }
}

TEST(CarnotCycle, FreeExpansionLegFallsBelowCarnot) {
  const auto path = carnot_path_with_free_expansion(gas(1), 4.0, 2.0, 1.0, 1.5, kE);
  const auto c = analyze_cycle(path);
  EXPECT_LT(c.eta, c.carnot_eta);
  EXPECT_GT(c.eta, 0.0);
  const auto v = policy_bound_check(c.credit_out_cc, c.credit_in_ch, 2.0, 4.0);
  EXPECT_TRUE(v.temperature_bound);
  EXPECT_GT(v.credit_ratio, v.temperature_ratio);
}

TEST(PolicyBound, Examples) {
  EXPECT_TRUE(policy_bound_check(-0.6, 1.0, 1.0, 2.0).temperature_bound);
  EXPECT_FALSE(policy_bound_check(-0.4, 1.0, 1.0, 2.0).temperature_bound);
  const auto c = carnot_cycle(gas(1), 4.0, 2.0, 1.0, kE);
  const auto v = policy_bound_check(c.credit_out_cc, c.credit_in_ch, 2.0, 4.0, 2.0, 4.0);
  EXPECT_TRUE(v.temperature_bound);
  EXPECT_NEAR(v.credit_ratio, v.temperature_ratio, 1e-9);
  EXPECT_TRUE(*v.money_bound);
  EXPECT_THROW(policy_bound_check(1.0, 0.0, 1.0, 2.0), ModelError);
}

TEST(FractionalReserve, Examples) {
  const auto s = fractional_reserve(0.2, 100.0, 50.0);
  EXPECT_DOUBLE_EQ(s.money, 400.0);
  EXPECT_DOUBLE_EQ(s.temperature, 8.0);
  const double v2 = isothermal_base(0.2, 100.0, 0.1);
  EXPECT_NEAR(v2, 400.0 / 9.0, 1e-12);
  EXPECT_NEAR(v2 - 100.0, v2 / 0.1 - 100.0 / 0.2, 1e-9);
  EXPECT_NEAR(fractional_reserve(0.1, v2, 50.0).temperature, 8.0, 1e-12);
  EXPECT_EQ(isothermal_base(0.2, 100.0, 0.2), 100.0);
  EXPECT_THROW(fractional_reserve(1.0, 1.0, 1.0), ModelError);
  EXPECT_THROW(isothermal_base(0.2, 1.0, 0.0), ModelError);
}

TEST(GibbsDuhem, ZeroIncrementsAndModelsWithoutVolume) {
  const auto z = gibbs_duhem_residual(gas(100), 2.0, 1000.0, 100.0, 0.0, 0.0, 0.0);
  EXPECT_EQ(z.gibbs_duhem, 0.0);
  const auto comb = gibbs_duhem_residual(ModelSpec::combined(10, 2.0), 3.0, 0.0, 10.0, 3e-5, 0.0, 1e-4);
  EXPECT_LT(comb.gibbs_duhem_relative, 1e-6);
  EXPECT_LT(comb.first_principle_relative, 1e-6);
  EXPECT_THROW(gibbs_duhem_residual(ModelSpec::multi_account({1, 2}, {0, 1, 1}), 1.0, 1.0, 2.0, 1e-5, 0, 0),
               ModelError);
}

TEST(GibbsDuhem, FirstPrincipleHoldsForTheCreditGas) {
  const auto r = gibbs_duhem_residual(gas(100), 2.0, 1000.0, 100.0, 2e-5, 1e-2, 1e-3);
  EXPECT_LT(r.first_principle_relative, 1e-6);
}

TEST(GibbsDuhem, VolumeModelsCarryMinusDm) {
  // With V entering as V^N, S dT - V dP + N dmu = -dm rather than 0.
  const double t = 2.0, v = 1000.0, n = 100.0, dt = 2e-5;
  const auto r = gibbs_duhem_residual(gas(100), t, v, n, dt, 0.0, 0.0);
  EXPECT_NEAR(r.gibbs_duhem, -n * dt, 1e-9);
}

TEST(SpontaneousExpansion, Examples) {
  const auto before = init_population(ModelSpec::cash_only(10), InitPolicy::UniformRandom, 30.0, 4);
  const auto after = free_expansion(before, kE);
  const auto a = spontaneous_expansion_audit(before, after);
  EXPECT_EQ(a.delta_money, 0.0);
  EXPECT_EQ(a.delta_temperature, 0.0);
  EXPECT_NEAR(a.delta_entropy, 10.0, 1e-9);
  EXPECT_GT(a.delta_entropy, a.clausius_integral);
  EXPECT_TRUE(a.ok);
  const auto same = spontaneous_expansion_audit(before, free_expansion(before, 1.0));
  EXPECT_EQ(same.delta_entropy, 0.0);
  EXPECT_TRUE(same.ok);
}

TEST(PathTsv, Layout) {
  std::ostringstream out;
  write_path_tsv(carnot_path(gas(1), 4.0, 2.0, 1.0, kE), out, 4);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "V\tT\tP\tS");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 16);
}

TEST(ProcessPath, ValidationCatchesGaps) {
  ProcessPath gap{gas(1), {Segment::isothermal(2.0, 1.0, 2.0), Segment::isothermal(2.0, 3.0, 4.0)}};
  EXPECT_THROW(validate_path(gap), ModelError);
  ProcessPath bad{gas(1), {Segment::isothermal(2.0, -1.0, 2.0)}};
  EXPECT_THROW(validate_path(bad), ModelError);
  ProcessPath empty{gas(1), {}};
  EXPECT_THROW(validate_path(empty), ModelError);
}
