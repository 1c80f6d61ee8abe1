#include <gtest/gtest.h>

#include "moneystat/model.hpp"

using namespace moneystat;

TEST(ModelSpec, KindNamesRoundTrip) {
  for (auto k : {ModelKind::CashOnly, ModelKind::Overdraft, ModelKind::MultiAccount, ModelKind::Combined,
                 ModelKind::Restricted, ModelKind::CreditMarket, ModelKind::MultiAsset}) {
    EXPECT_EQ(parse_kind(kind_name(k)), k);
  }
  EXPECT_THROW(parse_kind("Barter"), ModelError);
}

TEST(ModelSpec, VolumeOnlyWhereThePartitionFunctionHasOne) {
  EXPECT_TRUE(has_volume(ModelKind::CashOnly));
  EXPECT_TRUE(has_volume(ModelKind::CreditMarket));
  EXPECT_FALSE(has_volume(ModelKind::Combined));
  EXPECT_FALSE(has_volume(ModelKind::MultiAsset));
  EXPECT_EQ(ModelSpec::cash_only(3, 2.5).volume(), 2.5);
  EXPECT_EQ(ModelSpec::credit_market(3, 900).volume(), 900.0);
  EXPECT_FALSE(ModelSpec::restricted(3, 1.0).volume().has_value());
}

TEST(ModelSpec, MultiAccountTotals) {
  const auto s = ModelSpec::multi_account({1, 2}, {1, 2, 3});
  EXPECT_EQ(s.total_accounts(), 3);
  EXPECT_DOUBLE_EQ(s.total_overdraft(), 6.0);
  EXPECT_NO_THROW(validate(s));
}

TEST(ModelSpec, ValidationRejectsBrokenInvariants) {
  EXPECT_THROW(validate(ModelSpec::cash_only(0)), ModelError);
  EXPECT_THROW(validate(ModelSpec::cash_only(3, 0.0)), ModelError);
  EXPECT_THROW(validate(ModelSpec::overdraft_model(3, -1.0)), ModelError);
  EXPECT_THROW(validate(ModelSpec::restricted(3, 0.0)), ModelError);
  EXPECT_THROW(validate(ModelSpec::multi_account({1, 2}, {1, 2})), ModelError);
  EXPECT_THROW(validate(ModelSpec::multi_account({1, 0}, {1})), ModelError);
  auto credit = ModelSpec::credit_market(3, 9);
  credit.q0 = 1.0;
  EXPECT_THROW(validate(credit), ModelError);
  EXPECT_THROW(validate(ModelSpec::multi_asset(3, 0)), ModelError);
}
