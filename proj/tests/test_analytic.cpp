#include "surftopo/analytic.hpp"
#include "surftopo/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace surftopo;

namespace {

// Additive response over coded levels.
double coded(double v, const std::vector<double>& levels) {
  if (v == levels.front()) return -1.0;
  if (v == levels.back()) return 1.0;
  return 0.0;
}

const std::array<std::vector<double>, kFactorCount> kLevels{
    std::vector<double>{0.0, 20.0, 40.0}, std::vector<double>{1.0, 10.0},
    std::vector<double>{0.005, 0.01}, std::vector<double>{2.0, 4.0}};

}  // namespace

TEST(PredictSz, BothBranches) {
  // fz^2 / (8 r) = 0.0196 / 12
  const double feed = 0.14 * 0.14 / 12.0;
  EXPECT_NEAR(predict_sz(0.14, 0.005, 1.4744, 1.5), feed, 1e-15);
  EXPECT_NEAR(predict_sz(0.14, 0.005, 1.4744, 1.5, SzBranch::kHcAdditiveSwapped), 0.005 + feed, 1e-15);
  // r below sqrt(8 hc Req) = 0.2429 flips both branches.
  EXPECT_NEAR(predict_sz(0.14, 0.005, 1.4744, 0.1), 0.005 + 0.14 * 0.14 / 0.8, 1e-15);
  EXPECT_NEAR(predict_sz(0.14, 0.005, 1.4744, 0.1, SzBranch::kHcAdditiveSwapped), 0.14 * 0.14 / 0.8, 1e-15);
  EXPECT_THROW(predict_sz(0.0, 0.005, 1.0, 1.5), DomainError);
  EXPECT_THROW(predict_sz(0.1, 0.005, -1.0, 1.5), DomainError);
}

TEST(PredictSz, FeedTermIsQuadraticInFz) {
  const double a = predict_sz(0.1, 0.005, 2.0, 1.5);
  const double b = predict_sz(0.2, 0.005, 2.0, 1.5);
  EXPECT_NEAR(b / a, 4.0, 1e-12);
}

TEST(Stepover, SmallSagitta) {
  EXPECT_NEAR(stepover_from_scallop(0.005, 86.398), std::sqrt(8.0 * 0.005 * 86.398), 1e-15);
  EXPECT_NEAR(stepover_from_scallop(0.01, 2.0), 0.4, 1e-15);
  EXPECT_THROW(stepover_from_scallop(0.0, 2.0), DomainError);
  EXPECT_THROW(stepover_from_scallop(3.0, 2.0), DomainError);
}

TEST(MachiningParams, Validation) {
  MachiningParams ok;
  EXPECT_NO_THROW(ok.validate());
  MachiningParams bad = ok;
  bad.theta_n_deg = 95.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = ok;
  bad.h_c = 0.0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = ok;
  bad.stepover = -1.0;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(ErrorStats, MeanAndPopulationSpread) {
  const std::vector<double> a{1, 2, 3}, s{2, 2, 5};
  const ErrorStats e = analytic_vs_sim_error(a, s);
  EXPECT_DOUBLE_EQ(e.mean_abs_error, 1.0);
  EXPECT_NEAR(e.std_dev, std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_THROW(analytic_vs_sim_error(a, std::vector<double>{1.0}), DomainError);
  EXPECT_THROW(analytic_vs_sim_error(std::vector<double>{}, std::vector<double>{}), DomainError);
}

TEST(FullFactorial, OrderAndSize) {
  const DesignTable d = full_factorial(kLevels);
  ASSERT_EQ(d.rows.size(), 24u);
  EXPECT_EQ(d.rows[0].levels, (std::array<double, 4>{0.0, 1.0, 0.005, 2.0}));
  EXPECT_EQ(d.rows[1].levels, (std::array<double, 4>{0.0, 1.0, 0.005, 4.0}));
  EXPECT_EQ(d.rows[23].levels, (std::array<double, 4>{40.0, 10.0, 0.01, 4.0}));
}

TEST(FactorEffects, RecoversAdditiveModelExactly) {
  DesignTable d = full_factorial(kLevels);
  d.response_names = {"y"};
  const std::array<double, 4> beta{2.0, -1.0, 0.5, 3.0};
  for (auto& row : d.rows) {
    double y = 10.0;
    for (std::size_t f = 0; f < kFactorCount; ++f) y += beta[f] * coded(row.levels[f], kLevels[f]);
    row.responses = {y};
  }
  const EffectTable t = factor_effects(d);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].name, "y");
  EXPECT_NEAR(t.rows[0].mean, 10.0, 1e-12);
  for (std::size_t f = 0; f < kFactorCount; ++f) EXPECT_NEAR(t.rows[0].effects[f], beta[f], 1e-12);
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    EXPECT_NEAR(t.fitted(d, r, 0), d.rows[r].responses[0], 1e-12);
  }
}

TEST(FactorEffects, MatchesHalfDifferenceOfMeansWithInteraction) {
  DesignTable d = full_factorial(kLevels);
  d.response_names = {"y"};
  for (auto& row : d.rows) {
    row.responses = {row.levels[0] * row.levels[3] + std::sin(row.levels[1]) + 100.0 * row.levels[2]};
  }
  const EffectTable t = factor_effects(d);
  for (std::size_t f = 0; f < kFactorCount; ++f) {
    double hi = 0, lo = 0;
    int nh = 0, nl = 0;
    for (const auto& row : d.rows) {
      if (row.levels[f] == kLevels[f].back()) { hi += row.responses[0]; ++nh; }
      if (row.levels[f] == kLevels[f].front()) { lo += row.responses[0]; ++nl; }
    }
    EXPECT_NEAR(t.rows[0].effects[f], 0.5 * (hi / nh - lo / nl), 1e-12) << f;
  }
  // Linear in the response.
  DesignTable d2 = d;
  for (auto& row : d2.rows) row.responses[0] = 3.0 * row.responses[0] + 1.0;
  const EffectTable t2 = factor_effects(d2);
  for (std::size_t f = 0; f < kFactorCount; ++f) {
    EXPECT_NEAR(t2.rows[0].effects[f], 3.0 * t.rows[0].effects[f], 1e-10);
  }
}

TEST(FactorEffects, RejectsUnbalancedDesign) {
  DesignTable d = full_factorial(kLevels);
  d.response_names = {"y"};
  for (auto& row : d.rows) row.responses = {1.0};
  d.rows.pop_back();
  EXPECT_THROW(factor_effects(d), DomainError);
  DesignTable dup = full_factorial(kLevels);
  dup.response_names = {"y"};
  for (auto& row : dup.rows) row.responses = {1.0};
  dup.rows[3] = dup.rows[2];
  EXPECT_THROW(factor_effects(dup), DomainError);
}

TEST(DesignCsv, RoundTripAndUndefinedCells) {
  DesignTable d = full_factorial({std::vector<double>{0, 20}, std::vector<double>{1, 10},
                                  std::vector<double>{0.005, 0.01}, std::vector<double>{2, 4}});
  d.response_names = {"Sz_um", "Std_deg"};
  for (std::size_t k = 0; k < d.rows.size(); ++k) d.rows[k].responses = {0.1 * k, -1.0 / 3.0};
  std::ostringstream out;
  write_design_csv(d, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "yaw_deg,tilt_deg,hc_mm,vf_m_per_min,Sz_um,Std_deg");
  std::istringstream in(out.str());
  const DesignTable back = read_design_csv(in);
  ASSERT_EQ(back.rows.size(), d.rows.size());
  for (std::size_t k = 0; k < d.rows.size(); ++k) {
    EXPECT_EQ(back.rows[k].levels, d.rows[k].levels);
    EXPECT_NEAR(back.rows[k].responses[1], -1.0 / 3.0, 1e-9);
  }
  EXPECT_EQ(back.column("Sz_um").size(), 16u);
  EXPECT_THROW(back.column("nope"), DomainError);

  std::istringstream undef("yaw_deg,tilt_deg,hc_mm,vf_m_per_min,Std_deg\n0,1,0.005,2,undef(isotropic)\n");
  const DesignTable u = read_design_csv(undef);
  EXPECT_TRUE(std::isnan(u.rows[0].responses[0]));
}

TEST(DesignCsv, MalformedInput) {
  std::istringstream header("yaw,tilt\n");
  EXPECT_THROW(read_design_csv(header), ParseError);
  std::istringstream ragged("yaw_deg,tilt_deg,hc_mm,vf_m_per_min,Sz_um\n0,1,0.005\n");
  EXPECT_THROW(read_design_csv(ragged), ParseError);
  std::istringstream text("yaw_deg,tilt_deg,hc_mm,vf_m_per_min,Sz_um\n0,1,x,2,3\n");
  EXPECT_THROW(read_design_csv(text), ParseError);
}

TEST(EffectTable, CsvLayout) {
  EffectTable t;
  t.rows.push_back({"Sz_um", 3.5, {-1.0, 0.5, 0.25, 1.0}});
  std::ostringstream out;
  write_effect_table(t, out);
  EXPECT_EQ(out.str(), "parameter,mean,yaw,tilt,scallop_height,feedrate\nSz_um,3.5,-1,0.5,0.25,1\n");
}
