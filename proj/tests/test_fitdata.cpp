#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vortex/fitdata.hpp"

using namespace vortex;
using namespace vortex::fitdata;

namespace {

struct ChannelSpec {
  HalfInt s_z;
  int dm, m_gamma, helicity;
};

ScanDataset synthetic(const BeamConfig& cfg, const std::vector<ChannelSpec>& channels, double norm, double b_max = 8.0, int n = 81) {
  ScanDataset ds;
  for (const auto& ch : channels) {
    BeamConfig c = cfg;
    c.m_gamma = ch.m_gamma;
    c.helicity = ch.helicity;
    const auto tr = amplitudes::reference_transition(ch.s_z, ch.dm);
    for (int i = 0; i < n; ++i) {
      ScanPoint p;
      p.b_um = b_max * i / (n - 1);
      p.value = amplitudes::amplitude(tr, c, p.b_um, 0.0, {norm}).magnitude;
      p.err_lo = p.err_hi = 0.02 * norm;
      p.channel_dm = ch.dm;
      p.m_gamma = ch.m_gamma;
      p.helicity = ch.helicity;
      p.s_z = ch.s_z;
      ds.points.push_back(p);
    }
  }
  return ds;
}

std::vector<ChannelSpec> all_dm(HalfInt sz, int m_gamma, int helicity) {
  std::vector<ChannelSpec> v;
  for (int dm = -2; dm <= 2; ++dm) v.push_back({sz, dm, m_gamma, helicity});
  return v;
}

BeamConfig family(Family f) {
  BeamConfig c;
  c.family = f;
  return c;
}

}  // namespace

TEST(Rabi, Inversion) {
  EXPECT_EQ(probability_to_rabi(0.0, 1.0, 100).rabi, 0.0);
  EXPECT_NEAR(probability_to_rabi(1.0, 2.0, 100).rabi, std::numbers::pi / 2.0, 1e-15);
  const auto r = probability_to_rabi(0.5, 1.0, 100);
  EXPECT_NEAR(r.rabi, std::numbers::pi / 2, 1e-15);
  EXPECT_GT(r.err_lo, 0.0);
  EXPECT_GT(r.err_hi, 0.0);
  EXPECT_THROW(probability_to_rabi(1.2, 1.0, 100), DomainError);
  EXPECT_THROW(probability_to_rabi(0.5, 0.0, 100), DomainError);
}

TEST(Rabi, MonotoneInProbability) {
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double w = probability_to_rabi(i / 100.0, 0.3, 100).rabi;
    EXPECT_GE(w, prev);
    prev = w;
  }
}

TEST(ClopperPearson, MatchesBinomialBisection) {
  for (int n : {10, 100}) {
    for (int x = 0; x <= n; x += n / 10) {
      const auto ci = clopper_pearson(static_cast<double>(x) / n, n);
      const auto ref = oracle::clopper_pearson(x, n, kOneSigma);
      EXPECT_NEAR(ci.lo, ref.first, 1e-9) << x << "/" << n;
      EXPECT_NEAR(ci.hi, ref.second, 1e-9) << x << "/" << n;
      EXPECT_LE(ci.lo, static_cast<double>(x) / n);
      EXPECT_GE(ci.hi, static_cast<double>(x) / n);
    }
  }
}

TEST(ClopperPearson, Validation) {
  EXPECT_THROW(clopper_pearson(-0.1, 10), DomainError);
  EXPECT_THROW(clopper_pearson(0.5, 0), DomainError);
}

TEST(PowerRescale, Scaling) {
  ScanPoint a;
  a.value = 10.0;
  a.err_lo = a.err_hi = 2.0;
  a.power_uW = 4.0;
  ScanPoint b = a;
  b.power_uW = 1.0;
  ScanPoint c = a;
  c.value = 10.0 * std::sqrt(9.0 / 4.0);
  c.power_uW = 9.0;
  const auto out = power_rescale({a, b, c});
  EXPECT_DOUBLE_EQ(out[0].value, 5.0);
  EXPECT_DOUBLE_EQ(out[0].err_hi, 1.0);
  EXPECT_DOUBLE_EQ(out[1].value, 10.0);
  EXPECT_DOUBLE_EQ(out[2].value, out[0].value);
  ScanPoint none = a;
  none.power_uW.reset();
  EXPECT_THROW(power_rescale({none}), DomainError);
}

TEST(Prepare, ProbabilityPoints) {
  ScanPoint p;
  p.kind = ValueKind::prob;
  p.value = 0.5;
  p.t_ms = 1.0;
  p.power_uW = 4.0;
  const auto out = prepare({{p}});
  EXPECT_NEAR(out[0].value, std::numbers::pi / 4, 1e-15);
  EXPECT_EQ(out[0].kind, ValueKind::rabi);
}

TEST(Minimum, QuadraticRefinement) {
  std::vector<ScanPoint> pts;
  for (int i = 0; i <= 40; ++i) {
    ScanPoint p;
    p.b_um = 0.1 * i;
    p.value = std::abs(specfun::bessel_j(0, p.b_um));
    pts.push_back(p);
  }
  const auto m = first_minimum_after_peak(pts);
  ASSERT_TRUE(m.has_value());
  EXPECT_NEAR(*m, 2.404825557695773, 5e-3);
  pts.resize(10);
  EXPECT_FALSE(first_minimum_after_peak(pts).has_value());
}

TEST(CalibrateBb, RoundTrip) {
  const auto ds = synthetic(family(Family::BB), {{-kHalf, -2, -2, -1}, {-kHalf, -1, -2, -1}}, 30.0);
  const auto cal = calibrate_bb(ds, 0.729);
  EXPECT_NEAR(cal.theta_k, 0.095, 1e-3);
  EXPECT_NEAR(cal.norm, 30.0, 0.3);
  const double kappa = 2 * std::numbers::pi / 0.729 * std::sin(0.095);
  EXPECT_NEAR(2.404825557695773 / kappa, 2.94, 0.01);
}

TEST(CalibrateBb, NoMinimum) {
  const auto ds = synthetic(family(Family::BB), {{-kHalf, -2, -2, -1}}, 30.0, 2.0, 21);
  EXPECT_THROW(calibrate_bb(ds, 0.729), FitError);
}

TEST(Fit, ThetaRoundTrip) {
  const auto ds = synthetic(family(Family::BB), {{-kHalf, -2, -2, -1}, {-kHalf, -1, -2, -1}}, 30.0);
  FitConfig fc;
  fc.free_params = {Param::norm, Param::theta_k};
  fc.beam = family(Family::BB);
  fc.beam.pitch_rad = 0.07;
  const auto r = fit(ds, fc, {});
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.value(Param::theta_k), 0.095, 1e-3);
  EXPECT_NEAR(r.value(Param::norm), 30.0, 1e-6);
  EXPECT_EQ(r.dof, static_cast<int>(ds.points.size()) - 2);
}

TEST(Fit, BesselGaussWaist) {
  auto truth = family(Family::BG);
  const auto ds = synthetic(truth, {{-kHalf, -2, -2, -1}, {-kHalf, -1, -2, -1}}, 30.0);
  FitConfig fc;
  fc.free_params = {Param::norm, Param::w0};
  fc.beam = truth;
  fc.beam.w0_um = 6.0;
  const auto r = fit(ds, fc, {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value(Param::w0) / 10.0, 1.0, 1e-3);
}

TEST(Fit, LaguerreGaussMixture) {
  auto truth = family(Family::LG_MIX);
  truth.w0_um = 4.0;
  truth.w1_um = 6.5;
  truth.mix_ratio = 0.43;
  const auto ds = synthetic(truth, all_dm(-kHalf, -2, -1), 30.0);
  FitConfig fc;
  fc.free_params = {Param::norm, Param::w0, Param::w1, Param::mix_ratio};
  fc.beam = truth;
  fc.beam.w0_um = 5.0;
  fc.beam.w1_um = 5.5;
  fc.beam.mix_ratio = 0.3;
  const auto r = fit(ds, fc, {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value(Param::w0) / 4.0, 1.0, 0.01);
  EXPECT_NEAR(r.value(Param::w1) / 6.5, 1.0, 0.01);
  EXPECT_NEAR(r.value(Param::mix_ratio) / 0.43, 1.0, 0.01);
}

TEST(Fit, AdmixtureOnly) {
  auto truth = family(Family::BB);
  truth.admixture_eps = 0.03;
  const auto ds = synthetic(truth, all_dm(-kHalf, -2, -1), 30.0);
  FitConfig fc;
  fc.free_params = {Param::eps};
  fc.beam = family(Family::BB);
  fc.beam.admixture_eps = 0.01;
  const auto r = fit(ds, fc, {30.0});
  EXPECT_NEAR(r.value(Param::eps), 0.03, 0.005);
}

TEST(Fit, ScaleInvarianceOfShapeParameters) {
  auto truth = family(Family::BG);
  auto ds = synthetic(truth, {{-kHalf, -2, -2, -1}, {-kHalf, -1, -2, -1}}, 30.0);
  auto scaled = ds;
  for (auto& p : scaled.points) {
    p.value *= 7.25;
    p.err_lo *= 7.25;
    p.err_hi *= 7.25;
  }
  // slightly perturbed data so the optimum is not exact
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const double bump = 1.0 + 0.01 * std::sin(1.3 * i);
    ds.points[i].value *= bump;
    scaled.points[i].value *= bump;
  }
  FitConfig fc;
  fc.free_params = {Param::norm, Param::w0, Param::theta_k};
  fc.beam = truth;
  fc.beam.w0_um = 8.0;
  const auto a = fit(ds, fc, {});
  const auto b = fit(scaled, fc, {});
  EXPECT_NEAR(a.value(Param::w0), b.value(Param::w0), 1e-10);
  EXPECT_NEAR(a.value(Param::theta_k), b.value(Param::theta_k), 1e-10);
  EXPECT_NEAR(b.value(Param::norm) / a.value(Param::norm), 7.25, 1e-8);
}

TEST(Fit, RegenerateReproducesProfile) {
  auto truth = family(Family::BG);
  const auto ds = synthetic(truth, {{kHalf, 1, 1, 1}, {kHalf, 2, 1, 1}}, 12.0);
  FitConfig fc;
  fc.free_params = {Param::norm, Param::w0};
  fc.beam = truth;
  fc.beam.w0_um = 14.0;
  const auto r = fit(ds, fc, {});
  for (const auto& p : ds.points) {
    BeamConfig c = r.beam;
    c.m_gamma = p.m_gamma;
    c.helicity = p.helicity;
    const double v = amplitudes::amplitude(amplitudes::reference_transition(p.s_z, p.channel_dm), c, p.b_um, 0.0, {r.norm}).magnitude;
    EXPECT_NEAR(v, p.value, 1e-6 * 12.0);
  }
}

TEST(Fit, Deterministic) {
  const auto ds = synthetic(family(Family::BB), {{-kHalf, -2, -2, -1}, {-kHalf, -1, -2, -1}}, 30.0);
  FitConfig fc;
  fc.free_params = {Param::norm, Param::theta_k};
  fc.beam = family(Family::BB);
  fc.beam.pitch_rad = 0.08;
  const auto a = fit(ds, fc, {});
  const auto b = fit(ds, fc, {});
  EXPECT_EQ(a.value(Param::theta_k), b.value(Param::theta_k));
  EXPECT_EQ(a.chi2, b.chi2);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Fit, Preconditions) {
  const auto ds = synthetic(family(Family::BB), {{-kHalf, -2, -2, -1}}, 30.0, 8.0, 2);
  FitConfig fc;
  fc.beam = family(Family::BB);
  EXPECT_THROW(fit(ds, fc, {}), DomainError);
  fc.free_params = {Param::norm, Param::theta_k};
  EXPECT_THROW(fit(ds, fc, {}), DomainError);  // dof = 0
  const auto ds2 = synthetic(family(Family::BB), {{-kHalf, -2, -2, -1}}, 30.0);
  fc.bounds[Param::theta_k] = {0.2, 0.1};
  EXPECT_THROW(fit(ds2, fc, {}), DomainError);
  fc.bounds[Param::theta_k] = {0.1, 0.2};
  EXPECT_THROW(fit(ds2, fc, {}), DomainError);  // start outside bounds
  fc.bounds.clear();
  fc.channels = {{kHalf, 0, 0, 1}};
  EXPECT_THROW(fit(ds2, fc, {}), DomainError);
}

TEST(Fit, IterationCapReportsBestPoint) {
  const auto ds = synthetic(family(Family::BG), {{-kHalf, -2, -2, -1}, {-kHalf, -1, -2, -1}}, 30.0);
  FitConfig fc;
  fc.free_params = {Param::norm, Param::w0};
  fc.beam = family(Family::BG);
  fc.beam.w0_um = 3.0;
  fc.max_iterations = 1;
  const auto r = fit(ds, fc, {});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_GE(r.chi2, 0.0);
}
