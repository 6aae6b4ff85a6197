#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

#include "dispute/stats.hpp"

#include "helpers.hpp"

using namespace dispute;

namespace {

// Independent oracle: solve the normal equations by Gaussian elimination with
// partial pivoting, no Eigen.
std::vector<double> normal_equation_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const int p = static_cast<int>(X.cols());
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < p; ++c)
      for (int i = 0; i < X.rows(); ++i) a[r][c] += X(i, r) * X(i, c);
    for (int i = 0; i < X.rows(); ++i) a[r][p] += X(i, r) * y(i);
  }
  for (int col = 0; col < p; ++col) {
    int pivot = col;
    for (int r = col + 1; r < p; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    for (int r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> beta(p);
  for (int r = 0; r < p; ++r) beta[r] = a[r][p] / a[r][r];
  return beta;
}

std::vector<SpeakerRecord> synthetic_records(Rng& rng, int n,
                                             const std::function<double(const SpeakerRecord&)>& f,
                                             double noise_sd = 1.0) {
  std::vector<SpeakerRecord> records;
  for (int i = 0; i < n; ++i) {
    SpeakerRecord r;
    r.dialogue_id = "syn-" + std::to_string(i / 2);
    r.role = i % 2 == 0 ? Role::Buyer : Role::Seller;
    r.position_effect = r.role == Role::Buyer ? -1.0 : 1.0;
    r.position_dummy = r.role == Role::Buyer ? 0.0 : 1.0;
    r.self = testutil::random_profile(rng);
    r.partner = testutil::random_profile(rng);
    // Box-Muller from the pinned generator.
    const double u1 = rng.next_double() + 1e-12, u2 = rng.next_double();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    r.score = f(r) + noise_sd * z;
    records.push_back(r);
  }
  return records;
}

}  // namespace

TEST_CASE("exact fit recovers the line with zero residuals") {
  Rng rng(1);
  auto records = synthetic_records(
      rng, 40, [](const SpeakerRecord& r) { return 3.0 + 2.0 * r.self.value(Trait::EXT); }, 0.0);
  const auto d = build_design(records, "score", Coding::Effect, false, false);
  const auto fit = ols_fit(d, Robust::None);
  CHECK(fit.beta(0) == Catch::Approx(3.0).margin(1e-8));
  CHECK(fit.beta(fit.column_index("SELF_EXT")) == Catch::Approx(2.0).margin(1e-8));
  const Eigen::VectorXd e = d.y - d.X * fit.beta;
  CHECK(e.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("OLS matches the normal-equation oracle on random designs") {
  Rng rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 20 + static_cast<int>(rng.next_below(181));  // up to 200
    const int p = 2 + static_cast<int>(rng.next_below(11));    // up to 12
    DesignMatrix d;
    d.dv = "score";
    d.X.resize(n, p);
    d.y.resize(n);
    for (int c = 0; c < p; ++c) d.columns.push_back("x" + std::to_string(c));
    for (int i = 0; i < n; ++i) {
      d.X(i, 0) = 1.0;
      for (int c = 1; c < p; ++c) d.X(i, c) = rng.uniform(-2.0, 2.0);
      d.y(i) = rng.uniform(-5.0, 5.0);
    }
    const auto fit = ols_fit(d, Robust::HC1);
    const auto oracle = normal_equation_solve(d.X, d.y);
    for (int c = 0; c < p; ++c) {
      const double scale = std::max(1.0, std::abs(oracle[c]));
      CHECK(std::abs(fit.beta(c) - oracle[c]) / scale < 1e-8);
    }
    // Residual orthogonality.
    const Eigen::VectorXd e = d.y - d.X * fit.beta;
    CHECK((d.X.transpose() * e).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("HC1 tracks classical SEs under homoskedasticity") {
  Rng rng(7);
  double ratio_sum = 0;
  int count = 0;
  for (int rep = 0; rep < 200; ++rep) {
    auto records = synthetic_records(
        rng, 120, [](const SpeakerRecord& r) { return 1.0 + 0.5 * r.self.value(Trait::AGR); });
    const auto d = build_design(records, "score", Coding::Effect, false, false);
    const auto robust = ols_fit(d, Robust::HC1);
    const auto classical = ols_fit(d, Robust::None);
    const auto j = robust.column_index("SELF_AGR");
    ratio_sum += robust.se(j) / classical.se(j);
    ++count;
  }
  CHECK(ratio_sum / count == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("planted coefficients are recovered") {
  Rng rng(99);
  auto records = synthetic_records(rng, 2000, [](const SpeakerRecord& r) {
    return 10.0 + 1.5 * r.self.value(Trait::NEU) - 0.8 * r.partner.value(Trait::OPE) +
           2.0 * r.position_effect;
  });
  const auto d = build_design(records, "score", Coding::Effect, false, false);
  const auto fit = ols_fit(d);
  const auto check_planted = [&](const std::string& col, double want) {
    const auto j = fit.column_index(col);
    CHECK(std::abs(fit.beta(j) - want) < 3 * fit.se(j) + 1e-9);
  };
  check_planted("SELF_NEU", 1.5);
  check_planted("PARTNER_OPE", -0.8);
  check_planted("POSITION", 2.0);
}

TEST_CASE("logit recovers the 2x2 closed form") {
  DesignMatrix d;
  d.dv = "accept";
  const int n = 200;
  d.X.resize(n, 2);
  d.y.resize(n);
  d.columns = {"CONST", "x"};
  int i = 0;
  const auto fill = [&](double x, double y, int count) {
    for (int k = 0; k < count; ++k, ++i) {
      d.X(i, 0) = 1.0;
      d.X(i, 1) = x;
      d.y(i) = y;
    }
  };
  fill(0, 1, 30);
  fill(0, 0, 70);
  fill(1, 1, 60);
  fill(1, 0, 40);
  const auto fit = logit_fit(d);
  CHECK(fit.beta(1) == Catch::Approx(std::log(3.5)).margin(1e-6));
  CHECK(fit.beta(0) == Catch::Approx(std::log(30.0 / 70.0)).margin(1e-6));
  // Score equations hold at the optimum.
  const Eigen::VectorXd mu = (1.0 / (1.0 + (-(d.X * fit.beta)).array().exp())).matrix();
  CHECK((d.X.transpose() * (d.y - mu)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("logit intercept vanishes on symmetric data") {
  DesignMatrix d;
  d.dv = "accept";
  d.X.resize(80, 2);
  d.y.resize(80);
  d.columns = {"CONST", "x"};
  for (int i = 0; i < 80; ++i) {
    const double x = i < 40 ? 1.0 : -1.0;
    d.X(i, 0) = 1.0;
    d.X(i, 1) = x;
    const bool match = (i % 4) != 0;  // 75% of labels match sign(x)
    d.y(i) = (x > 0) == match ? 1.0 : 0.0;
  }
  const auto fit = logit_fit(d);
  CHECK(fit.beta(0) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("separation and degenerate classes raise errors") {
  DesignMatrix d;
  d.dv = "accept";
  d.X.resize(20, 2);
  d.y.resize(20);
  d.columns = {"CONST", "x"};
  for (int i = 0; i < 20; ++i) {
    d.X(i, 0) = 1.0;
    d.X(i, 1) = i < 10 ? -1.0 : 1.0;
    d.y(i) = i < 10 ? 0.0 : 1.0;
  }
  CHECK_THROWS_AS(logit_fit(d), SeparationError);
  d.y.setOnes();
  CHECK_THROWS(logit_fit(d));
}

TEST_CASE("coding conventions and invariance") {
  Rng rng(17);
  auto records = synthetic_records(rng, 300, [](const SpeakerRecord& r) {
    return 5.0 + 0.7 * r.self.value(Trait::CON) + 1.2 * r.position_effect;
  });
  const auto eff = build_design(records, "score", Coding::Effect, false, false);
  const auto dum = build_design(records, "score", Coding::Dummy, false, false);
  const auto jpos = static_cast<Eigen::Index>(
      std::find(eff.columns.begin(), eff.columns.end(), "POSITION") - eff.columns.begin());
  for (Eigen::Index i = 0; i < eff.X.rows(); ++i) {
    CHECK((eff.X(i, jpos) == -1.0 || eff.X(i, jpos) == 1.0));
    CHECK((dum.X(i, jpos) == 0.0 || dum.X(i, jpos) == 1.0));
    CHECK(dum.X(i, jpos) == (eff.X(i, jpos) + 1.0) / 2.0);
  }
  const auto fit_eff = ols_fit(eff, Robust::HC1);
  const auto fit_dum = ols_fit(dum, Robust::HC1);
  // Fitted values identical, trait t-statistics unchanged.
  const Eigen::VectorXd yhat_e = eff.X * fit_eff.beta;
  const Eigen::VectorXd yhat_d = dum.X * fit_dum.beta;
  CHECK((yhat_e - yhat_d).cwiseAbs().maxCoeff() < 1e-8);
  for (const auto t : all_traits()) {
    const auto j = fit_eff.column_index("SELF_" + trait_name(t));
    CHECK(fit_eff.stat(j) == Catch::Approx(fit_dum.stat(j)).margin(1e-8));
  }
}

TEST_CASE("standardization leaves OLS p-values unchanged") {
  Rng rng(19);
  auto records = synthetic_records(rng, 240, [](const SpeakerRecord& r) {
    return 2.0 - 0.6 * r.self.value(Trait::OPE) + 0.4 * r.partner.value(Trait::EXT);
  });
  const auto raw = ols_fit(build_design(records, "score", Coding::Effect, false, false));
  const auto std_fit = ols_fit(build_design(records, "score", Coding::Effect, true, false));
  for (const auto t : all_traits()) {
    for (const std::string side : {"SELF_", "PARTNER_"}) {
      const auto j = raw.column_index(side + trait_name(t));
      CHECK(raw.p(j) == Catch::Approx(std_fit.p(j)).margin(1e-8));
    }
  }
}

TEST_CASE("simple effects combine main and interaction terms") {
  Rng rng(21);
  auto records = synthetic_records(rng, 600, [](const SpeakerRecord& r) {
    // Buyer slope -0.14, Seller slope 0.12 => interaction 0.26 under dummy coding.
    const double slope = r.position_dummy == 0.0 ? -0.14 : 0.12;
    return 1.0 + slope * r.self.value(Trait::AGR);
  });
  const auto d = build_design(records, "score", Coding::Dummy, false, true);
  const auto fit = ols_fit(d);
  const auto [buyer, seller] = simple_effects(fit, "AGR");
  const auto jt = fit.column_index("SELF_AGR");
  const auto ji = fit.column_index("SELF_AGR_x_POSITION");
  CHECK(buyer.estimate == Catch::Approx(fit.beta(jt)).margin(1e-12));
  CHECK(seller.estimate == Catch::Approx(fit.beta(jt) + fit.beta(ji)).margin(1e-12));
  CHECK(std::abs(buyer.estimate - (-0.14)) < 3 * buyer.se + 1e-9);
  CHECK(std::abs(seller.estimate - 0.12) < 3 * seller.se + 1e-9);
  CHECK_THROWS(simple_effects(fit, "NOPE"));
  CHECK(d.columns.size() == 17);  // CONST + 10 traits + POSITION + 5 interactions

  // Zero planted interaction: the two effects coincide within tolerance.
  Rng rng2(22);
  auto flat = synthetic_records(
      rng2, 400, [](const SpeakerRecord& r) { return 1.0 + 0.3 * r.self.value(Trait::EXT); }, 0.0);
  const auto flat_fit = ols_fit(build_design(flat, "score", Coding::Dummy, false, true));
  const auto [fb, fs] = simple_effects(flat_fit, "EXT");
  CHECK(fb.estimate == Catch::Approx(fs.estimate).margin(1e-8));
}

TEST_CASE("battery fits nine DVs and collects per-DV errors") {
  Rng rng(23);
  auto records = synthetic_records(rng, 100, [](const SpeakerRecord&) { return 50.0; }, 5.0);
  for (auto& r : records) {
    r.coop_ratio = rng.uniform(0, 100);
    r.comp_ratio = rng.uniform(0, 100);
    r.coop_recip = rng.uniform(0, 100);
    r.comp_recip = rng.uniform(0, 100);
    r.escalation = rng.uniform(0, 100);
    r.deescalation = rng.uniform(0, 100);
    r.accept = rng.next_double() < 0.5 ? 1 : 0;
    r.not_walk_away = 1;  // one-class: this DV must error, others succeed
  }
  const auto battery =
      regression_battery(records, default_dv_list(), Coding::Effect, Robust::HC1, true, false);
  CHECK(battery.results.size() == 8);
  REQUIRE(battery.errors.size() == 1);
  CHECK(battery.errors[0].first == "notWalkAway");
  for (const auto& res : battery.results)
    CHECK(res.model == (res.dv == "accept" ? "Logit" : "OLS"));
}

TEST_CASE("listwise deletion drops rows with missing DV") {
  Rng rng(29);
  auto records = synthetic_records(rng, 100, [](const SpeakerRecord&) { return 1.0; });
  for (int i = 0; i < 30; ++i) records[static_cast<std::size_t>(i)].score.reset();
  const auto d = build_design(records, "score", Coding::Effect, false, false);
  CHECK(d.X.rows() == 70);
  CHECK(d.row_ids.size() == 70);
}

TEST_CASE("zero-variance predictors are dropped with a warning") {
  Rng rng(31);
  auto records = synthetic_records(rng, 60, [](const SpeakerRecord&) { return 1.0; });
  for (auto& r : records) r.self.values[static_cast<int>(Trait::NEU)] = 2;
  const auto d = build_design(records, "score", Coding::Effect, false, false);
  REQUIRE(d.warnings.size() == 1);
  CHECK(d.warnings[0].find("SELF_NEU") != std::string::npos);
  CHECK(std::find(d.columns.begin(), d.columns.end(), "SELF_NEU") == d.columns.end());
  CHECK(d.X.cols() == 11);
}
