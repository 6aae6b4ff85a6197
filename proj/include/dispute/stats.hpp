#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "dispute/metrics.hpp"

namespace dispute {

enum class Coding { Effect, Dummy };
enum class Robust { None, HC1 };

inline const std::string& coding_name(Coding c) {
  static const std::array<std::string, 2> names = {"effect", "dummy"};
  return names[static_cast<int>(c)];
}

inline const std::string& robust_name(Robust r) {
  static const std::array<std::string, 2> names = {"none", "HC1"};
  return names[static_cast<int>(r)];
}

struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> columns;
  std::vector<std::string> row_ids;
  std::string dv;
  Coding coding = Coding::Effect;
  bool standardized = false;
  std::vector<std::string> warnings;  // dropped zero-variance columns etc.
};

// Predictors: the speaker's five traits, the partner's five, the position
// code, and optionally the five self-trait x position interactions. Rows with
// a missing DV are dropped listwise.
inline DesignMatrix build_design(const std::vector<SpeakerRecord>& records, const std::string& dv,
                                 Coding coding, bool standardize, bool interactions) {
  if (records.empty()) throw std::invalid_argument("build_design: no records");
  std::vector<const SpeakerRecord*> kept;
  for (const auto& r : records)
    if (dv_value(r, dv)) kept.push_back(&r);
  if (kept.empty()) throw std::invalid_argument("build_design: zero retained rows for " + dv);
  const double y0 = *dv_value(*kept.front(), dv);
  if (!dv_is_binary(dv) &&
      std::all_of(kept.begin(), kept.end(),
                  [&](const SpeakerRecord* r) { return *dv_value(*r, dv) == y0; }))
    throw std::invalid_argument("build_design: zero variance in DV " + dv);

  DesignMatrix d;
  d.dv = dv;
  d.coding = coding;
  d.standardized = standardize;
  d.columns = {"CONST"};
  for (const auto t : all_traits()) d.columns.push_back("SELF_" + trait_name(t));
  for (const auto t : all_traits()) d.columns.push_back("PARTNER_" + trait_name(t));
  d.columns.push_back("POSITION");
  if (interactions)
    for (const auto t : all_traits()) d.columns.push_back("SELF_" + trait_name(t) + "_x_POSITION");

  const auto n = static_cast<Eigen::Index>(kept.size());
  const auto p = static_cast<Eigen::Index>(d.columns.size());
  d.X.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SpeakerRecord& r = *kept[static_cast<std::size_t>(i)];
    d.row_ids.push_back(r.dialogue_id + "/" + role_name(r.role));
    d.y(i) = *dv_value(r, dv);
    Eigen::Index c = 0;
    d.X(i, c++) = 1.0;
    for (const auto t : all_traits()) d.X(i, c++) = r.self.value(t);
    for (const auto t : all_traits()) d.X(i, c++) = r.partner.value(t);
    const double pos = coding == Coding::Effect ? r.position_effect : r.position_dummy;
    d.X(i, c++) = pos;
    if (interactions)
      for (const auto t : all_traits()) d.X(i, c++) = r.self.value(t) * pos;
  }

  if (standardize) {
    // z-score the ten trait columns only; position and interactions keep
    // their coded values (interactions are rebuilt from the scaled traits).
    for (Eigen::Index c = 1; c <= 10; ++c) {
      const double mean = d.X.col(c).mean();
      const double sd = std::sqrt((d.X.col(c).array() - mean).square().sum() /
                                  static_cast<double>(n - 1));
      if (sd > 0) d.X.col(c) = (d.X.col(c).array() - mean) / sd;
    }
    if (interactions)
      for (Eigen::Index t = 0; t < kTraitCount; ++t)
        d.X.col(12 + t) = d.X.col(1 + t).cwiseProduct(d.X.col(11));
  }

  // Drop constant predictor columns; they are unidentifiable alongside CONST.
  for (Eigen::Index c = static_cast<Eigen::Index>(d.columns.size()) - 1; c >= 1; --c) {
    const double mean = d.X.col(c).mean();
    if ((d.X.col(c).array() - mean).abs().maxCoeff() < 1e-12) {
      d.warnings.push_back("dropped zero-variance column " + d.columns[static_cast<std::size_t>(c)]);
      const Eigen::Index pc = d.X.cols();
      d.X.block(0, c, n, pc - c - 1) = d.X.rightCols(pc - c - 1).eval();
      d.X.conservativeResize(n, pc - 1);
      d.columns.erase(d.columns.begin() + c);
    }
  }
  return d;
}

struct RegressionResult {
  std::string dv;
  std::string model;  // "OLS" | "Logit"
  Coding coding = Coding::Effect;
  Robust robust = Robust::None;
  bool standardized = false;
  Eigen::Index n = 0;
  std::vector<std::string> columns;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd stat;  // t for OLS, z for logit
  Eigen::VectorXd p;
  Eigen::MatrixXd cov;  // coefficient covariance used for SEs and contrasts
  double df_resid = 0;  // OLS only; 0 marks normal-based inference
  std::vector<std::string> warnings;

  Eigen::Index column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<Eigen::Index>(i);
    throw std::invalid_argument("no coefficient named \"" + name + "\"");
  }
};

namespace detail {

inline double two_sided_t_p(double t, double df) {
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

inline double two_sided_z_p(double z) {
  static const boost::math::normal dist;
  return 2.0 * boost::math::cdf(dist, -std::abs(z));
}

inline void fill_inference(RegressionResult& r) {
  const auto p = r.beta.size();
  r.se.resize(p);
  r.stat.resize(p);
  r.p.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    r.se(j) = std::sqrt(r.cov(j, j));
    r.stat(j) = r.beta(j) / r.se(j);
    r.p(j) = r.df_resid > 0 ? two_sided_t_p(r.stat(j), r.df_resid) : two_sided_z_p(r.stat(j));
  }
}

}  // namespace detail

inline RegressionResult ols_fit(const DesignMatrix& d, Robust robust = Robust::HC1) {
  const Eigen::Index n = d.X.rows(), p = d.X.cols();
  if (n <= p) throw std::invalid_argument("ols_fit: n <= p");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  if (qr.rank() < p) throw std::invalid_argument("ols_fit: design matrix is rank deficient");
  RegressionResult r;
  r.dv = d.dv;
  r.model = "OLS";
  r.coding = d.coding;
  r.robust = robust;
  r.standardized = d.standardized;
  r.n = n;
  r.columns = d.columns;
  r.warnings = d.warnings;
  r.beta = qr.solve(d.y);
  const Eigen::VectorXd e = d.y - d.X * r.beta;
  r.df_resid = static_cast<double>(n - p);
  const Eigen::MatrixXd xtx_inv = (d.X.transpose() * d.X).inverse();
  if (robust == Robust::HC1) {
    const Eigen::MatrixXd meat = d.X.transpose() * e.array().square().matrix().asDiagonal() * d.X;
    r.cov = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / r.df_resid);
  } else {
    r.cov = xtx_inv * (e.squaredNorm() / r.df_resid);
  }
  detail::fill_inference(r);
  return r;
}

class SeparationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline RegressionResult logit_fit(const DesignMatrix& d) {
  const Eigen::Index n = d.X.rows(), p = d.X.cols();
  bool any0 = false, any1 = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.y(i) == 0.0)
      any0 = true;
    else if (d.y(i) == 1.0)
      any1 = true;
    else
      throw std::invalid_argument("logit_fit: DV is not binary 0/1");
  }
  if (!any0 || !any1) throw std::invalid_argument("logit_fit: DV has a single class");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd info(p, p);
  double score_norm = 0;
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = d.X * beta;
    const Eigen::VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    const Eigen::VectorXd score = d.X.transpose() * (d.y - mu);
    score_norm = score.cwiseAbs().maxCoeff();
    if (score_norm < 1e-8) break;
    info = d.X.transpose() * w.asDiagonal() * d.X;
    beta += info.ldlt().solve(score);
    // Under separation the coefficients diverge while the score decays but
    // never truly vanishes; flag the divergence deterministically.
    if (beta.cwiseAbs().maxCoeff() > 30.0)
      throw SeparationError("logit_fit: separation detected (diverging coefficients) for " + d.dv);
  }
  if (score_norm >= 1e-8)
    throw std::runtime_error("logit_fit: IRLS failed to converge for " + d.dv);
  {
    // Separation leaves a numerically perfect fit: every fitted probability
    // collapses onto its 0/1 label, which finite data never do legitimately.
    const Eigen::VectorXd mu =
        (1.0 / (1.0 + (-(d.X * beta)).array().exp())).matrix();
    if ((d.y - mu).cwiseAbs().maxCoeff() < 1e-6)
      throw SeparationError("logit_fit: separation detected (perfect fit) for " + d.dv);
  }

  RegressionResult r;
  r.dv = d.dv;
  r.model = "Logit";
  r.coding = d.coding;
  r.robust = Robust::None;
  r.standardized = d.standardized;
  r.n = n;
  r.columns = d.columns;
  r.warnings = d.warnings;
  r.beta = beta;
  const Eigen::VectorXd eta = d.X * beta;
  const Eigen::VectorXd mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
  const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
  r.cov = (d.X.transpose() * w.asDiagonal() * d.X).inverse();
  r.df_resid = 0;  // Wald z inference
  detail::fill_inference(r);
  return r;
}

struct Contrast {
  std::string name;
  Eigen::VectorXd weights;
  double estimate = 0;
  double se = 0;
  double stat = 0;
  double p = 0;
};

inline Contrast evaluate_contrast(const RegressionResult& r, std::string name,
                                  const Eigen::VectorXd& weights) {
  if (weights.size() != r.beta.size())
    throw std::invalid_argument("contrast weight length does not match coefficient count");
  if (weights.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("degenerate all-zero contrast");
  Contrast c;
  c.name = std::move(name);
  c.weights = weights;
  c.estimate = weights.dot(r.beta);
  c.se = std::sqrt(weights.dot(r.cov * weights));
  c.stat = c.estimate / c.se;
  c.p = r.df_resid > 0 ? detail::two_sided_t_p(c.stat, r.df_resid)
                       : detail::two_sided_z_p(c.stat);
  return c;
}

// Simple effects of a self trait at each position under dummy coding:
// Buyer (POSITION=0) is the trait coefficient alone, Seller (POSITION=1)
// adds the interaction.
inline std::pair<Contrast, Contrast> simple_effects(const RegressionResult& r,
                                                    const std::string& trait) {
  if (r.coding != Coding::Dummy)
    throw std::invalid_argument("simple_effects requires a dummy-coded model");
  const Eigen::Index jt = r.column_index("SELF_" + trait);
  const Eigen::Index ji = r.column_index("SELF_" + trait + "_x_POSITION");
  Eigen::VectorXd buyer = Eigen::VectorXd::Zero(r.beta.size());
  buyer(jt) = 1.0;
  Eigen::VectorXd seller = buyer;
  seller(ji) = 1.0;
  return {evaluate_contrast(r, trait + "@Buyer", buyer),
          evaluate_contrast(r, trait + "@Seller", seller)};
}

struct BatteryResult {
  std::vector<RegressionResult> results;
  std::vector<std::pair<std::string, std::string>> errors;  // (dv, message)
};

inline BatteryResult regression_battery(const std::vector<SpeakerRecord>& records,
                                        const std::vector<std::string>& dvs, Coding coding,
                                        Robust robust, bool standardize = true,
                                        bool interactions = false) {
  BatteryResult battery;
  for (const auto& dv : dvs) {
    try {
      const DesignMatrix d = build_design(records, dv, coding, standardize, interactions);
      battery.results.push_back(dv_is_binary(dv) ? logit_fit(d) : ols_fit(d, robust));
    } catch (const std::exception& e) {
      battery.errors.emplace_back(dv, e.what());
    }
  }
  return battery;
}

inline std::vector<std::string> default_dv_list() {
  return {kDvNames.begin(), kDvNames.end()};
}

}  // namespace dispute
