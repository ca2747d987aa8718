#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "claimnet/dataset.hpp"
#include "claimnet/error.hpp"
#include "claimnet/metrics.hpp"
#include "claimnet/random.hpp"

namespace claimnet {

struct LogisticOptions {
  double tolerance = 1e-10;  // relative log-likelihood change
  int max_iterations = 100;
};

struct SelectionStep {
  int step = 0;
  std::string action;  // "add" or "remove"
  std::string feature;
  double criterion = 0.0;  // AIC after the move
};

// Logistic regression fit on z-standardized features. Coefficients live in
// the standardized space; the stored means/stddevs (training data only) make
// predictions invariant to affine rescaling of raw inputs.
struct ModelFit {
  double intercept = 0.0;
  std::vector<std::string> features;
  std::vector<double> coefficients;
  std::vector<double> means;
  std::vector<double> stddevs;
  std::vector<SelectionStep> selection_trace;
  std::vector<std::string> dropped_constant;

  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double gradient_max_norm = 0.0;
  bool perfect_separation = false;
  bool collinear = false;

  double predict_standardized(std::span<const double> z) const {
    double eta = intercept;
    for (std::size_t k = 0; k < coefficients.size(); ++k) eta += coefficients[k] * z[k];
    return 1.0 / (1.0 + std::exp(-eta));
  }

  /// Probabilities for a dataset; features are looked up by name.
  std::vector<double> predict(const Dataset& ds) const {
    std::vector<std::size_t> cols(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) cols[k] = ds.feature_index(features[k]);
    std::vector<double> out(ds.n_rows());
    std::vector<double> z(features.size());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      for (std::size_t k = 0; k < features.size(); ++k) {
        z[k] = (ds.at(r, cols[k]) - means[k]) / stddevs[k];
      }
      out[r] = predict_standardized(z);
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["intercept"] = intercept;
    nlohmann::json coef = nlohmann::json::object();
    nlohmann::json stand = nlohmann::json::object();
    for (std::size_t k = 0; k < features.size(); ++k) {
      coef[features[k]] = coefficients[k];
      stand[features[k]] = {{"mean", means[k]}, {"stddev", stddevs[k]}};
    }
    j["coefficients"] = coef;
    j["standardization"] = stand;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& s : selection_trace) {
      trace.push_back({{"step", s.step}, {"action", s.action}, {"feature", s.feature}, {"criterion", s.criterion}});
    }
    j["selection_trace"] = trace;
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["log_likelihood"] = log_likelihood;
    j["aic"] = aic;
    j["perfect_separation"] = perfect_separation;
    j["collinear"] = collinear;
    j["dropped_constant"] = dropped_constant;
    return j;
  }

  static ModelFit from_json(const nlohmann::json& j) {
    ModelFit fit;
    fit.intercept = j.at("intercept").get<double>();
    for (const auto& [name, value] : j.at("coefficients").items()) {
      fit.features.push_back(name);
      fit.coefficients.push_back(value.get<double>());
      const auto& st = j.at("standardization").at(name);
      fit.means.push_back(st.at("mean").get<double>());
      fit.stddevs.push_back(st.at("stddev").get<double>());
    }
    fit.converged = j.value("converged", true);
    fit.log_likelihood = j.value("log_likelihood", 0.0);
    fit.aic = j.value("aic", 0.0);
    return fit;
  }
};

namespace detail {

inline double sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double bernoulli_ll(std::span<const double> prob, std::span<const int> y) {
  double ll = 0.0;
  constexpr double eps = 1e-15;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = std::clamp(prob[i], eps, 1.0 - eps);
    ll += y[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return ll;
}

}  // namespace detail

/// Maximum-likelihood logistic regression via iteratively reweighted least
/// squares with step halving. Constant columns are dropped with a warning;
/// rank deficiency sets the collinearity flag; a log-likelihood that climbs to
/// (numerically) zero marks perfect separation.
inline ModelFit fit_logistic(const Dataset& ds, std::span<const std::size_t> feature_cols,
                             const LogisticOptions& opts = {}) {
  const std::size_t n = ds.n_rows();
  if (n == 0) throw DataError("cannot fit on an empty dataset");

  ModelFit fit;
  std::vector<std::size_t> cols;
  for (std::size_t c : feature_cols) {
    const auto col = ds.column(c);
    if (stddev(col) == 0.0) {
      fit.dropped_constant.push_back(ds.feature_names()[c]);
      continue;
    }
    cols.push_back(c);
  }
  const std::size_t p = cols.size();
  if (n <= p + 1) throw DataError("need more rows than parameters to fit");

  for (std::size_t c : cols) {
    fit.features.push_back(ds.feature_names()[c]);
    const auto col = ds.column(c);
    const double mu = mean(col);
    const double sd = stddev(col, mu);
    fit.means.push_back(mu);
    fit.stddevs.push_back(sd);
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p + 1));
  Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    x(static_cast<Eigen::Index>(r), 0) = 1.0;
    for (std::size_t k = 0; k < p; ++k) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k + 1)) =
          (ds.at(r, cols[k]) - fit.means[k]) / fit.stddevs[k];
    }
    yv(static_cast<Eigen::Index>(r)) = ds.target(r);
  }

  if (p > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < static_cast<Eigen::Index>(p + 1)) fit.collinear = true;
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
  std::vector<double> prob(n, 0.5);
  const std::vector<int>& y = ds.targets();
  double ll = detail::bernoulli_ll(prob, y);

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    fit.iterations = iter;
    // Newton step: (X^T W X) delta = X^T (y - mu)
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p + 1),
                                                 static_cast<Eigen::Index>(p + 1));
    for (std::size_t r = 0; r < n; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const double mu = prob[r];
      const double w = std::max(mu * (1.0 - mu), 1e-10);
      grad += (yv(ri) - mu) * x.row(ri).transpose();
      hess += w * x.row(ri).transpose() * x.row(ri);
    }
    Eigen::VectorXd delta = hess.ldlt().solve(grad);

    // step halving if the likelihood does not improve
    double ll_new = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta_new;
    std::vector<double> prob_new(n);
    for (int half = 0; half < 30; ++half) {
      beta_new = beta + delta;
      for (std::size_t r = 0; r < n; ++r) {
        prob_new[r] = detail::sigmoid(x.row(static_cast<Eigen::Index>(r)).dot(beta_new));
      }
      ll_new = detail::bernoulli_ll(prob_new, y);
      if (ll_new >= ll || half == 29) break;
      delta *= 0.5;
    }
    beta = beta_new;
    prob = prob_new;
    const double rel_change = std::abs(ll_new - ll) / (std::abs(ll) + 1e-12);
    ll = ll_new;
    if (rel_change < opts.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.intercept = beta(0);
  fit.coefficients.assign(beta.data() + 1, beta.data() + 1 + p);
  fit.log_likelihood = ll;
  fit.aic = 2.0 * static_cast<double>(p + 1) - 2.0 * ll;
  if (ll > -1e-6 * static_cast<double>(n)) fit.perfect_separation = true;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
  for (std::size_t r = 0; r < n; ++r) {
    grad += (yv(static_cast<Eigen::Index>(r)) - prob[r]) * x.row(static_cast<Eigen::Index>(r)).transpose();
  }
  fit.gradient_max_norm = grad.cwiseAbs().maxCoeff();
  return fit;
}

inline ModelFit fit_logistic(const Dataset& ds, const LogisticOptions& opts = {}) {
  const auto cols = ds.all_columns();
  return fit_logistic(ds, cols, opts);
}

/// Greedy forward/backward selection by AIC: keep applying the single best
/// add-or-remove move while it improves the criterion. The full move history
/// lands in the selection trace.
inline ModelFit stepwise_select(const Dataset& ds, std::span<const std::size_t> candidates,
                                const LogisticOptions& opts = {}) {
  if (candidates.empty()) throw DataError("stepwise selection needs at least one candidate feature");

  std::vector<std::size_t> selected;
  std::vector<std::size_t> pool(candidates.begin(), candidates.end());
  std::vector<SelectionStep> trace;

  ModelFit best_fit = fit_logistic(ds, selected, opts);
  double best_aic = best_fit.aic;
  int step = 0;

  while (true) {
    double move_aic = best_aic;
    ModelFit move_fit;
    std::size_t move_feature = 0;
    bool move_is_add = true;
    bool found = false;

    for (std::size_t f : pool) {
      std::vector<std::size_t> trial = selected;
      trial.push_back(f);
      ModelFit fit = fit_logistic(ds, trial, opts);
      if (fit.aic < move_aic - 1e-9) {
        move_aic = fit.aic;
        move_fit = std::move(fit);
        move_feature = f;
        move_is_add = true;
        found = true;
      }
    }
    for (std::size_t f : selected) {
      std::vector<std::size_t> trial;
      for (std::size_t s : selected) {
        if (s != f) trial.push_back(s);
      }
      ModelFit fit = fit_logistic(ds, trial, opts);
      if (fit.aic < move_aic - 1e-9) {
        move_aic = fit.aic;
        move_fit = std::move(fit);
        move_feature = f;
        move_is_add = false;
        found = true;
      }
    }
    if (!found) break;

    ++step;
    trace.push_back({step, move_is_add ? "add" : "remove", ds.feature_names()[move_feature], move_aic});
    if (move_is_add) {
      selected.push_back(move_feature);
      pool.erase(std::remove(pool.begin(), pool.end(), move_feature), pool.end());
    } else {
      selected.erase(std::remove(selected.begin(), selected.end(), move_feature), selected.end());
      pool.push_back(move_feature);
    }
    best_aic = move_aic;
    best_fit = std::move(move_fit);
  }

  best_fit.selection_trace = std::move(trace);
  return best_fit;
}

struct FeatureImportance {
  std::string feature;
  double importance = 0.0;  // mean AUROC drop across shuffles
};

/// Permutation importance on a validation set: mean AUROC drop over `repeats`
/// shuffles per column. Descending order, ties broken by feature name.
inline std::vector<FeatureImportance> permutation_importance(const ModelFit& fit, const Dataset& validation,
                                                             int repeats, const Rng& base_rng) {
  if (repeats < 1) throw ConfigError("permutation importance needs repeats >= 1");
  const auto base_scores = fit.predict(validation);
  const double base_auroc = auroc(base_scores, validation.targets());

  std::vector<FeatureImportance> out;
  for (std::size_t c = 0; c < validation.n_features(); ++c) {
    double drop_sum = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      Rng rng = base_rng.split(c * 1000003ull + static_cast<std::uint64_t>(rep));
      Dataset shuffled = validation;
      std::vector<std::size_t> perm(validation.n_rows());
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      for (std::size_t r = 0; r < validation.n_rows(); ++r) {
        shuffled.set(r, c, validation.at(perm[r], c));
      }
      const auto scores = fit.predict(shuffled);
      drop_sum += base_auroc - auroc(scores, validation.targets());
    }
    out.push_back({validation.feature_names()[c], drop_sum / repeats});
  }
  std::sort(out.begin(), out.end(), [](const FeatureImportance& a, const FeatureImportance& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.feature < b.feature;
  });
  return out;
}

}  // namespace claimnet
