#pragma once

// Linear epsilon-insensitive regression with squared loss and an L2 penalty:
//
//   P(w, b) = 1/2 |w|^2 + C * sum_i max(0, |w.x_i + b - y_i| - eps)^2
//
// The bias b is not penalized. P is convex and continuously differentiable,
// so it is minimized in the primal with a Newton-CG method on the
// generalized Hessian plus a backtracking line search.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bws/common.hpp"
#include "bws/features.hpp"
#include "bws/stats.hpp"

namespace bws {

struct Hyperparams {
  double C = 1.0;
  double epsilon = 0.1;
  /// Stop when the largest gradient component falls to this value.
  double tolerance = 1e-3;
  std::size_t max_iterations = 1000;
};

struct Example {
  FeatureVector features;
  double target = 0;
};

struct RegressionModel {
  std::map<std::string, double> weights;
  double bias = 0;
  Hyperparams hyperparams;

  bool operator==(const RegressionModel& o) const {
    return weights == o.weights && bias == o.bias && hyperparams.C == o.hyperparams.C &&
           hyperparams.epsilon == o.hyperparams.epsilon;
  }
};

struct TrainTrace {
  /// Objective before the first step and after every iteration.
  std::vector<double> objective;
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0;  ///< max-norm at exit
};

/// Training problem in column form. Columns are feature names in sorted
/// order; parameter vectors hold the weights followed by the bias.
class SvrProblem {
 public:
  SvrProblem(std::span<const Example> examples, double C, double epsilon) : C_(C), eps_(epsilon) {
    if (examples.size() < 2) throw ValidationError("training needs at least two examples");
    if (!(C > 0) || !std::isfinite(C)) throw ValidationError("C must be positive and finite");
    if (!(epsilon >= 0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be non-negative and finite");
    std::map<std::string, std::size_t> names;
    for (const auto& ex : examples) {
      if (!std::isfinite(ex.target)) throw ValidationError("non-finite training target");
      for (const auto& [k, v] : ex.features) {
        if (!std::isfinite(v)) throw ValidationError("non-finite value for feature '" + k + "'");
        names.emplace(k, 0);
      }
    }
    if (names.empty()) throw TrainingError("all training feature vectors are empty");
    for (auto& [k, col] : names) {
      col = names_.size();
      names_.push_back(k);
    }
    row_ptr_.push_back(0);
    for (const auto& ex : examples) {
      for (const auto& [k, v] : ex.features) {
        cols_.push_back(names.at(k));
        vals_.push_back(v);
      }
      row_ptr_.push_back(cols_.size());
      y_.push_back(ex.target);
    }
  }

  std::size_t rows() const { return y_.size(); }
  std::size_t dimension() const { return names_.size() + 1; }
  const std::vector<std::string>& feature_names() const { return names_; }

  /// w.x_i + b - y_i for every example.
  std::vector<double> residuals(std::span<const double> theta) const {
    std::vector<double> r(rows());
    for (std::size_t i = 0; i < rows(); ++i) r[i] = row_dot(i, theta) + theta.back() - y_[i];
    return r;
  }

  double objective(std::span<const double> theta) const { return objective_from(theta, residuals(theta)); }

  std::vector<double> gradient(std::span<const double> theta) const { return gradient_from(theta, residuals(theta)); }

  double objective_from(std::span<const double> theta, const std::vector<double>& r) const {
    double reg = 0;
    for (std::size_t j = 0; j + 1 < theta.size(); ++j) reg += theta[j] * theta[j];
    double loss = 0;
    for (double ri : r) {
      const double e = std::abs(ri) - eps_;
      if (e > 0) loss += e * e;
    }
    return 0.5 * reg + C_ * loss;
  }

  std::vector<double> gradient_from(std::span<const double> theta, const std::vector<double>& r) const {
    std::vector<double> g(theta.begin(), theta.end());
    g.back() = 0;
    for (std::size_t i = 0; i < rows(); ++i) {
      const double e = std::abs(r[i]) - eps_;
      if (e <= 0) continue;
      const double coef = 2 * C_ * std::copysign(e, r[i]);
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) g[cols_[p]] += coef * vals_[p];
      g.back() += coef;
    }
    return g;
  }

  /// Generalized Hessian times v over the examples outside the epsilon tube.
  /// `bias_damping` keeps the bias block positive definite when no example
  /// is active.
  std::vector<double> hessian_times(const std::vector<double>& r, std::span<const double> v,
                                    double bias_damping) const {
    std::vector<double> out(v.begin(), v.end());
    out.back() = bias_damping * v.back();
    for (std::size_t i = 0; i < rows(); ++i) {
      if (std::abs(r[i]) - eps_ <= 0) continue;
      const double coef = 2 * C_ * (row_dot(i, v) + v.back());
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out[cols_[p]] += coef * vals_[p];
      out.back() += coef;
    }
    return out;
  }

  /// X d + d_bias per example: the residual change along direction d.
  std::vector<double> direction_effect(std::span<const double> d) const {
    std::vector<double> z(rows());
    for (std::size_t i = 0; i < rows(); ++i) z[i] = row_dot(i, d) + d.back();
    return z;
  }

 private:
  double row_dot(std::size_t i, std::span<const double> theta) const {
    double s = 0;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += theta[cols_[p]] * vals_[p];
    return s;
  }

  double C_, eps_;
  std::vector<std::string> names_;
  std::vector<std::size_t> row_ptr_, cols_;
  std::vector<double> vals_, y_;
};

namespace detail {

inline double max_abs(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Conjugate gradients for H d = -g, stopped at a relative residual that
// tightens as the gradient shrinks.
inline std::vector<double> newton_direction(const SvrProblem& prob, const std::vector<double>& r,
                                            const std::vector<double>& g) {
  constexpr double kBiasDamping = 1e-8;
  const std::size_t n = g.size();
  std::vector<double> d(n, 0.0), res(n), p(n);
  for (std::size_t k = 0; k < n; ++k) res[k] = -g[k];
  p = res;
  double rr = dot(res, res);
  const double gnorm = std::sqrt(rr);
  const double target = std::min(0.1, std::sqrt(gnorm)) * gnorm;
  const std::size_t max_cg = std::min<std::size_t>(n, 500);
  for (std::size_t it = 0; it < max_cg && std::sqrt(rr) > target; ++it) {
    const auto hp = prob.hessian_times(r, p, kBiasDamping);
    const double php = dot(p, hp);
    if (!(php > 0)) break;
    const double alpha = rr / php;
    for (std::size_t k = 0; k < n; ++k) {
      d[k] += alpha * p[k];
      res[k] -= alpha * hp[k];
    }
    const double rr_new = dot(res, res);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = res[k] + beta * p[k];
  }
  if (dot(d, g) >= 0) {  // CG made no progress; fall back to steepest descent
    for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
  }
  return d;
}

}  // namespace detail

/// Fits the model. Deterministic for a given example order.
inline RegressionModel train(std::span<const Example> examples, const Hyperparams& hp = {},
                             TrainTrace* trace = nullptr) {
  const SvrProblem prob(examples, hp.C, hp.epsilon);
  std::vector<double> theta(prob.dimension(), 0.0);
  auto r = prob.residuals(theta);
  double f = prob.objective_from(theta, r);
  auto g = prob.gradient_from(theta, r);
  TrainTrace local;
  TrainTrace& tr = trace ? *trace : local;
  tr = {};
  tr.objective.push_back(f);

  for (std::size_t it = 0; it < hp.max_iterations; ++it) {
    if (detail::max_abs(g) <= hp.tolerance) {
      tr.converged = true;
      break;
    }
    const auto d = detail::newton_direction(prob, r, g);
    const auto z = prob.direction_effect(d);
    const double slope = detail::dot(g, d);
    // Along theta + a*d the residuals are r + a*z, so trial points are cheap.
    std::vector<double> trial_theta(theta.size()), trial_r(r.size());
    double a = 1.0, trial_f = f;
    bool accepted = false;
    while (a > 1e-14) {
      for (std::size_t k = 0; k < theta.size(); ++k) trial_theta[k] = theta[k] + a * d[k];
      for (std::size_t i = 0; i < r.size(); ++i) trial_r[i] = r[i] + a * z[i];
      trial_f = prob.objective_from(trial_theta, trial_r);
      if (trial_f <= f + 1e-4 * a * slope) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    tr.iterations = it + 1;
    if (!accepted) break;  // no further decrease representable
    theta.swap(trial_theta);
    r = prob.residuals(theta);  // recompute to avoid drift from the incremental update
    f = prob.objective_from(theta, r);
    g = prob.gradient_from(theta, r);
    tr.objective.push_back(f);
  }
  tr.gradient_norm = detail::max_abs(g);
  if (!tr.converged && tr.gradient_norm <= hp.tolerance) tr.converged = true;

  RegressionModel m;
  m.hyperparams = hp;
  const auto& names = prob.feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) m.weights.emplace(names[j], theta[j]);
  m.bias = theta.back();
  return m;
}

inline RegressionModel train(const std::vector<Example>& examples, const Hyperparams& hp = {},
                             TrainTrace* trace = nullptr) {
  return train(std::span<const Example>(examples), hp, trace);
}

/// w.x + b; features unknown to the model contribute nothing. Not clipped.
inline double predict(const RegressionModel& model, const FeatureVector& features) {
  double s = model.bias;
  for (const auto& [k, v] : features) {
    auto it = model.weights.find(k);
    if (it != model.weights.end()) s += it->second * v;
  }
  return s;
}

struct EvalResult {
  double pearson = 0;
  double spearman = 0;
  std::size_t n = 0;
  std::optional<double> subset_threshold;
};

inline EvalResult evaluate(const RegressionModel& model, std::span<const Example> test) {
  if (test.size() < 2) throw ValidationError("evaluation needs at least two test examples");
  std::vector<double> pred, gold;
  pred.reserve(test.size());
  gold.reserve(test.size());
  for (const auto& ex : test) {
    pred.push_back(predict(model, ex.features));
    gold.push_back(ex.target);
  }
  if (std::all_of(gold.begin(), gold.end(), [&](double g) { return g == gold.front(); })) {
    throw UndefinedStatistic("gold scores are constant; correlation undefined");
  }
  EvalResult r;
  r.n = test.size();
  r.pearson = pearson(pred, gold);
  r.spearman = spearman(pred, gold);
  return r;
}

/// Evaluation restricted to examples whose gold score is at least `threshold`.
inline EvalResult evaluate_subset(const RegressionModel& model, std::span<const Example> test,
                                  double threshold = 0.5) {
  std::vector<Example> kept;
  for (const auto& ex : test) {
    if (ex.target >= threshold) kept.push_back(ex);
  }
  if (kept.size() < 2) {
    throw ValidationError("fewer than two test examples have gold >= " + format_double(threshold));
  }
  auto r = evaluate(model, kept);
  r.subset_threshold = threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Model files: one header line, then "feature<TAB>weight" rows in name order.

inline std::string serialize_model(const RegressionModel& m) {
  std::string out = "#bws-model\tC=" + format_double(m.hyperparams.C) +
                    "\tepsilon=" + format_double(m.hyperparams.epsilon) + "\tbias=" + format_double(m.bias) +
                    "\tfeatures=" + std::to_string(m.weights.size()) + "\n";
  for (const auto& [k, w] : m.weights) {
    if (k.find_first_of("\t\n\r") != std::string::npos) throw ValidationError("feature name contains a tab or newline");
    out += k + '\t' + format_double(w) + '\n';
  }
  return out;
}

inline RegressionModel parse_model(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("empty model file", 0);
  const auto head = split(lines[0], '\t');
  if (head[0] != "#bws-model") throw ParseError("missing '#bws-model' header", 1);
  RegressionModel m;
  std::optional<std::size_t> declared;
  bool have_bias = false;
  for (std::size_t k = 1; k < head.size(); ++k) {
    const auto eq = head[k].find('=');
    if (eq == std::string_view::npos) throw ParseError("malformed header field", 1);
    const auto key = head[k].substr(0, eq);
    const auto value = head[k].substr(eq + 1);
    if (key == "features") {
      auto v = parse_int(value);
      if (!v || *v < 0) throw ParseError("malformed feature count", 1);
      declared = static_cast<std::size_t>(*v);
      continue;
    }
    auto v = parse_double(value);
    if (!v || !std::isfinite(*v)) throw ParseError("malformed value for '" + std::string(key) + "'", 1);
    if (key == "C") m.hyperparams.C = *v;
    if (key == "epsilon") m.hyperparams.epsilon = *v;
    if (key == "bias") {
      m.bias = *v;
      have_bias = true;
    }
  }
  if (!have_bias) throw ParseError("model header lacks bias=", 1);
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto tab = lines[ln].rfind('\t');
    if (tab == std::string_view::npos) throw ParseError("expected feature<TAB>weight", ln + 1);
    auto w = parse_double(lines[ln].substr(tab + 1));
    if (!w || !std::isfinite(*w)) throw ParseError("malformed weight", ln + 1);
    if (!m.weights.emplace(std::string(lines[ln].substr(0, tab)), *w).second) {
      throw ParseError("duplicate feature", ln + 1);
    }
  }
  if (declared && *declared != m.weights.size()) {
    throw ParseError("header declares " + std::to_string(*declared) + " features, file has " +
                         std::to_string(m.weights.size()),
                     1);
  }
  return m;
}

inline RegressionModel load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace bws
