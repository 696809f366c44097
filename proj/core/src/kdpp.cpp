#include "cnp/kdpp.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cnp/errors.hpp"

namespace cnp::kdpp {

namespace {

constexpr double kProbabilityTolerance = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double checked_probability(double p) {
  if (!(p >= -kProbabilityTolerance && p <= 1.0 + kProbabilityTolerance)) {
    throw NumericalInstability("inclusion probability " + std::to_string(p) + " outside [0, 1]");
  }
  return std::clamp(p, 0.0, 1.0);
}

void check_order(std::size_t n, std::size_t k) {
  if (k > n) {
    throw InvalidInput("subset size " + std::to_string(k) + " exceeds arm count " +
                       std::to_string(n));
  }
}

bool is_usable(double x) { return x >= DBL_MIN && x <= DBL_MAX; }

// Every entry that should be positive (k <= n) is a normal double.
bool table_is_well_scaled(const EspTable& table) {
  for (std::size_t n = 0; n <= table.arms(); ++n) {
    for (std::size_t k = 0; k <= std::min(n, table.max_order()); ++k) {
      if (!is_usable(table.at(n, k))) return false;
    }
  }
  return true;
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Same recurrence as build_esp_table, on log-weights.
std::vector<double> log_esp_table(std::span<const double> log_w, std::size_t k) {
  const std::size_t n_arms = log_w.size();
  std::vector<double> table((n_arms + 1) * (k + 1), kNegInf);
  auto at = [&](std::size_t n, std::size_t j) -> double& { return table[n * (k + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t n = 1; n <= n_arms; ++n) {
    at(n, 0) = 0.0;
    for (std::size_t j = 1; j <= std::min(n, k); ++j) {
      at(n, j) = log_add(at(n - 1, j), log_w[n - 1] + at(n - 1, j - 1));
    }
  }
  return table;
}

// Positive weights only, so the regular path never sees zeros.
struct PositiveView {
  std::vector<ArmIndex> arms;
  std::vector<double> weights;
};

PositiveView positive_part(const WeightVector& w) {
  PositiveView view;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) {
      view.arms.push_back(i);
      view.weights.push_back(w[i]);
    }
  }
  return view;
}

std::vector<std::size_t> scan_linear(const EspTable& table, std::span<const double> w,
                                     std::size_t k, Rng& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = w.size(); i > 0 && k > 0; --i) {
    const double p = checked_probability(w[i - 1] * table.at(i - 1, k - 1) / table.at(i, k));
    if (uniform01(rng) < p) {
      picked.push_back(i - 1);
      --k;
    }
  }
  return picked;
}

std::vector<std::size_t> scan_log(std::span<const double> w, std::size_t k, Rng& rng) {
  std::vector<double> log_w(w.size());
  std::transform(w.begin(), w.end(), log_w.begin(), [](double x) { return std::log(x); });
  const std::size_t order = k;
  const std::vector<double> table = log_esp_table(log_w, order);
  auto at = [&](std::size_t n, std::size_t j) { return table[n * (order + 1) + j]; };

  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = w.size(); i > 0 && k > 0; --i) {
    const double p = checked_probability(std::exp(log_w[i - 1] + at(i - 1, k - 1) - at(i, k)));
    if (uniform01(rng) < p) {
      picked.push_back(i - 1);
      --k;
    }
  }
  return picked;
}

// e_{k-1}(w without i) / e_k(w) * w_i for strictly positive weights.
double marginal_positive(std::span<const double> w, std::size_t k, std::size_t i) {
  if (k == 0) return 0.0;
  std::vector<double> rest;
  rest.reserve(w.size() - 1);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (j != i) rest.push_back(w[j]);
  }
  const EspTable full = build_esp_table(WeightVector(std::vector<double>(w.begin(), w.end())), k);
  const double z = full.normalizer();
  double z_rest = 1.0;
  bool scaled = is_usable(z);
  if (k - 1 > 0) {
    const EspTable without = build_esp_table(WeightVector(rest), k - 1);
    z_rest = without.normalizer();
    scaled = scaled && is_usable(z_rest);
  }
  if (scaled) {
    const double p = w[i] * z_rest / z;
    if (is_usable(p) || p == 0.0 || p == 1.0) return checked_probability(p);
  }

  std::vector<double> log_w(w.size());
  std::transform(w.begin(), w.end(), log_w.begin(), [](double x) { return std::log(x); });
  std::vector<double> log_rest;
  log_rest.reserve(rest.size());
  for (double x : rest) log_rest.push_back(std::log(x));
  const double log_z = log_esp_table(log_w, k)[w.size() * (k + 1) + k];
  const double log_z_rest = log_esp_table(log_rest, k - 1)[rest.size() * k + (k - 1)];
  return checked_probability(std::exp(log_w[i] + log_z_rest - log_z));
}

}  // namespace

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidInput("weight vector is empty");
  bool any_positive = false;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double x = weights_[i];
    if (!std::isfinite(x) || x < 0.0) {
      throw InvalidInput("weight " + std::to_string(i) + " is " + std::to_string(x));
    }
    any_positive = any_positive || x > 0.0;
  }
  if (!any_positive) throw InvalidInput("all weights are zero");
}

EspTable build_esp_table(const WeightVector& w, std::size_t k) {
  const std::size_t n_arms = w.size();
  check_order(n_arms, k);
  for (std::size_t i = 0; i < n_arms; ++i) {
    if (!(w[i] > 0.0)) throw InvalidInput("weight " + std::to_string(i) + " is not positive");
  }

  EspTable table(n_arms, k);
  table.ref(0, 0) = 1.0;
  for (std::size_t n = 1; n <= n_arms; ++n) {
    table.ref(n, 0) = 1.0;
    for (std::size_t j = 1; j <= std::min(n, k); ++j) {
      table.ref(n, j) = table.at(n - 1, j) + w[n - 1] * table.at(n - 1, j - 1);
    }
  }
  return table;
}

std::vector<ArmIndex> sample_k_subset(const WeightVector& w, std::size_t k, Rng& rng) {
  check_order(w.size(), k);
  const PositiveView positive = positive_part(w);

  std::vector<ArmIndex> subset;
  subset.reserve(k);
  if (positive.arms.size() <= k) {
    subset = positive.arms;
    std::vector<ArmIndex> zeros;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) zeros.push_back(i);
    }
    const std::size_t missing = k - subset.size();
    // Partial Fisher-Yates: the first `missing` slots become a uniform draw.
    for (std::size_t s = 0; s < missing; ++s) {
      const auto j = s + static_cast<std::size_t>(uniform_index(rng, zeros.size() - s));
      std::swap(zeros[s], zeros[j]);
      subset.push_back(zeros[s]);
    }
  } else {
    const std::span<const double> pw = positive.weights;
    const EspTable table = build_esp_table(WeightVector(positive.weights), k);
    const std::vector<std::size_t> local =
        table_is_well_scaled(table) ? scan_linear(table, pw, k, rng) : scan_log(pw, k, rng);
    if (local.size() != k) throw NumericalInstability("subset scan picked too few arms");
    for (std::size_t idx : local) subset.push_back(positive.arms[idx]);
  }
  std::sort(subset.begin(), subset.end());
  return subset;
}

double marginal_inclusion(const WeightVector& w, std::size_t k, ArmIndex i) {
  check_order(w.size(), k);
  if (i >= w.size()) throw InvalidInput("arm index " + std::to_string(i) + " out of range");

  const PositiveView positive = positive_part(w);
  const std::size_t m = positive.arms.size();
  if (m <= k) {
    if (w[i] > 0.0) return 1.0;
    return static_cast<double>(k - m) / static_cast<double>(w.size() - m);
  }
  if (w[i] == 0.0) return 0.0;
  const auto local = static_cast<std::size_t>(
      std::lower_bound(positive.arms.begin(), positive.arms.end(), i) - positive.arms.begin());
  return marginal_positive(positive.weights, k, local);
}

std::vector<double> marginals(const WeightVector& w, std::size_t k) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = marginal_inclusion(w, k, i);
  return out;
}

WeightVector stabilize(std::span<const double> cumulative_estimates, double eta) {
  if (cumulative_estimates.empty()) throw InvalidInput("no cumulative estimates");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("learning rate must be positive");
  for (double x : cumulative_estimates) {
    if (!std::isfinite(x)) throw InvalidInput("non-finite cumulative estimate");
  }
  const double lowest = *std::min_element(cumulative_estimates.begin(), cumulative_estimates.end());
  std::vector<double> weights(cumulative_estimates.size());
  std::transform(cumulative_estimates.begin(), cumulative_estimates.end(), weights.begin(),
                 [&](double x) { return std::exp(-eta * (x - lowest)); });
  return WeightVector(std::move(weights));
}

}  // namespace cnp::kdpp
