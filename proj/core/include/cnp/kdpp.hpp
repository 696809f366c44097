#pragma once

// Exact sampling and marginals for the exponential-weights distribution over
// K-subsets of arms, Pr[I] = prod_{i in I} w_i / e_K(w). This is a K-DPP with
// diagonal kernel diag(w), so the eigenvectors are the standard basis and the
// whole sampler reduces to choosing which K "eigenvalues" to keep.

#include <cstddef>
#include <span>
#include <vector>

#include "cnp/random.hpp"
#include "cnp/types.hpp"

namespace cnp::kdpp {

// Nonnegative finite weights with at least one positive entry. Zeros are
// allowed because exp() of a very negative stabilized exponent underflows;
// the sampler treats them with the degenerate-limit rule below.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> values() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

// (N+1) x (K+1) table of elementary symmetric polynomials:
// at(n, k) = e_k(w_0, ..., w_{n-1}).
class EspTable {
 public:
  std::size_t arms() const noexcept { return arms_; }
  std::size_t max_order() const noexcept { return max_order_; }

  double at(std::size_t n, std::size_t k) const noexcept {
    return entries_[n * (max_order_ + 1) + k];
  }

  // e_K over all N weights, the normalizer of the K-subset distribution.
  double normalizer() const noexcept { return at(arms_, max_order_); }

 private:
  friend EspTable build_esp_table(const WeightVector& w, std::size_t k);

  EspTable(std::size_t arms, std::size_t max_order)
      : arms_(arms), max_order_(max_order), entries_((arms + 1) * (max_order + 1), 0.0) {}

  double& ref(std::size_t n, std::size_t k) noexcept { return entries_[n * (max_order_ + 1) + k]; }

  std::size_t arms_;
  std::size_t max_order_;
  std::vector<double> entries_;
};

// O(NK) recurrence e_k(1..n) = e_k(1..n-1) + w_n e_{k-1}(1..n-1).
// Throws InvalidInput if k > N or any weight is not strictly positive.
EspTable build_esp_table(const WeightVector& w, std::size_t k);

// Draws a K-subset with Pr[I] proportional to prod_{i in I} w_i. Returns the
// arm indices in ascending order.
//
// Backward conditional-inclusion scan: walking i = N-1 .. 0 with k arms still
// to pick, arm i is taken with probability w_i e_{k-1}(w_0..w_{i-1}) / e_k(w_0..w_i).
//
// If fewer than K weights are positive, all positive arms are taken and the
// remaining slots are filled uniformly from the zero-weight arms. When the
// linear-domain table under- or overflows the scan runs on log-weights.
std::vector<ArmIndex> sample_k_subset(const WeightVector& w, std::size_t k, Rng& rng);

// Pr[i in I] = w_i e_{K-1}(w without i) / e_K(w), O(NK).
double marginal_inclusion(const WeightVector& w, std::size_t k, ArmIndex i);

// All N marginals; they sum to K.
std::vector<double> marginals(const WeightVector& w, std::size_t k);

// w_i = exp(-eta (L_i - min_j L_j)). The shift cancels between numerator and
// normalizer, so the subset distribution is unchanged, and the largest weight
// is exactly 1.
WeightVector stabilize(std::span<const double> cumulative_estimates, double eta);

}  // namespace cnp::kdpp
