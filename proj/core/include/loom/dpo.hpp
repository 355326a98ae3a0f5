#pragma once

#include <functional>
#include <string>
#include <vector>

#include "loom/reward.hpp"

namespace loom {

// Log probability of a candidate under some model. Two instances feed every
// preference computation: the policy being trained and the frozen reference.
struct LogProbProvider {
  virtual ~LogProbProvider() = default;
  virtual double log_prob(const std::string& context, const std::string& candidate) const = 0;
};

// Tabular softmax policy over a finite candidate vocabulary. Exists so the
// preference loss and its analytic gradient can be verified numerically
// end to end without any language model.
struct ToyPolicy final : LogProbProvider {
  std::vector<std::string> vocabulary;
  std::vector<double> logits;

  ToyPolicy() = default;
  ToyPolicy(std::vector<std::string> vocab, std::vector<double> init_logits);

  static ToyPolicy uniform(std::vector<std::string> vocab);

  std::size_t index_of(const std::string& candidate) const;
  std::vector<double> probabilities() const;
  double log_prob(const std::string& context, const std::string& candidate) const override;
};

struct DpoConfig {
  double beta = 0.1;
  double margin = 0.0;
  double clip_epsilon = 0.2;
  double std_floor = 1e-8;
};

double sigmoid(double x);

// Bradley-Terry probability that the first candidate is preferred.
double preference_prob(double r_plus, double r_minus);

// Preference contrast:
// beta * [(log pi(z+) - log ref(z+)) - (log pi(z-) - log ref(z-))].
// Throws NonFiniteLogProb when any provider returns a non-finite value.
double dpo_delta(const PreferencePair& pair, const LogProbProvider& policy,
                 const LogProbProvider& reference, double beta);

// Mean over pairs of -log sigmoid(delta), computed via a stable softplus.
// Throws EmptyInput on an empty pair list.
double dpo_loss(const std::vector<PreferencePair>& pairs, const LogProbProvider& policy,
                const LogProbProvider& reference, const DpoConfig& cfg);

// Analytic gradient of dpo_loss with respect to the toy policy's logits.
// Uses d log pi / d logits = indicator - softmax; the softmax terms cancel
// between winner and loser, leaving
// (sigmoid(delta) - 1) * beta * (onehot(winner) - onehot(loser)) per pair.
std::vector<double> dpo_grad(const std::vector<PreferencePair>& pairs, const ToyPolicy& policy,
                             const LogProbProvider& reference, const DpoConfig& cfg);

// Central-difference gradient oracle: (L(x + h e_i) - L(x - h e_i)) / 2h.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& loss_fn,
    const std::vector<double>& point, double step);

// (R_i - mean) / max(population_std, std_floor). Throws EmptyInput.
std::vector<double> normalize_advantages(const std::vector<double>& rewards, double std_floor);

// min(ratio * advantage, clip(ratio, 1 - eps, 1 + eps) * advantage).
double clipped_surrogate(double ratio, double advantage, double clip_epsilon);

// One gradient-descent step on the toy logits; returns the pre-step loss.
double toy_train_step(ToyPolicy& policy, const std::vector<PreferencePair>& pairs,
                      const LogProbProvider& reference, double learning_rate,
                      const DpoConfig& cfg);

}  // namespace loom
