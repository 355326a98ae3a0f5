#include "loom/dpo.hpp"

#include <algorithm>
#include <cmath>

#include "loom/errors.hpp"

namespace loom {
namespace {

double softplus(double x) {
  // log(1 + e^x) without overflow for large |x|.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double log_sum_exp(const std::vector<double>& values) {
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

}  // namespace

ToyPolicy::ToyPolicy(std::vector<std::string> vocab, std::vector<double> init_logits)
    : vocabulary(std::move(vocab)), logits(std::move(init_logits)) {
  if (vocabulary.size() != logits.size()) {
    throw Error("toy policy vocabulary and logits must have equal length");
  }
  if (vocabulary.empty()) throw EmptyInput("toy policy needs a non-empty vocabulary");
}

ToyPolicy ToyPolicy::uniform(std::vector<std::string> vocab) {
  std::vector<double> zeros(vocab.size(), 0.0);
  return ToyPolicy(std::move(vocab), std::move(zeros));
}

std::size_t ToyPolicy::index_of(const std::string& candidate) const {
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (vocabulary[i] == candidate) return i;
  }
  throw Error("candidate not in toy vocabulary: " + candidate);
}

std::vector<double> ToyPolicy::probabilities() const {
  const double lse = log_sum_exp(logits);
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) probs[i] = std::exp(logits[i] - lse);
  return probs;
}

double ToyPolicy::log_prob(const std::string&, const std::string& candidate) const {
  return logits[index_of(candidate)] - log_sum_exp(logits);
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double preference_prob(double r_plus, double r_minus) { return sigmoid(r_plus - r_minus); }

double dpo_delta(const PreferencePair& pair, const LogProbProvider& policy,
                 const LogProbProvider& reference, double beta) {
  const double lp_w = policy.log_prob(pair.prompt_context, pair.winner_text);
  const double lp_l = policy.log_prob(pair.prompt_context, pair.loser_text);
  const double lr_w = reference.log_prob(pair.prompt_context, pair.winner_text);
  const double lr_l = reference.log_prob(pair.prompt_context, pair.loser_text);
  for (double v : {lp_w, lp_l, lr_w, lr_l}) {
    if (!std::isfinite(v)) throw NonFiniteLogProb("log probability is not finite");
  }
  return beta * ((lp_w - lr_w) - (lp_l - lr_l));
}

double dpo_loss(const std::vector<PreferencePair>& pairs, const LogProbProvider& policy,
                const LogProbProvider& reference, const DpoConfig& cfg) {
  if (pairs.empty()) throw EmptyInput("dpo_loss needs at least one pair");
  double total = 0.0;
  for (const auto& pair : pairs) {
    // -log sigmoid(delta) = softplus(-delta)
    total += softplus(-dpo_delta(pair, policy, reference, cfg.beta));
  }
  return total / static_cast<double>(pairs.size());
}

std::vector<double> dpo_grad(const std::vector<PreferencePair>& pairs, const ToyPolicy& policy,
                             const LogProbProvider& reference, const DpoConfig& cfg) {
  if (pairs.empty()) throw EmptyInput("dpo_grad needs at least one pair");
  std::vector<double> grad(policy.logits.size(), 0.0);
  for (const auto& pair : pairs) {
    const double delta = dpo_delta(pair, policy, reference, cfg.beta);
    // d(-log sigmoid(delta))/d(delta) = sigmoid(delta) - 1. The softmax terms
    // of winner and loser cancel in d(delta)/d(logits), leaving beta times
    // the one-hot difference.
    const double coeff = (sigmoid(delta) - 1.0) * cfg.beta;
    grad[policy.index_of(pair.winner_text)] += coeff;
    grad[policy.index_of(pair.loser_text)] -= coeff;
  }
  for (double& g : grad) g /= static_cast<double>(pairs.size());
  return grad;
}

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& loss_fn,
    const std::vector<double>& point, double step) {
  std::vector<double> grad(point.size(), 0.0);
  std::vector<double> probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double hi = loss_fn(probe);
    probe[i] = point[i] - step;
    const double lo = loss_fn(probe);
    probe[i] = point[i];
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

std::vector<double> normalize_advantages(const std::vector<double>& rewards, double std_floor) {
  if (rewards.empty()) throw EmptyInput("normalize_advantages needs at least one reward");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double denom = std::max(std::sqrt(var), std_floor);
  std::vector<double> advantages(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - mean) / denom;
  }
  return advantages;
}

double clipped_surrogate(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double toy_train_step(ToyPolicy& policy, const std::vector<PreferencePair>& pairs,
                      const LogProbProvider& reference, double learning_rate,
                      const DpoConfig& cfg) {
  const double loss = dpo_loss(pairs, policy, reference, cfg);
  const std::vector<double> grad = dpo_grad(pairs, policy, reference, cfg);
  for (std::size_t i = 0; i < policy.logits.size(); ++i) {
    policy.logits[i] -= learning_rate * grad[i];
  }
  return loss;
}

}  // namespace loom
