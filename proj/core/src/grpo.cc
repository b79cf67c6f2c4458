#include "spatialkit/grpo.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spatialkit/errors.h"
#include "spatialkit/rng.h"

namespace spatialkit {

std::vector<double> group_advantages(std::span<const double> rewards, const GrpoConfig& cfg) {
  const std::size_t n = rewards.size();
  if (n < 2) throw GroupTooSmall("group needs at least 2 rewards, got " + std::to_string(n));
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(var / static_cast<double>(n));
  std::vector<double> out(n, 0.0);
  if (!(std_dev > cfg.std_floor)) return out;
  for (std::size_t i = 0; i < n; ++i) out[i] = (rewards[i] - mean) / std_dev;
  return out;
}

double kl_estimate(double logp_new, double logp_ref) {
  const double d = logp_ref - logp_new;
  // expm1 keeps precision for small d, where exp(d) - 1 would cancel.
  return std::max(0.0, std::expm1(d) - d);
}

double grpo_objective(const PolicyGroup& group, std::span<const double> advantages,
                      const GrpoConfig& cfg) {
  const std::size_t n = group.rewards.size();
  if (group.logp_new.size() != n || group.logp_old.size() != n || group.logp_ref.size() != n ||
      advantages.size() != n) {
    throw LengthMismatch("group vectors differ in length");
  }
  if (n == 0) throw LengthMismatch("empty group");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = std::exp(group.logp_new[i] - group.logp_old[i]);
    const double a = advantages[i];
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    sum += std::min(ratio * a, clipped * a) - cfg.kl_beta * kl_estimate(group.logp_new[i], group.logp_ref[i]);
  }
  return sum / static_cast<double>(n);
}

namespace {

std::vector<double> log_softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  const double log_z = m + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - log_z;
  return out;
}

struct ToyProblem {
  std::vector<double> old_logits;
  std::vector<double> ref_logits;
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
  std::vector<double> advantages;
  GrpoConfig cfg;

  PolicyGroup group_at(std::span<const double> logits) const {
    const auto lp = log_softmax(logits);
    const auto lp_old = log_softmax(old_logits);
    const auto lp_ref = log_softmax(ref_logits);
    PolicyGroup g;
    g.rewards = rewards;
    for (std::size_t a : actions) {
      g.logp_new.push_back(lp[a]);
      g.logp_old.push_back(lp_old[a]);
      g.logp_ref.push_back(lp_ref[a]);
    }
    return g;
  }

  double objective(std::span<const double> logits) const {
    return grpo_objective(group_at(logits), advantages, cfg);
  }

  // d objective / d logits, assembled term by term.
  std::vector<double> analytic_gradient(std::span<const double> logits, int* clipped) const {
    const auto lp = log_softmax(logits);
    const PolicyGroup g = group_at(logits);
    const std::size_t k = logits.size();
    std::vector<double> grad(k, 0.0);
    for (std::size_t i = 0; i < actions.size(); ++i) {
      // d log pi(a) / d logit_j = [j == a] - pi_j
      std::vector<double> dlogp(k);
      for (std::size_t j = 0; j < k; ++j) dlogp[j] = (j == actions[i] ? 1.0 : 0.0) - std::exp(lp[j]);

      const double ratio = std::exp(g.logp_new[i] - g.logp_old[i]);
      const double a = advantages[i];
      const double unclipped = ratio * a;
      const double clipped_value = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * a;
      double coeff = 0.0;
      if (unclipped <= clipped_value) {
        coeff += ratio * a;
      } else if (clipped) {
        ++*clipped;
      }
      const double d = g.logp_ref[i] - g.logp_new[i];
      coeff += cfg.kl_beta * std::expm1(d);
      for (std::size_t j = 0; j < k; ++j) grad[j] += coeff * dlogp[j];
    }
    for (double& v : grad) v /= static_cast<double>(actions.size());
    return grad;
  }

  std::vector<double> fd_gradient(std::vector<double> logits, double h) const {
    std::vector<double> grad(logits.size());
    for (std::size_t j = 0; j < logits.size(); ++j) {
      const double saved = logits[j];
      logits[j] = saved + h;
      const double up = objective(logits);
      logits[j] = saved - h;
      const double down = objective(logits);
      logits[j] = saved;
      grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
  }
};

struct Comparison {
  double max_rel = 0.0;
  int checked = 0;
};

Comparison compare(std::span<const double> reference, std::span<const double> candidate, double floor) {
  Comparison c;
  for (std::size_t j = 0; j < reference.size(); ++j) {
    if (std::abs(reference[j]) <= floor) continue;
    ++c.checked;
    const double scale = std::max(std::abs(reference[j]), std::abs(candidate[j]));
    c.max_rel = std::max(c.max_rel, std::abs(reference[j] - candidate[j]) / scale);
  }
  return c;
}

std::size_t sample_categorical(std::span<const double> log_probs, SplitMix64& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < log_probs.size(); ++k) {
    acc += std::exp(log_probs[k]);
    if (u < acc) return k;
  }
  return log_probs.size() - 1;
}

}  // namespace

ToyPolicyReport toy_policy_check(int num_actions, std::uint64_t seed, const ToyPolicyOptions& opts) {
  if (num_actions < 2) throw ConfigError("toy policy needs at least 2 actions");
  SplitMix64 rng(seed);
  const std::size_t k = static_cast<std::size_t>(num_actions);

  std::vector<double> logits(k);
  for (double& l : logits) l = rng.normal();
  std::vector<double> reward_table(k);
  for (double& r : reward_table) r = rng.uniform();

  ToyProblem toy;
  toy.cfg.group_size = opts.group_size;
  toy.cfg.clip_eps = opts.clip_eps;
  toy.cfg.kl_beta = opts.kl_beta;
  toy.old_logits = logits;
  toy.ref_logits = logits;
  for (std::size_t j = 0; j < k; ++j) {
    toy.old_logits[j] += opts.policy_spread * rng.normal();
    toy.ref_logits[j] += opts.policy_spread * rng.normal();
  }
  const auto old_lp = log_softmax(toy.old_logits);
  for (int i = 0; i < opts.group_size; ++i) {
    const std::size_t a = sample_categorical(old_lp, rng);
    toy.actions.push_back(a);
    toy.rewards.push_back(reward_table[a]);
  }
  toy.advantages = group_advantages(toy.rewards, toy.cfg);

  ToyPolicyReport report;

  // (a) analytic vs finite differences.
  const auto analytic = toy.analytic_gradient(logits, &report.clipped_terms);
  const auto numeric = toy.fd_gradient(logits, opts.fd_step);
  const auto cmp = compare(analytic, numeric, opts.magnitude_floor);
  report.max_rel_error = cmp.max_rel;
  report.checked_components = cmp.checked;
  report.gradient_ok = cmp.max_rel < opts.rel_tolerance;

  // (b) beta = 0, old policy = current policy: the objective gradient is
  // REINFORCE with a group-mean baseline divided by the group std.
  {
    ToyProblem on_policy = toy;
    on_policy.old_logits = logits;
    on_policy.cfg.kl_beta = 0.0;
    const auto fd = on_policy.fd_gradient(logits, opts.fd_step);

    const auto lp = log_softmax(logits);
    const double n = static_cast<double>(toy.rewards.size());
    const double mean = std::accumulate(toy.rewards.begin(), toy.rewards.end(), 0.0) / n;
    double var = 0.0;
    for (double r : toy.rewards) var += (r - mean) * (r - mean);
    const double std_dev = std::sqrt(var / n);

    std::vector<double> reinforce(k, 0.0);
    for (std::size_t i = 0; i < toy.actions.size(); ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double dlogp = (j == toy.actions[i] ? 1.0 : 0.0) - std::exp(lp[j]);
        reinforce[j] += (toy.rewards[i] - mean) * dlogp / n;
      }
    }
    if (std_dev > toy.cfg.std_floor) {
      std::vector<double> scaled(k);
      for (std::size_t j = 0; j < k; ++j) scaled[j] = fd[j] * std_dev;
      const auto c = compare(reinforce, scaled, opts.magnitude_floor);
      report.reinforce_max_rel_error = c.max_rel;
      report.reinforce_ok = c.max_rel < opts.rel_tolerance;
    } else {
      report.reinforce_ok = std::all_of(fd.begin(), fd.end(), [](double g) { return g == 0.0; });
    }
  }

  // (c) equal rewards: zero advantages, so the surrogate gradient vanishes.
  {
    ToyProblem flat = toy;
    std::fill(flat.rewards.begin(), flat.rewards.end(), 0.5);
    flat.advantages = group_advantages(flat.rewards, flat.cfg);
    flat.cfg.kl_beta = 0.0;
    const auto g = flat.analytic_gradient(logits, nullptr);
    const auto fd = flat.fd_gradient(logits, opts.fd_step);
    report.zero_reward_ok =
        std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; }) &&
        std::all_of(fd.begin(), fd.end(), [](double v) { return v == 0.0; });
  }
  return report;
}

}  // namespace spatialkit
