#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spatialkit/config.h"

namespace spatialkit {

// Sequence-level log-probabilities and rewards for one sampled group.
struct PolicyGroup {
  std::vector<double> rewards;
  std::vector<double> logp_new;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};

// (r_i - mean) / std with the population standard deviation. All zeros when
// std <= cfg.std_floor. Throws GroupTooSmall for fewer than two rewards.
std::vector<double> group_advantages(std::span<const double> rewards, const GrpoConfig& cfg);

// exp(d) - d - 1 with d = logp_ref - logp_new. Non-negative, zero iff d = 0.
double kl_estimate(double logp_new, double logp_ref);

// Clipped surrogate minus the KL penalty, averaged over the group.
// Throws LengthMismatch when the vectors disagree in length.
double grpo_objective(const PolicyGroup& group, std::span<const double> advantages,
                      const GrpoConfig& cfg);

struct ToyPolicyOptions {
  int group_size = 8;
  double clip_eps = 0.2;
  double kl_beta = 0.01;
  double fd_step = 1e-5;
  double rel_tolerance = 1e-4;
  double magnitude_floor = 1e-8;
  // Spread of the old/reference logits around the current ones. Large enough
  // that some importance ratios leave the clip range.
  double policy_spread = 0.3;
};

struct ToyPolicyReport {
  bool gradient_ok = false;
  double max_rel_error = 0.0;
  int checked_components = 0;

  // beta = 0 and rho = 1: objective gradient vs REINFORCE with a mean
  // baseline scaled by 1 / std.
  bool reinforce_ok = false;
  double reinforce_max_rel_error = 0.0;

  // All-equal rewards give an identically zero gradient.
  bool zero_reward_ok = false;

  int clipped_terms = 0;

  bool passed() const { return gradient_ok && reinforce_ok && zero_reward_ok; }
};

// Builds a categorical policy over `num_actions` actions, samples a group
// from the old policy and checks the analytic gradient of grpo_objective
// with respect to the logits against central finite differences.
ToyPolicyReport toy_policy_check(int num_actions, std::uint64_t seed, const ToyPolicyOptions& opts = {});

}  // namespace spatialkit
