#include <benchmark/benchmark.h>

#include "spatialkit/grpo.h"
#include "spatialkit/reward.h"
#include "spatialkit/rng.h"

namespace {

using namespace spatialkit;

void BM_NumericalReward(benchmark::State& state) {
  const RewardConfig cfg;
  SplitMix64 rng(1);
  std::vector<std::pair<double, double>> pairs(1024);
  for (auto& [p, g] : pairs) {
    g = rng.uniform(0.1, 10);
    p = g * rng.uniform(0, 2);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [p, g] = pairs[i++ & 1023];
    benchmark::DoNotOptimize(numerical_reward(p, g, cfg));
  }
}
BENCHMARK(BM_NumericalReward);

void BM_ParseResponse(benchmark::State& state) {
  const std::string response =
      "<think>Let me think. The chair is near the table, wait, maybe the sofa. Hmm, I see.</think>"
      "<answer>B</answer>";
  for (auto _ : state) benchmark::DoNotOptimize(parse_response(response, AnswerHint::kChoice));
}
BENCHMARK(BM_ParseResponse);

void BM_GroupAdvantages(benchmark::State& state) {
  const GrpoConfig cfg;
  SplitMix64 rng(2);
  std::vector<double> rewards(static_cast<std::size_t>(state.range(0)));
  for (auto& r : rewards) r = rng.uniform(0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(group_advantages(rewards, cfg));
}
BENCHMARK(BM_GroupAdvantages)->Arg(8)->Arg(64);

}  // namespace
