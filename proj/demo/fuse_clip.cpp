// Fuses a hand-built context prior with two evidence distributions for a
// single ambiguous near-door clip and prints the posterior at a few prior
// strengths.

#include <cstdio>

#include "ctxpoe/fusion.hpp"

using namespace ctxpoe;

int main() {
  // Near-door prior: exits dominate, food is (almost) infeasible.
  const IntentDistribution prior = IntentDistribution::checked({0.85, 0.01, 0.14});
  // Behavioral evidence says the cat is just lying around.
  const IntentDistribution pose = IntentDistribution::checked({0.20, 0.15, 0.65});
  const IntentDistribution audio = IntentDistribution::checked({0.25, 0.25, 0.50});

  std::printf("%6s  %8s %8s %8s  argmax\n", "alpha", "EXIT", "FOOD", "IDLE");
  for (double alpha : {0.0, 0.5, 1.0, 1.2}) {
    const FusionResult fused = poe_fuse(prior, pose, audio, alpha);
    std::printf("%6.1f  %8.4f %8.4f %8.4f  %s\n", alpha, fused.dist.p[0], fused.dist.p[1],
                fused.dist.p[2], std::string(to_token(argmax_label(fused.dist))).c_str());
  }
  return 0;
}
