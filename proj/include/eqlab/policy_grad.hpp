#pragma once

#include <span>
#include <vector>

#include "eqlab/tabular_policy.hpp"
#include "eqlab/treeplex_ops.hpp"

namespace eqlab::pg {

// Mixture of opponent sequence policies, newest one double-weighted:
// alpha_i = 2 for the latest entry and 1 otherwise, normalized by
// mu = sum_j eta * alpha_j. The double weight is the optimistic term of the
// fictitious-play update recast as a sampling distribution.
struct OpponentMixture {
  std::vector<efg::SequencePolicy> opponents;
  Vector alpha_tilde;
  double mu = 0.0;
  double eta = 0.0;

  int size() const { return static_cast<int>(opponents.size()); }
};

OpponentMixture make_opponent_mixture(std::vector<efg::SequencePolicy> opponents,
                                      double eta);

int sample_opponent(const OpponentMixture& mix, Rng& rng);

// d return / d pi(a|s) = rho(s) Q(s,a) over the player's edges; zero at
// unreached information states.
Vector policy_gradient(const efg::GameTree& gt, const efg::SequencePolicy& own,
                       const efg::SequencePolicy& opp, int player);

// d dilated_entropy / d pi(a|s), treating each conditional entry as a free
// coordinate of the behavioral parametrization.
Vector dilated_entropy_pi_gradient(const efg::Treeplex& tp,
                                   const efg::SequencePolicy& x);

// sum_i alpha_tilde_i * ( <F_i, x> + (1/mu) psi(x) ) with <F_i, x> the
// first player's loss (negated return) against opponent i and psi the
// dilated negative entropy.
double sbr_objective(const efg::GameTree& gt, const efg::SequencePolicy& x,
                     const OpponentMixture& mix);

// --- REINFORCE machinery shared by the tree sub-solver and the league ---

struct StepRecord {
  std::string key;
  std::vector<int> labels;    // legal action ids at the state
  int action_index = 0;       // index into labels
  double behavior_prob = 0.0; // probability the behavior policy assigned
};

struct Episode {
  std::vector<StepRecord> steps;
  double ret = 0.0;  // learner's terminal return
};

struct ReinforceParams {
  double lr = 0.05;
  double entropy_weight = 0.01;
  double discount = 0.99;
  bool baseline = true;       // batch-mean control variate
  double is_clip = 1.0;       // per-step importance ratio clip
};

// One ascent step on the batch. `freeze` restricts the update to keys of
// the other stage when set (alternating training).
void reinforce_update(TabularPolicy& policy, std::span<const Episode> batch,
                      const ReinforceParams& params,
                      const Stage* train_only_stage = nullptr);

// Policy-gradient smooth best response on a flattened game, learner side
// `player` = 0. Exact mode follows the full analytic mixture gradient;
// sampled mode estimates it from tree rollouts with opponent sampling.
struct SbrPgParams {
  int steps = 600;
  double lr = 0.2;
  bool exact_gradient = true;
  bool sample_opponents = false;  // exact mode: sampled vs full mixture
  int episodes_per_step = 64;     // sampled mode
  double discount = 0.99;         // sampled mode
  double behavior_tau = 1.0;      // sampled mode
};

efg::SequencePolicy solve_sbr_pg(const efg::GameTree& gt, const OpponentMixture& mix,
                                 const SbrPgParams& params, Rng& rng,
                                 TabularPolicy* policy_out = nullptr);

// The exact ascent direction in conditional-policy coordinates for the
// (possibly sampled) mixture objective; exposed for the estimator
// unbiasedness checks.
Vector sbr_pi_gradient(const efg::GameTree& gt, const efg::SequencePolicy& x,
                       const OpponentMixture& mix, int only_opponent = -1);

}  // namespace eqlab::pg
