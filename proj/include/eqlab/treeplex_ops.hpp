#pragma once

#include <utility>
#include <vector>

#include "eqlab/game_tree.hpp"

namespace eqlab::efg {

// Reach probabilities over one player's sequences, "excluding the opponent
// probability on the path": entries x(s,a) with sum_a x(s,a) = x(parent).
using SequencePolicy = Vector;

// One simplex per information state.
struct BehavioralPolicy {
  std::vector<Vector> pi;
};

BehavioralPolicy uniform_behavioral(const Treeplex& tp);
void validate_sequence_policy(const Treeplex& tp, const SequencePolicy& x,
                              double tol = 1e-9);

// x(s,a) = x(s) * pi(a|s), pushed top-down from unit mass at the root.
SequencePolicy behavioral_to_sequence(const Treeplex& tp, const BehavioralPolicy& pi);

// pi(a|s) = x(s,a) / x(s); uniform where the own reach x(s) is zero, which
// keeps the policy total and smooth responses well defined everywhere.
BehavioralPolicy sequence_to_behavioral(const Treeplex& tp, const SequencePolicy& x);

// First player's expected return sum_leaves x * y * chance * payoff.
double expected_return(const GameTree& gt, const SequencePolicy& x,
                       const SequencePolicy& y);

// Loss blocks over sequences: f0 = d u / d x and f1 = -d u / d y where
// u = -return. Each player lowers its own loss block, mirroring the
// normal-form payoff vector.
struct SeqPayoff {
  Vector f0;
  Vector f1;

  SeqPayoff& operator+=(const SeqPayoff& o) {
    f0 += o.f0;
    f1 += o.f1;
    return *this;
  }
};

SeqPayoff sequence_payoff(const GameTree& gt, const SequencePolicy& x,
                          const SequencePolicy& y);

// Counterfactual state-action values for one player. rho_s is the full
// reach (both players and chance) of each information state; q(s,a) is the
// reach-weighted expected return after taking a at s, normalized by rho_s.
// Entries of unreached information states are zero and flagged.
struct CfValues {
  Vector q;                      // per sequence
  Vector rho_s;                  // per information state
  Vector v;                      // state value per information state
  std::vector<std::uint8_t> reached;

  bool is_reached(int s) const { return reached[s] != 0; }
};

CfValues counterfactual_q(const GameTree& gt, const SequencePolicy& x,
                          const SequencePolicy& y, int player);

// Pure best response against a fixed opponent sequence policy, by bottom-up
// dynamic programming; ties break toward the lowest action index. Returns
// the vertex policy and its expected return for `player`.
std::pair<SequencePolicy, double> exact_br(const GameTree& gt,
                                           const SequencePolicy& opponent,
                                           int player);

// br0(y) + br1(x); nonnegative, zero exactly at equilibrium.
double exploitability(const GameTree& gt, const SequencePolicy& x,
                      const SequencePolicy& y);

// Dilated negative entropy: sum_s x(s) * sum_a pi(a|s) log pi(a|s), with
// 0 log 0 = 0. Zero on pure policies.
double dilated_entropy(const Treeplex& tp, const SequencePolicy& x);

// Exact minimizer of <g, x> + mu * dilated_entropy(x) over the treeplex.
// Backward induction: at each information state pi(a|s) is a softmax of
// -(g(s,a) + smoothed child values) / mu and the soft-min value
// -mu log sum exp propagates to the parent sequence.
SequencePolicy sbr_treeplex(const Treeplex& tp, const Vector& g, double mu);

// Optimistic (or plain) smooth fictitious play over both treeplexes with
// the dilated regularizer and exact smooth best responses.
struct EfgSolveRecord {
  int k;
  double gap_actual;
  double gap_average;
  double value;  // first player's return of the current iterate pair
};

// x, y hold the best pair seen across actual iterates and their running
// average: with a unique equilibrium the actual sequence wins (last-iterate
// convergence), on degenerate games the average still converges.
struct EfgSolveResult {
  SequencePolicy x;
  SequencePolicy y;
  double gap = 0.0;
  std::vector<EfgSolveRecord> trace;
};

EfgSolveResult osfp_solve(const GameTree& gt, double eta, int iters,
                          int log_every = 1, bool optimistic = true,
                          double stop_below = 0.0);

// All reduced pure sequence policies of one player (treeplex vertices).
// Throws BudgetExceeded past `budget` strategies.
std::vector<SequencePolicy> enumerate_pure_policies(const Treeplex& tp,
                                                    long long budget = 100000);

}  // namespace eqlab::efg
