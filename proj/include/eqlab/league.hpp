#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eqlab/cardgame.hpp"
#include "eqlab/policy_grad.hpp"
#include "eqlab/tabular_policy.hpp"

namespace eqlab::league {

enum class OpponentRule { kUniform, kRecency };

OpponentRule parse_opponent_rule(const std::string& name);

// Self-play league bookkeeping: historical snapshots H with per-opponent
// cumulative score G and match count C, the learning periods since the last
// snapshot, the self-play probability p and the gate threshold xi.
struct LeagueState {
  std::vector<pg::TabularPolicy> history;
  std::vector<double> g;
  std::vector<int> c;
  int count = 0;

  double p = 0.6;
  double xi = 0.7;
  int max_lp = 6;
  OpponentRule f = OpponentRule::kUniform;
  int samples_per_lp = 100000;

  void reset_accumulators() {
    g.assign(history.size(), 0.0);
    c.assign(history.size(), 0);
  }
};

inline constexpr int kSelfPlay = -1;

// kSelfPlay when the pool is empty or with probability p; otherwise an
// index drawn from f (uniform, or recency with the newest snapshot
// double-weighted).
int select_opponent(const LeagueState& ls, Rng& rng);

// G[i] += g, C[i] += 1; g is from the learner's perspective (+1/-1, 0 for
// the mini game's draws).
void record_result(LeagueState& ls, int i, double g);

// End-of-period gate: snapshot when every tested opponent is beaten at
// rate above xi (untested opponents fail the test) or when count exceeds
// max_lp. On snapshot the learner joins the pool and count resets;
// otherwise count increments. G and C are re-initialized at the start of
// the next learning period, not here.
bool gate(LeagueState& ls, const pg::TabularPolicy& learner);

// Direct transcription of the gate predicate, for property checks.
bool gate_predicate(const LeagueState& ls);

struct LeagueConfig {
  card::GameConfig game;
  double p = 0.6;
  double xi = 0.7;
  int max_lp = 6;
  OpponentRule f = OpponentRule::kUniform;
  int lps = 30;
  int episodes_per_lp = 2000;
  int batch_episodes = 64;
  pg::ReinforceParams reinforce;
  // Exact-gradient learner updates on the flattened game instead of
  // sampled rollouts; requires the game to flatten within tree_budget.
  bool exact_updates = false;
  int exact_steps_per_lp = 40;
  double exact_lr = 1.0;
  double exact_mu = 20.0;
  long long tree_budget = 100000;  // 0 disables flattening entirely
  std::uint64_t seed = 0;
};

struct LpRecord {
  int lp;
  int len_h;
  int count;
  double learner_exploitability;  // nan when the game does not flatten
  double mean_winrate;            // nan when no gated matches were played
};

struct LeagueRunResult {
  pg::TabularPolicy learner;
  LeagueState state;
  std::vector<LpRecord> log;
  std::vector<int> snapshot_lps;
  std::vector<card::Stage> trained_stages;  // alternating runs only
};

LeagueRunResult run_league(const LeagueConfig& cfg);

// Alternating training: identical loop, but only the active stage's
// parameter block receives gradients; the stage flips on each snapshot,
// starting from the battle stage.
LeagueRunResult run_alternating(const LeagueConfig& cfg);

void write_log_csv(std::ostream& out, const std::vector<LpRecord>& log);

// Head-to-head winrate of pa over n matches with uniformly random side
// assignment; draws count one half.
double evaluate(const card::CardGame& game, const pg::TabularPolicy& pa,
                const pg::TabularPolicy& pb, int n, Rng& rng, double tau_a = 1.0,
                double tau_b = 1.0);

// Plays one match, seats as given; returns the first seat's return. When
// collect[i] is set, that seat's decisions are recorded for training.
double play_match(const card::CardGame& game, const pg::TabularPolicy* seats[2],
                  const double taus[2], std::uint64_t chance_stream, Rng& rng,
                  pg::Episode* collect[2]);

}  // namespace eqlab::league
