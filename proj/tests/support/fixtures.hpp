#pragma once

// Small extensive-form fixtures shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "eqlab/game_tree.hpp"
#include "eqlab/rng.hpp"
#include "eqlab/simplex.hpp"

namespace fixtures {

using eqlab::Rng;
using eqlab::efg::GameTree;
using eqlab::efg::GameTreeBuilder;

// One decision for the first player over `rewards`; no second player.
inline GameTree depth1(const std::vector<double>& rewards) {
  GameTreeBuilder b;
  std::vector<int> leaves;
  for (double r : rewards) leaves.push_back(b.add_leaf(r));
  return b.build(b.add_decision(0, "root", leaves));
}

// Two consecutive decisions of the first player (a 2-level chain).
inline GameTree chain2(const std::vector<std::vector<double>>& rewards) {
  GameTreeBuilder b;
  std::vector<int> mid;
  for (size_t i = 0; i < rewards.size(); ++i) {
    std::vector<int> leaves;
    for (double r : rewards[i]) leaves.push_back(b.add_leaf(r));
    mid.push_back(b.add_decision(0, "m" + std::to_string(i), leaves));
  }
  return b.build(b.add_decision(0, "root", mid));
}

// Card-dealing game in the style of one-card poker: chance deals distinct
// cards (i, j) out of `cards`, the first player acts unseen by the second,
// payoffs come from a random table. Exercises chance nodes and
// imperfect information in one fixture. With p1_observes_action=false the
// second player sees only its own card, which keeps the strategy space
// small enough to flatten.
inline GameTree kuhn_like(int cards, Rng& rng, int actions = 2,
                          bool p1_observes_action = true) {
  GameTreeBuilder b;
  std::vector<std::vector<std::vector<std::vector<double>>>> pay(cards);
  for (int i = 0; i < cards; ++i) {
    pay[i].resize(cards);
    for (int j = 0; j < cards; ++j) {
      pay[i][j].resize(actions);
      for (int a0 = 0; a0 < actions; ++a0) {
        pay[i][j][a0].resize(actions);
        for (int a1 = 0; a1 < actions; ++a1)
          pay[i][j][a0][a1] = 2.0 * rng.uniform() - 1.0;
      }
    }
  }
  std::vector<int> deals;
  for (int i = 0; i < cards; ++i) {
    for (int j = 0; j < cards; ++j) {
      if (i == j) continue;
      std::vector<int> p0_children;
      for (int a0 = 0; a0 < actions; ++a0) {
        std::vector<int> p1_children;
        for (int a1 = 0; a1 < actions; ++a1)
          p1_children.push_back(b.add_leaf(pay[i][j][a0][a1]));
        const std::string key =
            p1_observes_action
                ? "c" + std::to_string(j) + "a" + std::to_string(a0)
                : "c" + std::to_string(j);
        p0_children.push_back(b.add_decision(1, key, p1_children));
      }
      deals.push_back(b.add_decision(0, "c" + std::to_string(i), p0_children));
    }
  }
  const int n = static_cast<int>(deals.size());
  return b.build(b.add_chance(deals, std::vector<double>(n, 1.0 / n)));
}

// Perfect-information alternating tree with random payoffs; every decision
// node is its own information state.
inline int random_pi_subtree(GameTreeBuilder& b, Rng& rng, int depth, int player,
                             std::string path) {
  if (depth == 0) return b.add_leaf(2.0 * rng.uniform() - 1.0);
  const int n = 2 + rng.uniform_int(2);
  std::vector<int> children;
  for (int a = 0; a < n; ++a)
    children.push_back(
        random_pi_subtree(b, rng, depth - 1, 1 - player, path + char('a' + a)));
  return b.add_decision(player, "n" + path, children);
}

inline GameTree random_pi_tree(Rng& rng, int depth = 3) {
  GameTreeBuilder b;
  return b.build(random_pi_subtree(b, rng, depth, 0, ""));
}

// Depth-2 perfect-information fixture: the first player picks a row, then
// either the second player responds (adversarially via its policy) or the
// first player moves again, ending on rewards[a1][a2].
struct TwoStepEnv {
  struct State {
    int depth = 0;  // 0 root, 1 mid, 2 terminal
    int a1 = -1, a2 = -1;
  };
  std::vector<std::vector<double>> rewards;
  bool opponent_moves_second = true;

  bool terminal(const State& s) const { return s.depth == 2; }
  double return0(const State& s) const { return rewards[s.a1][s.a2]; }
  int to_act(const State& s) const {
    return s.depth == 1 && opponent_moves_second ? 1 : 0;
  }
  std::vector<int> legal(const State& s) const {
    const size_t n = s.depth == 0 ? rewards.size() : rewards[s.a1].size();
    std::vector<int> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = static_cast<int>(i);
    return ids;
  }
  State apply(const State& s, int action, Rng&) const {
    State next = s;
    next.depth = s.depth + 1;
    (s.depth == 0 ? next.a1 : next.a2) = action;
    return next;
  }

  int minimax_action() const {
    int best = 0;
    double best_v = -1e300;
    for (size_t i = 0; i < rewards.size(); ++i) {
      double v = opponent_moves_second ? 1e300 : -1e300;
      for (double r : rewards[i])
        v = opponent_moves_second ? std::min(v, r) : std::max(v, r);
      if (v > best_v) {
        best_v = v;
        best = static_cast<int>(i);
      }
    }
    return best;
  }
  double minimax_value(int a1) const {
    double v = opponent_moves_second ? 1e300 : -1e300;
    for (double r : rewards[a1])
      v = opponent_moves_second ? std::min(v, r) : std::max(v, r);
    return v;
  }
};

// Opponent plays its best (minimizing) reply; searching player's prior is
// uniform.
inline eqlab::Vector minimizing_policy(const TwoStepEnv& env, const TwoStepEnv::State& s,
                         const std::vector<int>& legal) {
  if (env.to_act(s) == 0) return eqlab::uniform_simplex(legal.size());
  eqlab::Vector p = eqlab::Vector::Zero(legal.size());
  int best = 0;
  for (size_t i = 1; i < legal.size(); ++i)
    if (env.rewards[s.a1][legal[i]] < env.rewards[s.a1][legal[best]])
      best = static_cast<int>(i);
  p[best] = 1.0;
  return p;
}


}  // namespace fixtures
