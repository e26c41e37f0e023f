#pragma once

#include <functional>
#include <string>
#include <optional>
#include <vector>

#include "eqlab/cardgame.hpp"
#include "eqlab/common.hpp"
#include "eqlab/rng.hpp"
#include "eqlab/simplex.hpp"

namespace eqlab::mcts {

struct MctsParams {
  int n = 400;         // simulations
  double c = 5.0;      // exploration constant
  double tau = 10.0;   // prior temperature
  double alpha = 0.03; // Dirichlet concentration
  double p_mix = 0.75; // prior vs noise mixing weight
  bool dump_tree = false;  // fill SearchResult::dump with an indented trace

  void validate() const {
    EQLAB_CHECK(n >= 1, "mcts: n must be >= 1");
    EQLAB_CHECK(c >= 0.0, "mcts: c must be nonnegative");
    EQLAB_CHECK(tau > 0.0, "mcts: tau must be positive");
    EQLAB_CHECK(alpha > 0.0, "mcts: alpha must be positive");
    EQLAB_CHECK(p_mix >= 0.0 && p_mix <= 1.0, "mcts: p_mix must lie in [0, 1]");
  }
};

// Tempered policy mixed with symmetric Dirichlet noise:
//   softmax(log pi / tau) * p_mix + (1 - p_mix) * Dirichlet(alpha).
Vector prior_mix(const Vector& policy_probs, double tau, double alpha,
                 double p_mix, Rng& rng);

struct SearchResult {
  int action = -1;           // sampled from pi
  std::vector<int> actions;  // root legal actions
  Vector pi;                 // visit-count distribution over `actions`
  double root_q = 0.0;
  int root_visits = 0;       // params.n simulations plus the root evaluation
  int child_visits = 0;
  std::string dump;          // indented (action, n, q, prior) lines on request
};

// Environment adapter concept, duck-typed:
//   using State = ...;                        value type
//   bool terminal(const State&) const;
//   double return0(const State&) const;       first player's terminal return
//   int to_act(const State&) const;
//   std::vector<int> legal(const State&) const;
//   State apply(const State&, int action, Rng&) const;   chance resolved
//
// Policy: (const State&, const std::vector<int>& legal, Rng&) -> Vector over
// legal actions, for whoever is to act. Value: (const State&) -> double in
// the searching player's perspective.

namespace detail {

struct Node {
  int parent = -1;
  int action = -1;
  double prior = 0.0;
  int n = 0;
  double w = 0.0;
  double q = 0.0;
  bool expanded = false;
  bool terminal = false;
  double terminal_value = 0.0;
  std::vector<int> children;
  std::vector<int> actions;
  int state = -1;  // index into the state arena once expanded
};

}  // namespace detail

// Ground-truth world-state tree search: the tree branches only on the
// searching player's actions; opponent turns (and chance) are rolled inside
// the transition using the opponent policy. Nodes hold the concrete world
// state sampled when they were first expanded.
template <class Env, class Policy, class Value>
SearchResult search(const Env& env, const typename Env::State& h0,
                    const Policy& policy, const Value& value,
                    const MctsParams& params, Rng& rng) {
  params.validate();
  EQLAB_CHECK(!env.terminal(h0), "mcts: cannot search a terminal state");
  const int sp = env.to_act(h0);
  const double sign = sp == 0 ? 1.0 : -1.0;

  std::vector<detail::Node> nodes;
  std::vector<typename Env::State> arena;

  // Rolls opponent turns with the opponent policy until the searching
  // player acts again or the game ends.
  auto roll_to_own_turn = [&](typename Env::State h) {
    while (!env.terminal(h) && env.to_act(h) != sp) {
      const std::vector<int> legal = env.legal(h);
      const Vector pi = policy(h, legal, rng);
      h = env.apply(h, legal[sample_index(pi, rng)], rng);
    }
    return h;
  };

  auto expand = [&](int id, typename Env::State h) {
    detail::Node& node = nodes[id];
    node.expanded = true;
    if (env.terminal(h)) {
      node.terminal = true;
      node.terminal_value = sign * env.return0(h);
    } else {
      EQLAB_CHECK(env.to_act(h) == sp, "mcts: tree node off the searching turn");
      node.actions = env.legal(h);
      const Vector pi = policy(h, node.actions, rng);
      const Vector prior = prior_mix(pi, params.tau, params.alpha, params.p_mix, rng);
      for (size_t a = 0; a < node.actions.size(); ++a) {
        detail::Node child;
        child.parent = id;
        child.action = node.actions[a];
        child.prior = prior[a];
        nodes.push_back(child);
        nodes[id].children.push_back(static_cast<int>(nodes.size()) - 1);
      }
    }
    arena.push_back(std::move(h));
    nodes[id].state = static_cast<int>(arena.size()) - 1;
  };

  nodes.emplace_back();
  expand(0, h0);
  double v0 = value(arena[nodes[0].state]);

  auto backtrace = [&](int id, double v) {
    for (int cur = id; cur >= 0; cur = nodes[cur].parent) {
      nodes[cur].n += 1;
      nodes[cur].w += v;
      nodes[cur].q = nodes[cur].w / nodes[cur].n;
    }
  };
  backtrace(0, v0);

  for (int i = 1; i <= params.n; ++i) {
    // SELECT: descend while children exist.
    int id = 0;
    while (!nodes[id].children.empty()) {
      int total = 0;
      for (int c : nodes[id].children) total += nodes[c].n;
      const double scale = params.c * std::sqrt(1.0 + total);
      int best = nodes[id].children[0];
      double best_score = -1e300;
      for (int c : nodes[id].children) {
        const double score =
            nodes[c].q + scale / (1.0 + nodes[c].n) * nodes[c].prior;
        if (score > best_score) {
          best_score = score;
          best = c;
        }
      }
      id = best;
    }
    // EXPAND: realize the node's world state on first visit.
    double v;
    if (!nodes[id].expanded) {
      typename Env::State h = env.apply(arena[nodes[nodes[id].parent].state],
                                        nodes[id].action, rng);
      h = roll_to_own_turn(std::move(h));
      expand(id, std::move(h));
      v = nodes[id].terminal ? nodes[id].terminal_value
                             : value(arena[nodes[id].state]);
    } else {
      // Only terminal nodes stay childless after expansion.
      v = nodes[id].terminal_value;
    }
    backtrace(id, v);
  }

  SearchResult res;
  res.actions = nodes[0].actions;
  res.pi = Vector::Zero(res.actions.size());
  double total = 0.0;
  for (size_t a = 0; a < nodes[0].children.size(); ++a) {
    res.pi[a] = nodes[0].n == 0 ? 0.0 : static_cast<double>(nodes[nodes[0].children[a]].n);
    total += res.pi[a];
  }
  res.pi /= total;
  res.action = res.actions[sample_index(res.pi, rng)];
  res.root_q = nodes[0].q;
  res.root_visits = nodes[0].n;
  res.child_visits = static_cast<int>(total);
  if (params.dump_tree) {
    std::string text;
    const std::function<void(int, int)> walk = [&](int id, int depth) {
      const detail::Node& node = nodes[id];
      text.append(2 * depth, ' ');
      if (id == 0)
        text += "root";
      else
        text += "a=" + std::to_string(node.action);
      text += " n=" + std::to_string(node.n) + " q=" + fmt_double(node.q) +
              " p=" + fmt_double(node.prior) + "\n";
      for (int c : node.children) walk(c, depth + 1);
    };
    walk(0, 0);
    res.dump = std::move(text);
  }
  return res;
}

// Search-or-sample actor implementing the (p, n, m) rollout mixing: with
// probability p_expand a burst of m_successive consecutive own decisions is
// played through search with n_expand simulations each; everything else
// samples the plain policy. The returned distribution is the behavior
// policy for importance weighting.
struct RolloutMixParams {
  double p_expand = 0.0;
  int n_expand = 400;
  int m_successive = 1;

  void validate() const {
    EQLAB_CHECK(p_expand >= 0.0 && p_expand <= 1.0,
                "rollout mix: p_expand must lie in [0, 1]");
    EQLAB_CHECK(n_expand >= 1, "rollout mix: n_expand must be >= 1");
    EQLAB_CHECK(m_successive >= 1, "rollout mix: m_successive must be >= 1");
  }
};

struct ActChoice {
  int action = -1;
  std::vector<int> actions;
  Vector behavior;  // over `actions`
  bool searched = false;
};

template <class Env, class Policy, class Value>
class RolloutMixActor {
 public:
  RolloutMixActor(RolloutMixParams rmp, MctsParams mp) : rmp_(rmp), mp_(mp) {
    rmp_.validate();
    mp_.n = rmp_.n_expand;
    mp_.validate();
  }

  ActChoice act(const Env& env, const typename Env::State& h, const Policy& policy,
                const Value& value, Rng& rng) {
    ActChoice out;
    if (streak_ == 0 && rmp_.p_expand > 0.0 && rng.uniform() < rmp_.p_expand)
      streak_ = rmp_.m_successive;
    if (streak_ > 0) {
      streak_ -= 1;
      const SearchResult sr = search(env, h, policy, value, mp_, rng);
      out.action = sr.action;
      out.actions = sr.actions;
      out.behavior = sr.pi;
      out.searched = true;
      return out;
    }
    out.actions = env.legal(h);
    out.behavior = policy(h, out.actions, rng);
    out.action = out.actions[sample_index(out.behavior, rng)];
    return out;
  }

  int streak_left() const { return streak_; }

 private:
  RolloutMixParams rmp_;
  MctsParams mp_;
  int streak_ = 0;
};

// Card game adapter.
struct CardEnv {
  const card::CardGame& game;
  using State = card::CardGameState;

  bool terminal(const State& s) const { return s.terminal; }
  double return0(const State& s) const { return s.reward; }
  int to_act(const State& s) const { return s.to_act; }
  std::vector<int> legal(const State& s) const {
    return card::legal_actions(game, s, s.to_act).legal_ids();
  }
  State apply(const State& s, int action, Rng&) const {
    // Chance inside the step consumes the state's own counter stream.
    return card::step(game, s, action);
  }
};

// Monte-Carlo state evaluator: averages uniform-random playouts; the
// returned value is from `perspective`'s side.
double rollout_value(const card::CardGame& game, const card::CardGameState& s,
                     int perspective, int playouts, Rng& rng);

}  // namespace eqlab::mcts
