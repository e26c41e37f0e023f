#include "eqlab/league.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "eqlab/simplex.hpp"
#include "eqlab/treeplex_ops.hpp"

namespace eqlab::league {

OpponentRule parse_opponent_rule(const std::string& name) {
  if (name == "uniform") return OpponentRule::kUniform;
  if (name == "recency") return OpponentRule::kRecency;
  throw ConfigError("unknown opponent rule '" + name + "', expected uniform|recency");
}

int select_opponent(const LeagueState& ls, Rng& rng) {
  if (ls.history.empty()) return kSelfPlay;
  if (rng.uniform() < ls.p) return kSelfPlay;
  const int n = static_cast<int>(ls.history.size());
  if (ls.f == OpponentRule::kUniform) return rng.uniform_int(n);
  // Recency: newest snapshot twice the weight of the others.
  Vector w = Vector::Ones(n);
  w[n - 1] = 2.0;
  return sample_index(w / w.sum(), rng);
}

void record_result(LeagueState& ls, int i, double g) {
  EQLAB_CHECK(i >= 0 && i < static_cast<int>(ls.history.size()),
              "record_result: opponent index out of range");
  ls.g[i] += g;
  ls.c[i] += 1;
}

bool gate_predicate(const LeagueState& ls) {
  if (ls.count > ls.max_lp) return true;
  for (size_t i = 0; i < ls.history.size(); ++i) {
    if (ls.c[i] == 0) return false;  // cannot certify an untested opponent
    if (ls.g[i] / ls.c[i] <= ls.xi) return false;
  }
  return true;
}

bool gate(LeagueState& ls, const pg::TabularPolicy& learner) {
  if (gate_predicate(ls)) {
    ls.history.push_back(learner);
    ls.count = 0;
    return true;
  }
  ls.count += 1;
  return false;
}

double play_match(const card::CardGame& game, const pg::TabularPolicy* seats[2],
                  const double taus[2], std::uint64_t chance_stream, Rng& rng,
                  pg::Episode* collect[2]) {
  card::CardGameState s = card::new_game(game, chance_stream);
  while (!s.terminal) {
    const int seat = s.to_act;
    const card::InfoState info = card::observe(game, s, seat);
    const card::ActionMask mask = card::legal_actions(game, s, seat);
    const Vector pi = seats[seat]->act(info, mask, taus[seat]);
    const int a = sample_index(pi, rng);
    if (collect[seat]) {
      const std::vector<int> ids = mask.legal_ids();
      const int pos = static_cast<int>(
          std::lower_bound(ids.begin(), ids.end(), a) - ids.begin());
      collect[seat]->steps.push_back({info.key, ids, pos, pi[a]});
    }
    s = card::step(game, std::move(s), a);
  }
  if (collect[0]) collect[0]->ret = s.reward;
  if (collect[1]) collect[1]->ret = -s.reward;
  return s.reward;
}

namespace {

struct LeagueDriver {
  const LeagueConfig& cfg;
  const bool alternating;

  card::CardGame game;
  std::optional<efg::GameTree> tree;
  pg::TabularPolicy learner;
  LeagueState ls;
  Rng rng;
  std::uint64_t next_stream = 1;
  card::Stage active_stage = card::Stage::kBattle;  // alternating start

  explicit LeagueDriver(const LeagueConfig& c, bool alt)
      : cfg(c), alternating(alt), game(card::make_game(c.game)), rng(c.seed) {
    if (cfg.tree_budget > 0) {
      try {
        tree = card::to_game_tree(game, cfg.tree_budget);
      } catch (const BudgetExceeded&) {
        tree.reset();
      }
    }
    ls.p = cfg.p;
    ls.xi = cfg.xi;
    ls.max_lp = cfg.max_lp;
    ls.f = cfg.f;
    ls.samples_per_lp = cfg.episodes_per_lp;
    EQLAB_CHECK(ls.p > 0.0 && ls.p < 1.0, "league: p must lie in (0, 1)");
    EQLAB_CHECK(ls.xi > 0.0 && ls.xi < 1.0, "league: xi must lie in (0, 1)");
    EQLAB_CHECK(ls.max_lp > 0, "league: max_lp must be positive");
    if (cfg.exact_updates)
      EQLAB_CHECK(tree.has_value(),
                  "league: exact updates require a flattenable game");
  }

  const card::Stage* stage_filter() const {
    return alternating ? &active_stage : nullptr;
  }

  void rollout_updates() {
    std::vector<pg::Episode> batch;
    pg::Episode ep0, ep1;
    for (int e = 0; e < cfg.episodes_per_lp; ++e) {
      const int opp = select_opponent(ls, rng);
      const int learner_seat = rng.uniform_int(2);
      const pg::TabularPolicy* seats[2];
      pg::Episode* collect[2] = {nullptr, nullptr};
      ep0 = {};
      ep1 = {};
      if (opp == kSelfPlay) {
        seats[0] = seats[1] = &learner;
        collect[0] = &ep0;
        collect[1] = &ep1;
      } else {
        seats[learner_seat] = &learner;
        seats[1 - learner_seat] = &ls.history[opp];
        collect[learner_seat] = learner_seat == 0 ? &ep0 : &ep1;
      }
      const double taus[2] = {1.0, 1.0};
      const double r = play_match(game, seats, taus, next_stream++, rng, collect);
      if (opp != kSelfPlay) {
        const double g = learner_seat == 0 ? r : -r;
        record_result(ls, opp, g);
      }
      if (collect[0]) batch.push_back(std::move(ep0));
      if (collect[1]) batch.push_back(std::move(ep1));
      if (static_cast<int>(batch.size()) >= cfg.batch_episodes) {
        pg::reinforce_update(learner, batch, cfg.reinforce, stage_filter());
        batch.clear();
      }
    }
    if (!batch.empty())
      pg::reinforce_update(learner, batch, cfg.reinforce, stage_filter());
  }

  // Exact-gradient ascent against the sampling mixture: weight p on the
  // live learner, (1 - p) split over the pool by f.
  void exact_updates() {
    for (int step = 0; step < cfg.exact_steps_per_lp; ++step) {
      for (int side = 0; side < 2; ++side) {
        const int other = 1 - side;
        std::vector<efg::SequencePolicy> opps;
        std::vector<double> weights;
        opps.push_back(pg::policy_sequence(*tree, other, learner, 1.0));
        weights.push_back(ls.history.empty() ? 1.0 : ls.p);
        if (!ls.history.empty()) {
          const int n = static_cast<int>(ls.history.size());
          for (int i = 0; i < n; ++i) {
            double w = ls.f == OpponentRule::kRecency && i == n - 1 ? 2.0 : 1.0;
            opps.push_back(pg::policy_sequence(*tree, other, ls.history[i], 1.0));
            weights.push_back(w);
          }
          double hist_sum = 0.0;
          for (size_t i = 1; i < weights.size(); ++i) hist_sum += weights[i];
          for (size_t i = 1; i < weights.size(); ++i)
            weights[i] *= (1.0 - ls.p) / hist_sum;
        }
        const efg::SequencePolicy x = pg::policy_sequence(*tree, side, learner, 1.0);
        const efg::Treeplex& tp = tree->plex(side);
        Vector descent = Vector::Zero(tp.num_sequences);
        for (size_t i = 0; i < opps.size(); ++i)
          descent -= weights[i] * pg::policy_gradient(*tree, x, opps[i], side);
        descent += pg::dilated_entropy_pi_gradient(tp, x) / cfg.exact_mu;
        const efg::BehavioralPolicy pi = efg::sequence_to_behavioral(tp, x);
        for (int s = 0; s < tp.num_infosets(); ++s) {
          const auto& is = tp.infosets[s];
          if (alternating &&
              pg::TabularPolicy::stage_of_key(is.key) != active_stage)
            continue;
          int size = 0;
          for (int l : is.action_labels) size = std::max(size, l + 1);
          Vector& logits = learner.logits(
              pg::TabularPolicy::stage_of_key(is.key), is.key, size);
          double inner = 0.0;
          for (int a = 0; a < is.num_actions; ++a)
            inner += pi.pi[s][a] * -descent[is.first_seq + a];
          for (int a = 0; a < is.num_actions; ++a)
            logits[is.action_labels[a]] +=
                cfg.exact_lr * pi.pi[s][a] * (-descent[is.first_seq + a] - inner);
        }
      }
    }
  }

  LeagueRunResult run() {
    EQLAB_CHECK(cfg.lps >= 1, "league: lps must be >= 1");
    LeagueRunResult out;
    for (int lp = 0; lp < cfg.lps; ++lp) {
      ls.reset_accumulators();
      if (alternating) out.trained_stages.push_back(active_stage);
      rollout_updates();
      if (cfg.exact_updates) exact_updates();

      double expl = std::numeric_limits<double>::quiet_NaN();
      if (tree) {
        expl = efg::exploitability(*tree, pg::policy_sequence(*tree, 0, learner, 1.0),
                                   pg::policy_sequence(*tree, 1, learner, 1.0));
      }
      double wins = 0.0;
      int games = 0;
      for (size_t i = 0; i < ls.history.size(); ++i) {
        wins += 0.5 * (ls.g[i] + ls.c[i]);
        games += ls.c[i];
      }
      const double mean_winrate =
          games > 0 ? wins / games : std::numeric_limits<double>::quiet_NaN();

      const bool snapped = gate(ls, learner);
      if (snapped) {
        out.snapshot_lps.push_back(lp);
        if (alternating)
          active_stage = active_stage == card::Stage::kBattle
                             ? card::Stage::kBuild
                             : card::Stage::kBattle;
      }
      out.log.push_back(
          {lp, static_cast<int>(ls.history.size()), ls.count, expl, mean_winrate});
    }
    out.learner = std::move(learner);
    out.state = std::move(ls);
    return out;
  }
};

}  // namespace

LeagueRunResult run_league(const LeagueConfig& cfg) {
  return LeagueDriver(cfg, /*alternating=*/false).run();
}

LeagueRunResult run_alternating(const LeagueConfig& cfg) {
  return LeagueDriver(cfg, /*alternating=*/true).run();
}

void write_log_csv(std::ostream& out, const std::vector<LpRecord>& log) {
  out << "lp,len_H,count,learner_exploitability,mean_winrate\n";
  for (const auto& r : log)
    out << r.lp << ',' << r.len_h << ',' << r.count << ','
        << fmt_double(r.learner_exploitability) << ','
        << fmt_double(r.mean_winrate) << '\n';
}

double evaluate(const card::CardGame& game, const pg::TabularPolicy& pa,
                const pg::TabularPolicy& pb, int n, Rng& rng, double tau_a,
                double tau_b) {
  EQLAB_CHECK(n >= 1, "evaluate: n must be >= 1");
  double wins = 0.0;
  for (int i = 0; i < n; ++i) {
    const int side_a = rng.uniform_int(2);
    const pg::TabularPolicy* seats[2];
    double taus[2];
    seats[side_a] = &pa;
    seats[1 - side_a] = &pb;
    taus[side_a] = tau_a;
    taus[1 - side_a] = tau_b;
    pg::Episode* collect[2] = {nullptr, nullptr};
    const double r = play_match(game, seats, taus, 1 + i, rng, collect);
    const double ra = side_a == 0 ? r : -r;
    wins += 0.5 * (ra + 1.0);  // draws count one half
  }
  return wins / n;
}

}  // namespace eqlab::league
