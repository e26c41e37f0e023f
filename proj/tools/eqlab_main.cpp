// eqlab command line: experiment drivers over the solver, game, league and
// search modules. Every run is fully determined by (flags, seed); outputs
// are plain CSV/JSON.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "eqlab/cardgame.hpp"
#include "eqlab/fp_solvers.hpp"
#include "eqlab/league.hpp"
#include "eqlab/matrix_game.hpp"
#include "eqlab/mcts.hpp"
#include "eqlab/tabular_policy.hpp"
#include "eqlab/treeplex_ops.hpp"

using nlohmann::json;
using namespace eqlab;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

MatrixGame matrix_from_flags(const std::string& file, const std::string& preset) {
  if (!file.empty()) return MatrixGame::load_file(file);
  if (preset == "rps") return MatrixGame::rock_paper_scissors();
  if (preset == "mp") return MatrixGame::matching_pennies();
  throw ConfigError("unknown matrix preset '" + preset + "', expected rps|mp");
}

// The two pinned card configurations used throughout the docs: `tiny`
// flattens to a few hundred nodes and has a mixed equilibrium, `small` is
// the two-lane deck-of-3 game used for training comparisons.
card::GameConfig card_preset(const std::string& name) {
  card::GameConfig cfg;
  if (name == "tiny") {
    cfg.pool_size = 3;
    cfg.deck_size = 1;
    cfg.cb_mode = card::CbMode::kConstructed;
    cfg.lanes = 1;
    cfg.initial_hp = 2;
    cfg.max_mana = 2;
    cfg.hand_limit = 1;
    cfg.max_turns = 2;
    cfg.draw_per_turn = 1;
    cfg.rng_seed = 5;
    return cfg;
  }
  if (name == "small") {
    cfg.pool_size = 6;
    cfg.deck_size = 3;
    cfg.cb_mode = card::CbMode::kConstructed;
    cfg.lanes = 2;
    cfg.initial_hp = 4;
    cfg.max_mana = 2;
    cfg.hand_limit = 3;
    cfg.max_turns = 3;
    cfg.draw_per_turn = 1;
    cfg.rng_seed = 4;
    return cfg;
  }
  throw ConfigError("unknown card preset '" + name + "', expected tiny|small");
}

card::GameConfig card_config_from_flags(const std::string& file,
                                        const std::string& preset,
                                        std::optional<std::uint64_t> seed) {
  card::GameConfig cfg =
      file.empty() ? card_preset(preset) : card::GameConfig::load_file(file);
  if (seed) cfg.rng_seed = *seed;
  cfg.validate();
  return cfg;
}

pg::TabularPolicy policy_from_flag(const std::string& spec) {
  if (spec == "uniform") return pg::TabularPolicy{};
  return pg::TabularPolicy::load_file(spec);
}

void cmd_solve_matrix(const std::string& file, const std::string& preset,
                      const std::string& method, double eta, int iters,
                      const std::vector<double>& x0, const std::vector<double>& y0,
                      const std::string& out_path) {
  const MatrixGame game = matrix_from_flags(file, preset);
  std::optional<JointPolicy> z1;
  if (!x0.empty() || !y0.empty()) {
    JointPolicy z = uniform_joint(game);
    if (!x0.empty()) {
      if (static_cast<Index>(x0.size()) != game.rows())
        throw ConfigError("--x0 has the wrong dimension");
      z.x = Eigen::Map<const Vector>(x0.data(), x0.size());
    }
    if (!y0.empty()) {
      if (static_cast<Index>(y0.size()) != game.cols())
        throw ConfigError("--y0 has the wrong dimension");
      z.y = Eigen::Map<const Vector>(y0.data(), y0.size());
    }
    z1 = z;
  }
  const auto trace =
      solve(game, parse_method(method), eta, iters, z1 ? &*z1 : nullptr);
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    write_trace_csv(out, trace);
  }
  json summary{{"method", method},
               {"eta", eta},
               {"iters", iters},
               {"final_gap_actual", trace.back().gap_actual},
               {"final_gap_average", trace.back().gap_average}};
  std::cout << summary.dump(2) << '\n';
}

void cmd_solve_efg(const std::string& tree_file, const std::string& config_file,
                   const std::string& preset, double eta, int iters, int log_every,
                   bool plain, double stop_below, long long budget,
                   const std::string& out_path) {
  efg::GameTree gt = [&] {
    if (!tree_file.empty()) return efg::GameTree::load_file(tree_file);
    if (!config_file.empty() || preset != "mp-efg") {
      const card::GameConfig cfg = card_config_from_flags(
          config_file, preset == "mp-efg" ? "tiny" : preset, std::nullopt);
      return card::to_game_tree(card::make_game(cfg), budget);
    }
    return efg::GameTree::matching_pennies();
  }();

  const auto res = osfp_solve(gt, eta, iters, log_every, !plain, stop_below);
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    out << "k,gap_actual,gap_average,value\n";
    for (const auto& r : res.trace)
      out << r.k << ',' << fmt_double(r.gap_actual) << ','
          << fmt_double(r.gap_average) << ',' << fmt_double(r.value) << '\n';
  }
  json summary{{"nodes", gt.num_nodes()},
               {"iters", res.trace.empty() ? 0 : res.trace.back().k},
               {"exploitability", res.gap},
               {"value", efg::expected_return(gt, res.x, res.y)}};
  std::cout << summary.dump(2) << '\n';
}

league::LeagueConfig league_config_from_flags(
    const std::string& config_file, const std::string& preset,
    std::optional<std::uint64_t> game_seed, double p, double xi, int max_lp,
    const std::string& f, int lps, int episodes, double lr, double entropy,
    bool exact, std::uint64_t seed, long long budget) {
  league::LeagueConfig cfg;
  cfg.game = card_config_from_flags(config_file, preset, game_seed);
  cfg.p = p;
  cfg.xi = xi;
  cfg.max_lp = max_lp;
  cfg.f = league::parse_opponent_rule(f);
  cfg.lps = lps;
  cfg.episodes_per_lp = episodes;
  cfg.reinforce.lr = lr;
  cfg.reinforce.entropy_weight = entropy;
  cfg.exact_updates = exact;
  cfg.seed = seed;
  cfg.tree_budget = budget;
  return cfg;
}

void run_training(const league::LeagueConfig& cfg, bool alternating,
                  const std::string& out_path, const std::string& save_policy,
                  const std::string& snapshot_dir) {
  const auto res =
      alternating ? league::run_alternating(cfg) : league::run_league(cfg);
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    league::write_log_csv(out, res.log);
  }
  if (!save_policy.empty()) res.learner.save_file(save_policy);
  if (!snapshot_dir.empty()) {
    std::filesystem::create_directories(snapshot_dir);
    for (size_t i = 0; i < res.state.history.size(); ++i)
      res.state.history[i].save_file(snapshot_dir + "/snapshot_" +
                                     std::to_string(i) + ".txt");
  }
  json summary{{"lps", cfg.lps},
               {"pool_size", res.state.history.size()},
               {"snapshot_lps", res.snapshot_lps},
               {"final_exploitability", res.log.back().learner_exploitability}};
  std::cout << summary.dump(2) << '\n';
}

void cmd_eval(const std::string& config_file, const std::string& preset,
              const std::string& pa, const std::string& pb, int n, double tau_a,
              double tau_b, std::uint64_t seed) {
  const card::CardGame game =
      card::make_game(card_config_from_flags(config_file, preset, std::nullopt));
  Rng rng(seed);
  const double wr = league::evaluate(game, policy_from_flag(pa),
                                     policy_from_flag(pb), n, rng, tau_a, tau_b);
  json summary{{"matches", n}, {"tau_a", tau_a}, {"tau_b", tau_b},
               {"winrate_a", wr}};
  std::cout << summary.dump(2) << '\n';
}

struct SideFlags {
  std::string policy = "uniform";
  double p_expand = 0.0;
  int m_successive = 1;
};

void cmd_mcts_play(const std::string& config_file, const std::string& preset,
                   const SideFlags& a, const SideFlags& b, int matches,
                   const mcts::MctsParams& params, const std::string& value_kind,
                   int playouts, std::uint64_t seed, const std::string& out_path) {
  const card::CardGame game =
      card::make_game(card_config_from_flags(config_file, preset, std::nullopt));
  const mcts::CardEnv env{game};
  const pg::TabularPolicy pol[2] = {policy_from_flag(a.policy),
                                    policy_from_flag(b.policy)};
  Rng rng(seed);

  auto policy_fn = [&](int who) {
    return [&, who](const card::CardGameState& s, const std::vector<int>& legal,
                    Rng&) {
      const card::InfoState info = card::observe(game, s, s.to_act);
      card::ActionMask mask;
      mask.legal.assign(game.num_actions, 0);
      for (int l : legal) mask.legal[l] = 1;
      const Vector full = pol[who].act(info, mask, 1.0);
      Vector over(legal.size());
      for (size_t i = 0; i < legal.size(); ++i) over[i] = full[legal[i]];
      return over;
    };
  };
  auto value_fn = [&](int perspective) {
    return [&, perspective](const card::CardGameState& s) {
      if (value_kind == "zero") return s.terminal ? s.reward : 0.0;
      Rng vr(rng.next_u64());
      return mcts::rollout_value(game, s, perspective, playouts, vr);
    };
  };

  double total = 0.0;
  int wins = 0, draws = 0;
  std::vector<double> results;
  for (int m = 0; m < matches; ++m) {
    const int seat_of_a = m % 2;  // deterministic side switching
    using Actor = mcts::RolloutMixActor<mcts::CardEnv, decltype(policy_fn(0)),
                                        decltype(value_fn(0))>;
    mcts::RolloutMixParams rmp_a{a.p_expand, params.n, a.m_successive};
    mcts::RolloutMixParams rmp_b{b.p_expand, params.n, b.m_successive};
    Actor actor_a(rmp_a, params), actor_b(rmp_b, params);

    card::CardGameState s = card::new_game(game, 1 + m);
    while (!s.terminal) {
      const int seat = s.to_act;
      const bool is_a = seat == seat_of_a;
      const int who = is_a ? 0 : 1;
      const auto choice =
          (is_a ? actor_a : actor_b)
              .act(env, s, policy_fn(who), value_fn(seat), rng);
      s = card::step(game, std::move(s), choice.action);
    }
    const double ra = seat_of_a == 0 ? s.reward : -s.reward;
    results.push_back(ra);
    total += ra;
    wins += ra > 0;
    draws += ra == 0;
  }
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    out << "match,return_a\n";
    for (size_t i = 0; i < results.size(); ++i)
      out << i << ',' << fmt_double(results[i]) << '\n';
  }
  json summary{{"matches", matches},
               {"mean_return_a", total / matches},
               {"winrate_a", (wins + 0.5 * draws) / matches},
               {"sims", params.n},
               {"c", params.c},
               {"prior_tau", params.tau},
               {"dirichlet_alpha", params.alpha},
               {"p_mix", params.p_mix}};
  std::cout << summary.dump(2) << '\n';
}

void cmd_gen_game(const std::string& config_file, const std::string& preset,
                  std::optional<std::uint64_t> seed, long long budget,
                  const std::string& out_pool, const std::string& out_tree,
                  const std::string& out_config) {
  const card::GameConfig cfg = card_config_from_flags(config_file, preset, seed);
  const card::CardGame game = card::make_game(cfg);
  if (!out_config.empty()) {
    auto out = open_out(out_config);
    cfg.save(out);
  }
  if (!out_pool.empty()) {
    auto out = open_out(out_pool);
    for (const auto& c : game.pool) out << c.describe() << '\n';
  }
  json summary{{"pool_size", game.pool.size()}, {"actions", game.num_actions}};
  if (!out_tree.empty()) {
    const efg::GameTree gt = card::to_game_tree(game, budget);
    auto out = open_out(out_tree);
    gt.save(out);
    summary["tree_nodes"] = gt.num_nodes();
    summary["infosets"] = {gt.plex(0).num_infosets(), gt.plex(1).num_infosets()};
  }
  std::cout << summary.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eqlab: two-player zero-sum game laboratory"};
  app.require_subcommand(1);

  try {
    // solve-matrix
    auto* sm = app.add_subcommand("solve-matrix",
                                  "Iterative equilibrium solvers on a matrix game");
    std::string sm_file, sm_preset = "mp", sm_method = "osfp", sm_out;
    double sm_eta = 0.1;
    int sm_iters = 2000;
    std::vector<double> sm_x0, sm_y0;
    sm->add_option("--game", sm_file, "matrix game file ('rows cols' header)");
    sm->add_option("--preset", sm_preset, "built-in game: rps|mp")
        ->capture_default_str();
    sm->add_option("--method", sm_method, "sfp|osfp|omd")->capture_default_str();
    sm->add_option("--eta", sm_eta, "step size")->capture_default_str();
    sm->add_option("--iters", sm_iters, "iterations")->capture_default_str();
    sm->add_option("--x0", sm_x0, "initial row policy (omd starts uniform)")
        ->delimiter(',');
    sm->add_option("--y0", sm_y0, "initial column policy")->delimiter(',');
    sm->add_option("--out", sm_out, "CSV trace: k,gap_actual,gap_average");
    sm->callback([&] {
      cmd_solve_matrix(sm_file, sm_preset, sm_method, sm_eta, sm_iters, sm_x0,
                       sm_y0, sm_out);
    });

    // solve-efg
    auto* se = app.add_subcommand(
        "solve-efg", "Optimistic fictitious play with exact smooth best "
                     "responses on an extensive-form game");
    std::string se_tree, se_config, se_preset = "mp-efg", se_out;
    double se_eta = 0.5, se_stop = 0.0;
    int se_iters = 4000, se_log = 100;
    long long se_budget = 100000;
    bool se_plain = false;
    se->add_option("--tree", se_tree, "game tree file (efg v1)");
    se->add_option("--config", se_config, "card game config to flatten");
    se->add_option("--preset", se_preset, "mp-efg|tiny|small")
        ->capture_default_str();
    se->add_option("--eta", se_eta, "step size")->capture_default_str();
    se->add_option("--iters", se_iters, "iterations")->capture_default_str();
    se->add_option("--log-every", se_log, "trace stride")->capture_default_str();
    se->add_option("--stop-below", se_stop, "early stop on exploitability");
    se->add_option("--budget", se_budget, "node budget for flattening")
        ->capture_default_str();
    se->add_flag("--plain", se_plain, "drop the optimistic term (plain FTRL)");
    se->add_option("--out", se_out, "CSV trace");
    se->callback([&] {
      cmd_solve_efg(se_tree, se_config, se_preset, se_eta, se_iters, se_log,
                    se_plain, se_stop, se_budget, se_out);
    });

    // train-league / train-at
    for (const bool alternating : {false, true}) {
      auto* tr = app.add_subcommand(
          alternating ? "train-at" : "train-league",
          alternating ? "Alternating-stage league training"
                      : "Self-play league training with opponent sampling");
      auto flags = std::make_shared<std::tuple<
          std::string, std::string, std::optional<std::uint64_t>, double, double,
          int, std::string, int, int, double, double, bool, std::uint64_t,
          long long, std::string, std::string, std::string>>();
      auto& [config_file, preset, game_seed, p, xi, max_lp, f, lps, episodes, lr,
             entropy, exact, seed, budget, out, save_policy, snapshot_dir] =
          *flags;
      preset = "tiny";
      p = 0.6;
      xi = 0.7;
      max_lp = 6;
      f = "uniform";
      lps = 30;
      episodes = 2000;
      lr = 0.05;
      entropy = 0.01;
      exact = false;
      seed = 42;
      budget = 100000;
      tr->add_option("--config", config_file, "card game config file");
      tr->add_option("--preset", preset, "tiny|small")->capture_default_str();
      tr->add_option("--game-seed", game_seed, "override the config rng_seed");
      tr->add_option("--p", p, "self-play probability")->capture_default_str();
      tr->add_option("--xi", xi, "gate winrate threshold")->capture_default_str();
      tr->add_option("--c", max_lp, "gate learning-period cap")
          ->capture_default_str();
      tr->add_option("--f", f, "opponent rule: uniform|recency")
          ->capture_default_str();
      tr->add_option("--lps", lps, "learning periods")->capture_default_str();
      tr->add_option("--episodes", episodes, "matches per learning period")
          ->capture_default_str();
      tr->add_option("--lr", lr, "learner step size")->capture_default_str();
      tr->add_option("--entropy", entropy, "entropy bonus weight")
          ->capture_default_str();
      tr->add_flag("--exact", exact,
                   "exact-gradient learner updates on the flattened game");
      tr->add_option("--seed", seed, "run seed")->capture_default_str();
      tr->add_option("--budget", budget,
                     "flatten budget for exploitability logging (0 = off)")
          ->capture_default_str();
      tr->add_option("--out", out,
                     "training log CSV: lp,len_H,count,learner_exploitability,"
                     "mean_winrate");
      tr->add_option("--save-policy", save_policy, "final learner checkpoint");
      tr->add_option("--snapshot-dir", snapshot_dir,
                     "directory for per-snapshot checkpoints");
      tr->callback([flags, alternating] {
        const auto& [config_file, preset, game_seed, p, xi, max_lp, f, lps,
                     episodes, lr, entropy, exact, seed, budget, out,
                     save_policy, snapshot_dir] = *flags;
        run_training(
            league_config_from_flags(config_file, preset, game_seed, p, xi,
                                     max_lp, f, lps, episodes, lr, entropy,
                                     exact, seed, budget),
            alternating, out, save_policy, snapshot_dir);
      });
    }

    // eval
    auto* ev = app.add_subcommand("eval",
                                  "Head-to-head winrate with side switching");
    std::string ev_config, ev_preset = "tiny", ev_pa = "uniform",
                ev_pb = "uniform";
    int ev_n = 2500;
    double ev_tau_a = 1.0, ev_tau_b = 1.0;
    std::uint64_t ev_seed = 0;
    ev->add_option("--config", ev_config, "card game config file");
    ev->add_option("--preset", ev_preset, "tiny|small")->capture_default_str();
    ev->add_option("--pa", ev_pa, "policy checkpoint or 'uniform'")
        ->capture_default_str();
    ev->add_option("--pb", ev_pb, "policy checkpoint or 'uniform'")
        ->capture_default_str();
    ev->add_option("--n", ev_n, "matches")->capture_default_str();
    ev->add_option("--tau-a", ev_tau_a, "temperature for pa (0 = argmax)")
        ->capture_default_str();
    ev->add_option("--tau-b", ev_tau_b, "temperature for pb")
        ->capture_default_str();
    ev->add_option("--seed", ev_seed, "run seed")->capture_default_str();
    ev->callback([&] {
      cmd_eval(ev_config, ev_preset, ev_pa, ev_pb, ev_n, ev_tau_a, ev_tau_b,
               ev_seed);
    });

    // mcts-play
    auto* mp = app.add_subcommand(
        "mcts-play", "Play two agents with optional search-based acting");
    std::string mp_config, mp_preset = "tiny", mp_value = "rollout", mp_out;
    SideFlags mp_a, mp_b;
    mcts::MctsParams mp_params;
    int mp_matches = 10, mp_playouts = 16;
    std::uint64_t mp_seed = 0;
    mp->add_option("--config", mp_config, "card game config file");
    mp->add_option("--preset", mp_preset, "tiny|small")->capture_default_str();
    mp->add_option("--pa", mp_a.policy, "policy checkpoint or 'uniform'")
        ->capture_default_str();
    mp->add_option("--pb", mp_b.policy, "policy checkpoint or 'uniform'")
        ->capture_default_str();
    mp->add_option("--pa-expand", mp_a.p_expand,
                   "probability of starting a search burst (side a)")
        ->capture_default_str();
    mp->add_option("--pb-expand", mp_b.p_expand, "same for side b")
        ->capture_default_str();
    mp->add_option("--pa-successive", mp_a.m_successive,
                   "burst length in own decisions (side a)")
        ->capture_default_str();
    mp->add_option("--pb-successive", mp_b.m_successive, "same for side b")
        ->capture_default_str();
    mp->add_option("--matches", mp_matches, "matches to play")
        ->capture_default_str();
    mp->add_option("--sims", mp_params.n, "simulations per search")
        ->capture_default_str();
    mp->add_option("--c", mp_params.c, "exploration constant")
        ->capture_default_str();
    mp->add_option("--prior-tau", mp_params.tau, "prior temperature")
        ->capture_default_str();
    mp->add_option("--alpha", mp_params.alpha, "Dirichlet concentration")
        ->capture_default_str();
    mp->add_option("--p-mix", mp_params.p_mix, "prior mixing weight")
        ->capture_default_str();
    mp->add_option("--value", mp_value, "leaf evaluator: rollout|zero")
        ->capture_default_str();
    mp->add_option("--playouts", mp_playouts, "playouts per rollout evaluation")
        ->capture_default_str();
    mp->add_option("--seed", mp_seed, "run seed")->capture_default_str();
    mp->add_option("--out", mp_out, "per-match CSV");
    mp->callback([&] {
      cmd_mcts_play(mp_config, mp_preset, mp_a, mp_b, mp_matches, mp_params,
                    mp_value, mp_playouts, mp_seed, mp_out);
    });

    // gen-game
    auto* gg = app.add_subcommand(
        "gen-game", "Emit a seeded card pool and optionally the flattened tree");
    std::string gg_config, gg_preset = "tiny", gg_pool, gg_tree, gg_cfg_out;
    std::optional<std::uint64_t> gg_seed;
    long long gg_budget = 100000;
    gg->add_option("--config", gg_config, "card game config file");
    gg->add_option("--preset", gg_preset, "tiny|small")->capture_default_str();
    gg->add_option("--seed", gg_seed, "override the config rng_seed");
    gg->add_option("--budget", gg_budget, "node budget")->capture_default_str();
    gg->add_option("--out-pool", gg_pool, "card pool listing");
    gg->add_option("--out-tree", gg_tree, "flattened game tree (efg v1)");
    gg->add_option("--out-config", gg_cfg_out, "normalized config file");
    gg->callback([&] {
      cmd_gen_game(gg_config, gg_preset, gg_seed, gg_budget, gg_pool, gg_tree,
                   gg_cfg_out);
    });

    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << " (count " << e.count
              << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
