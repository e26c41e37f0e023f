#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eqlab/common.hpp"
#include "eqlab/game_tree.hpp"
#include "eqlab/rng.hpp"

namespace eqlab::card {

enum class Stage { kBuild, kBattle };
enum class CbMode { kArena, kConstructed };

// Scale knobs for the miniature two-stage card game. The deck-building
// stage either presents candidates_per_round random cards per pick (arena)
// or lets the player pick any unpicked pool card (constructed).
struct GameConfig {
  int pool_size = 8;
  int deck_size = 2;
  CbMode cb_mode = CbMode::kConstructed;
  int candidates_per_round = 2;
  int lanes = 1;
  int initial_hp = 5;
  int max_mana = 3;
  int hand_limit = 3;
  int max_turns = 3;  // battle turns per player
  int draw_per_turn = 1;
  std::uint64_t rng_seed = 0;

  void validate() const;
  static GameConfig load(std::istream& in);
  static GameConfig load_file(const std::string& path);
  void save(std::ostream& out) const;
};

enum class CardKind { kCreature, kSpell };
enum class SpellEffect { kDamageFace, kDamageCreature, kBuffAttack };

struct Card {
  int id = 0;
  CardKind kind = CardKind::kCreature;
  int cost = 0;
  int attack = 0;     // creatures
  int health = 0;     // creatures
  SpellEffect effect = SpellEffect::kDamageFace;
  int magnitude = 0;  // spells

  std::string describe() const;
};

struct Creature {
  int card_id = 0;
  int attack = 0;
  int health = 0;
  bool attacked = false;
};

// Immutable game definition: config plus the seeded card pool and the flat
// action space layout. Actions are indexed
//   [0, n_cb)                    deck-building picks,
//   n_cb + slot * lanes + lane   play hand card (first slot per card id),
//   n_cb + hand_limit * lanes + lane   attack with the lane's creature,
//   last                         end turn.
struct CardGame {
  GameConfig cfg;
  std::vector<Card> pool;
  int n_cb_actions = 0;
  int num_actions = 0;

  int play_action(int slot, int lane) const {
    return n_cb_actions + slot * cfg.lanes + lane;
  }
  int attack_action(int lane) const {
    return n_cb_actions + cfg.hand_limit * cfg.lanes + lane;
  }
  int end_action() const {
    return n_cb_actions + cfg.hand_limit * cfg.lanes + cfg.lanes;
  }
};

CardGame make_game(GameConfig cfg);               // pool seeded from cfg.rng_seed
CardGame make_game(GameConfig cfg, std::vector<Card> pool);

struct PlayerState {
  std::vector<int> deck;   // card ids, sorted multiset; draws are lazy-uniform
  std::vector<int> hand;   // sorted
  std::vector<int> graveyard;  // sorted
  std::vector<std::optional<Creature>> lanes;
  int hp = 0;
  int mana = 0;
  int cb_progress = 0;
  int turns_taken = 0;
  std::string obs;         // this player's action-observation log
};

// Full world state. `reward` is the first player's terminal return.
struct CardGameState {
  Stage stage = Stage::kBuild;
  int to_act = 0;
  PlayerState p[2];
  Rng rng;
  bool terminal = false;
  double reward = 0.0;

  // Pending chance: outstanding turn-start draws for to_act, and (arena)
  // whether a candidate set still has to be revealed.
  int pending_draws = 0;
  bool need_candidates = false;
  std::vector<int> cb_candidates;

  std::string debug_string() const;  // exhaustive, for determinism checks
};

struct ActionMask {
  std::vector<std::uint8_t> legal;

  bool is_legal(int a) const {
    return a >= 0 && a < static_cast<int>(legal.size()) && legal[a] != 0;
  }
  int count() const;
  std::vector<int> legal_ids() const;
};

// What one player can see of a world state. `key` is the player's
// action-observation history and identifies the information state; two
// world states differing only in the opponent's hidden zones share it.
struct InfoState {
  int player = 0;
  Stage stage = Stage::kBuild;
  std::string key;

  std::vector<int> hand;
  int own_deck_count = 0;
  int opp_deck_count = 0;
  int opp_hand_count = 0;
  int own_hp = 0, opp_hp = 0;
  int own_mana = 0, opp_mana = 0;
  std::vector<std::optional<Creature>> own_lanes, opp_lanes;
  std::vector<int> cb_candidates;
  int cb_progress = 0;
};

// --- simulation interface (chance resolved internally via the state rng) ---

// chance_stream selects an independent randomness stream for this match;
// the card pool depends only on cfg.rng_seed.
CardGameState new_game(const CardGame& game, std::uint64_t chance_stream = 0);
CardGameState step(const CardGame& game, CardGameState state, int action);

ActionMask legal_actions(const CardGame& game, const CardGameState& state,
                         int player);
InfoState observe(const CardGame& game, const CardGameState& state, int player);

// --- explicit-chance interface (used by the tree bridge and tests) ---

CardGameState new_game_raw(const CardGame& game);
CardGameState apply_action(const CardGame& game, CardGameState state, int action);
bool at_chance(const CardGameState& state);
// All outcomes of the NEXT single chance event, with probabilities.
std::vector<std::pair<double, CardGameState>> chance_children(
    const CardGame& game, const CardGameState& state);
void resolve_chance(const CardGame& game, CardGameState& state);

// Flattens the game into an extensive-form tree whose information states
// are the observe() keys and whose action labels are flat action ids.
// Chance events with a single outcome collapse into the parent edge.
efg::GameTree to_game_tree(const CardGame& game, long long node_budget = 100000);

std::string action_name(const CardGame& game, int action);

// Bit-exact replay of (config, action list): returns the trajectory of
// states visited, ending at the terminal state (or after the last action).
struct TrajectoryEvent {
  int turn;
  int player;
  int action;
  double reward;
};

std::vector<TrajectoryEvent> replay(const CardGame& game,
                                    const std::vector<int>& actions,
                                    CardGameState* final_state = nullptr);
void write_trajectory(std::ostream& out, const std::vector<TrajectoryEvent>& events);

}  // namespace eqlab::card
