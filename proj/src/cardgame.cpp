#include "eqlab/cardgame.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace eqlab::card {

namespace {

void insert_sorted(std::vector<int>& v, int x) {
  v.insert(std::upper_bound(v.begin(), v.end(), x), x);
}

void erase_one(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  EQLAB_CHECK(it != v.end() && *it == x, "card not in zone");
  v.erase(it);
}

std::string join_ints(const std::vector<int>& v, char sep = ',') {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

void GameConfig::validate() const {
  if (pool_size < 1 || deck_size < 1 || lanes < 1 || initial_hp < 1 ||
      max_mana < 1 || hand_limit < 1 || max_turns < 1 || draw_per_turn < 0)
    throw ConfigError("card game config: counts must be positive");
  if (deck_size > pool_size)
    throw ConfigError("card game config: deck_size must not exceed pool_size");
  if (cb_mode == CbMode::kArena &&
      (candidates_per_round < 1 || candidates_per_round > pool_size))
    throw ConfigError("card game config: candidates_per_round out of range");
}

GameConfig GameConfig::load(std::istream& in) {
  GameConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string value;
    if (!(ls >> value)) throw ConfigError("card game config: missing value for " + key);
    auto to_int = [&](const std::string& v) {
      try {
        return std::stoi(v);
      } catch (...) {
        throw ConfigError("card game config: bad integer for " + key);
      }
    };
    if (key == "pool_size") cfg.pool_size = to_int(value);
    else if (key == "deck_size") cfg.deck_size = to_int(value);
    else if (key == "cb_mode") {
      if (value == "arena") cfg.cb_mode = CbMode::kArena;
      else if (value == "constructed") cfg.cb_mode = CbMode::kConstructed;
      else throw ConfigError("card game config: cb_mode must be arena|constructed");
    }
    else if (key == "candidates_per_round") cfg.candidates_per_round = to_int(value);
    else if (key == "lanes") cfg.lanes = to_int(value);
    else if (key == "initial_hp") cfg.initial_hp = to_int(value);
    else if (key == "max_mana") cfg.max_mana = to_int(value);
    else if (key == "hand_limit") cfg.hand_limit = to_int(value);
    else if (key == "max_turns") cfg.max_turns = to_int(value);
    else if (key == "draw_per_turn") cfg.draw_per_turn = to_int(value);
    else if (key == "rng_seed") cfg.rng_seed = std::stoull(value);
    else throw ConfigError("card game config: unknown key " + key);
  }
  cfg.validate();
  return cfg;
}

GameConfig GameConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("card game config: cannot open " + path);
  return load(in);
}

void GameConfig::save(std::ostream& out) const {
  out << "pool_size " << pool_size << '\n'
      << "deck_size " << deck_size << '\n'
      << "cb_mode " << (cb_mode == CbMode::kArena ? "arena" : "constructed") << '\n'
      << "candidates_per_round " << candidates_per_round << '\n'
      << "lanes " << lanes << '\n'
      << "initial_hp " << initial_hp << '\n'
      << "max_mana " << max_mana << '\n'
      << "hand_limit " << hand_limit << '\n'
      << "max_turns " << max_turns << '\n'
      << "draw_per_turn " << draw_per_turn << '\n'
      << "rng_seed " << rng_seed << '\n';
}

std::string Card::describe() const {
  std::string s = std::to_string(id) + ":";
  if (kind == CardKind::kCreature) {
    s += "creature/" + std::to_string(cost) + "/" + std::to_string(attack) + "/" +
         std::to_string(health);
  } else {
    s += "spell/" + std::to_string(cost) + "/";
    switch (effect) {
      case SpellEffect::kDamageFace: s += "face"; break;
      case SpellEffect::kDamageCreature: s += "creature"; break;
      case SpellEffect::kBuffAttack: s += "buff"; break;
    }
    s += "/" + std::to_string(magnitude);
  }
  return s;
}

CardGame make_game(GameConfig cfg, std::vector<Card> pool) {
  cfg.validate();
  EQLAB_CHECK(static_cast<int>(pool.size()) == cfg.pool_size,
              "pool size does not match config");
  CardGame g;
  g.cfg = cfg;
  g.pool = std::move(pool);
  g.n_cb_actions = cfg.cb_mode == CbMode::kArena ? cfg.candidates_per_round
                                                 : cfg.pool_size;
  g.num_actions = g.n_cb_actions + cfg.hand_limit * cfg.lanes + cfg.lanes + 1;
  return g;
}

CardGame make_game(GameConfig cfg) {
  cfg.validate();
  // Attribute ranges: cost 0..min(2, max_mana), creature attack/health 1..3,
  // spell magnitude 1..2; ~70% creatures.
  Rng pool_rng = Rng(cfg.rng_seed).fork(0);
  std::vector<Card> pool(cfg.pool_size);
  for (int i = 0; i < cfg.pool_size; ++i) {
    Card& c = pool[i];
    c.id = i;
    c.cost = pool_rng.uniform_int(std::min(2, cfg.max_mana) + 1);
    if (pool_rng.uniform() < 0.7) {
      c.kind = CardKind::kCreature;
      c.attack = 1 + pool_rng.uniform_int(3);
      c.health = 1 + pool_rng.uniform_int(3);
    } else {
      c.kind = CardKind::kSpell;
      c.effect = static_cast<SpellEffect>(pool_rng.uniform_int(3));
      c.magnitude = 1 + pool_rng.uniform_int(2);
    }
  }
  return make_game(cfg, std::move(pool));
}

namespace {

void log_both(CardGameState& s, int actor, const std::string& own,
              const std::string& other) {
  s.p[actor].obs += own;
  s.p[1 - actor].obs += other;
}

// Turn-start upkeep: mana refill, attack flags reset, draws become pending.
void begin_turn(const CardGame& game, CardGameState& s, int player) {
  PlayerState& ps = s.p[player];
  ps.turns_taken += 1;
  ps.mana = std::min(ps.turns_taken, game.cfg.max_mana);
  for (auto& lane : ps.lanes)
    if (lane) lane->attacked = false;
  s.to_act = player;
  s.pending_draws =
      std::min(game.cfg.draw_per_turn, static_cast<int>(ps.deck.size()));
}

void finish_when_dead(const CardGame& game, CardGameState& s) {
  (void)game;
  for (int p = 0; p < 2; ++p) {
    if (s.p[p].hp <= 0) {
      s.terminal = true;
      s.reward = p == 0 ? -1.0 : 1.0;
    }
  }
}

// A kill moves the card to its owner's graveyard.
void clear_dead(CardGameState& s, int owner, int lane) {
  auto& slot = s.p[owner].lanes[lane];
  if (slot && slot->health <= 0) {
    insert_sorted(s.p[owner].graveyard, slot->card_id);
    slot.reset();
  }
}

void advance_after_cb_pick(const CardGame& game, CardGameState& s) {
  PlayerState& ps = s.p[s.to_act];
  if (ps.cb_progress < game.cfg.deck_size) {
    if (game.cfg.cb_mode == CbMode::kArena) s.need_candidates = true;
    return;
  }
  if (s.to_act == 0) {
    s.to_act = 1;
    if (game.cfg.cb_mode == CbMode::kArena) s.need_candidates = true;
    return;
  }
  // Both decks are built; battle opens with the first player's turn.
  s.stage = Stage::kBattle;
  log_both(s, 0, "bt;", "bt;");
  begin_turn(game, s, 0);
}

void apply_cb_pick(const CardGame& game, CardGameState& s, int action) {
  PlayerState& ps = s.p[s.to_act];
  int card;
  if (game.cfg.cb_mode == CbMode::kArena) {
    card = s.cb_candidates[action];
    s.cb_candidates.clear();
  } else {
    card = action;
  }
  insert_sorted(ps.deck, card);
  ps.cb_progress += 1;
  log_both(s, s.to_act, "pk:" + std::to_string(card) + ";", "opk;");
  advance_after_cb_pick(game, s);
}

void apply_battle_action(const CardGame& game, CardGameState& s, int action) {
  const int me = s.to_act;
  PlayerState& ps = s.p[me];
  PlayerState& opp = s.p[1 - me];
  const int L = game.cfg.lanes;

  if (action == game.end_action()) {
    log_both(s, me, "end;", "oend;");
    if (s.p[0].turns_taken >= game.cfg.max_turns &&
        s.p[1].turns_taken >= game.cfg.max_turns) {
      s.terminal = true;
      const int d = s.p[0].hp - s.p[1].hp;
      s.reward = d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0;
      return;
    }
    begin_turn(game, s, 1 - me);
    return;
  }

  if (action >= game.attack_action(0)) {
    const int lane = action - game.attack_action(0);
    Creature& atk = *ps.lanes[lane];
    log_both(s, me, "at:" + std::to_string(lane) + ";",
             "oat:" + std::to_string(lane) + ";");
    atk.attacked = true;
    if (opp.lanes[lane]) {
      Creature& def = *opp.lanes[lane];
      def.health -= atk.attack;
      atk.health -= def.attack;
      clear_dead(s, me, lane);
      clear_dead(s, 1 - me, lane);
    } else {
      opp.hp -= atk.attack;
      finish_when_dead(game, s);
    }
    return;
  }

  const int rel = action - game.n_cb_actions;
  const int slot = rel / L;
  const int lane = rel % L;
  const int card_id = ps.hand[slot];
  const Card& card = game.pool[card_id];
  ps.mana -= card.cost;
  erase_one(ps.hand, card_id);
  log_both(s, me,
           "pl:" + std::to_string(card_id) + "@" + std::to_string(lane) + ";",
           "opl:" + std::to_string(card_id) + "@" + std::to_string(lane) + ";");
  if (card.kind == CardKind::kCreature) {
    ps.lanes[lane] = Creature{card_id, card.attack, card.health, false};
    return;
  }
  insert_sorted(ps.graveyard, card_id);
  switch (card.effect) {
    case SpellEffect::kDamageFace:
      opp.hp -= card.magnitude;
      finish_when_dead(game, s);
      break;
    case SpellEffect::kDamageCreature:
      opp.lanes[lane]->health -= card.magnitude;
      clear_dead(s, 1 - me, lane);
      break;
    case SpellEffect::kBuffAttack:
      ps.lanes[lane]->attack += card.magnitude;
      break;
  }
}

}  // namespace

CardGameState new_game_raw(const CardGame& game) {
  CardGameState s;
  s.stage = Stage::kBuild;
  s.to_act = 0;
  s.rng = Rng(game.cfg.rng_seed).fork(1);
  for (int p = 0; p < 2; ++p) {
    s.p[p].hp = game.cfg.initial_hp;
    s.p[p].lanes.assign(game.cfg.lanes, std::nullopt);
  }
  if (game.cfg.cb_mode == CbMode::kArena) s.need_candidates = true;
  return s;
}

bool at_chance(const CardGameState& state) {
  return !state.terminal && (state.need_candidates || state.pending_draws > 0);
}

namespace {

// Applies one concrete chance outcome.
void reveal_candidates(CardGameState& s,
                       std::vector<int> cand) {
  s.cb_candidates = std::move(cand);
  s.need_candidates = false;
  s.p[s.to_act].obs += "cd:" + join_ints(s.cb_candidates) + ";";
}

void draw_card(const CardGame& game, CardGameState& s, int card) {
  PlayerState& ps = s.p[s.to_act];
  erase_one(ps.deck, card);
  s.pending_draws -= 1;
  if (static_cast<int>(ps.hand.size()) < game.cfg.hand_limit) {
    insert_sorted(ps.hand, card);
    log_both(s, s.to_act, "dw:" + std::to_string(card) + ";", "odw;");
  } else {
    insert_sorted(ps.graveyard, card);
    log_both(s, s.to_act, "bn:" + std::to_string(card) + ";", "obn;");
  }
}

void subsets_of(const std::vector<int>& items, int k, size_t start,
                std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (size_t i = start; i < items.size(); ++i) {
    cur.push_back(items[i]);
    subsets_of(items, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<std::pair<double, CardGameState>> chance_children(
    const CardGame& game, const CardGameState& state) {
  EQLAB_CHECK(at_chance(state), "chance_children: state is not at a chance event");
  std::vector<std::pair<double, CardGameState>> out;
  if (state.need_candidates) {
    std::vector<int> all(game.cfg.pool_size);
    for (int i = 0; i < game.cfg.pool_size; ++i) all[i] = i;
    std::vector<std::vector<int>> sets;
    std::vector<int> cur;
    subsets_of(all, game.cfg.candidates_per_round, 0, cur, sets);
    const double p = 1.0 / static_cast<double>(sets.size());
    for (auto& set : sets) {
      CardGameState child = state;
      reveal_candidates(child, std::move(set));
      out.emplace_back(p, std::move(child));
    }
    return out;
  }
  // One draw, uniform over the deck multiset; group identical ids.
  const PlayerState& ps = state.p[state.to_act];
  const double unit = 1.0 / static_cast<double>(ps.deck.size());
  for (size_t i = 0; i < ps.deck.size(); ++i) {
    if (i > 0 && ps.deck[i] == ps.deck[i - 1]) {
      out.back().first += unit;
      continue;
    }
    CardGameState child = state;
    draw_card(game, child, ps.deck[i]);
    out.emplace_back(unit, std::move(child));
  }
  return out;
}

void resolve_chance(const CardGame& game, CardGameState& state) {
  while (at_chance(state)) {
    if (state.need_candidates) {
      // Uniform k-subset: partial Fisher-Yates over pool ids, canonical order.
      std::vector<int> ids(game.cfg.pool_size);
      for (int i = 0; i < game.cfg.pool_size; ++i) ids[i] = i;
      std::vector<int> cand;
      for (int j = 0; j < game.cfg.candidates_per_round; ++j) {
        const int pick = j + state.rng.uniform_int(game.cfg.pool_size - j);
        std::swap(ids[j], ids[pick]);
        cand.push_back(ids[j]);
      }
      std::sort(cand.begin(), cand.end());
      reveal_candidates(state, std::move(cand));
    } else {
      const PlayerState& ps = state.p[state.to_act];
      const int idx = state.rng.uniform_int(static_cast<int>(ps.deck.size()));
      draw_card(game, state, ps.deck[idx]);
    }
  }
}

CardGameState new_game(const CardGame& game, std::uint64_t chance_stream) {
  CardGameState s = new_game_raw(game);
  if (chance_stream != 0) s.rng = Rng(game.cfg.rng_seed).fork(1 + chance_stream);
  resolve_chance(game, s);
  return s;
}

ActionMask legal_actions(const CardGame& game, const CardGameState& state,
                         int player) {
  EQLAB_CHECK(!state.terminal, "legal_actions: game is over");
  EQLAB_CHECK(player == state.to_act, "legal_actions: queried off-turn");
  EQLAB_CHECK(!at_chance(state), "legal_actions: chance event pending");
  ActionMask mask;
  mask.legal.assign(game.num_actions, 0);
  const PlayerState& ps = state.p[player];
  const PlayerState& opp = state.p[1 - player];

  if (state.stage == Stage::kBuild) {
    if (game.cfg.cb_mode == CbMode::kArena) {
      for (size_t i = 0; i < state.cb_candidates.size(); ++i) mask.legal[i] = 1;
    } else {
      // Constructed picks are without replacement.
      for (int c = 0; c < game.cfg.pool_size; ++c)
        if (!std::binary_search(ps.deck.begin(), ps.deck.end(), c))
          mask.legal[c] = 1;
    }
    return mask;
  }

  for (size_t j = 0; j < ps.hand.size(); ++j) {
    if (j > 0 && ps.hand[j] == ps.hand[j - 1]) continue;  // one slot per card id
    const Card& card = game.pool[ps.hand[j]];
    if (card.cost > ps.mana) continue;
    for (int l = 0; l < game.cfg.lanes; ++l) {
      bool ok = false;
      if (card.kind == CardKind::kCreature) {
        ok = !ps.lanes[l].has_value();
      } else {
        switch (card.effect) {
          case SpellEffect::kDamageFace: ok = l == 0; break;
          case SpellEffect::kDamageCreature: ok = opp.lanes[l].has_value(); break;
          case SpellEffect::kBuffAttack: ok = ps.lanes[l].has_value(); break;
        }
      }
      if (ok) mask.legal[game.play_action(static_cast<int>(j), l)] = 1;
    }
  }
  for (int l = 0; l < game.cfg.lanes; ++l)
    if (ps.lanes[l] && !ps.lanes[l]->attacked)
      mask.legal[game.attack_action(l)] = 1;
  mask.legal[game.end_action()] = 1;
  return mask;
}

CardGameState apply_action(const CardGame& game, CardGameState state, int action) {
  const ActionMask mask = legal_actions(game, state, state.to_act);
  EQLAB_CHECK(mask.is_legal(action), "apply_action: illegal action");
  if (state.stage == Stage::kBuild)
    apply_cb_pick(game, state, action);
  else
    apply_battle_action(game, state, action);
  return state;
}

CardGameState step(const CardGame& game, CardGameState state, int action) {
  CardGameState next = apply_action(game, std::move(state), action);
  resolve_chance(game, next);
  return next;
}

InfoState observe(const CardGame& game, const CardGameState& state, int player) {
  (void)game;
  const PlayerState& ps = state.p[player];
  const PlayerState& opp = state.p[1 - player];
  InfoState is;
  is.player = player;
  is.stage = state.stage;
  is.key = (state.stage == Stage::kBuild ? "CB|P" : "BT|P") +
           std::to_string(player) + "|" + ps.obs;
  is.hand = ps.hand;
  is.own_deck_count = static_cast<int>(ps.deck.size());
  is.opp_deck_count = static_cast<int>(opp.deck.size());
  is.opp_hand_count = static_cast<int>(opp.hand.size());
  is.own_hp = ps.hp;
  is.opp_hp = opp.hp;
  is.own_mana = ps.mana;
  is.opp_mana = opp.mana;
  is.own_lanes = ps.lanes;
  is.opp_lanes = opp.lanes;
  is.cb_candidates = state.cb_candidates;
  is.cb_progress = ps.cb_progress;
  return is;
}

int ActionMask::count() const {
  int n = 0;
  for (auto b : legal) n += b != 0;
  return n;
}

std::vector<int> ActionMask::legal_ids() const {
  std::vector<int> ids;
  for (size_t i = 0; i < legal.size(); ++i)
    if (legal[i]) ids.push_back(static_cast<int>(i));
  return ids;
}

namespace {

struct TreeBuild {
  const CardGame& game;
  efg::GameTreeBuilder builder;
  long long budget;
  long long count = 0;

  void charge() {
    if (++count > budget)
      throw BudgetExceeded("card game tree exceeds node budget", count);
  }

  int expand(const CardGameState& s) {
    if (s.terminal) {
      charge();
      return builder.add_leaf(s.reward);
    }
    if (at_chance(s)) {
      auto outcomes = chance_children(game, s);
      if (outcomes.size() == 1) return expand(outcomes[0].second);
      std::vector<int> children;
      std::vector<double> probs;
      for (auto& [p, child] : outcomes) {
        children.push_back(expand(child));
        probs.push_back(p);
      }
      charge();
      return builder.add_chance(std::move(children), std::move(probs));
    }
    const InfoState is = observe(game, s, s.to_act);
    const ActionMask mask = legal_actions(game, s, s.to_act);
    const std::vector<int> acts = mask.legal_ids();
    std::vector<int> children;
    for (int a : acts) children.push_back(expand(apply_action(game, s, a)));
    charge();
    return builder.add_decision(s.to_act, is.key, std::move(children), acts);
  }
};

}  // namespace

efg::GameTree to_game_tree(const CardGame& game, long long node_budget) {
  TreeBuild tb{game, {}, node_budget};
  const int root = tb.expand(new_game_raw(game));
  return tb.builder.build(root, node_budget);
}

std::string action_name(const CardGame& game, int action) {
  if (action < game.n_cb_actions) return "pick" + std::to_string(action);
  if (action == game.end_action()) return "end";
  if (action >= game.attack_action(0))
    return "attack@" + std::to_string(action - game.attack_action(0));
  const int rel = action - game.n_cb_actions;
  return "play" + std::to_string(rel / game.cfg.lanes) + "@" +
         std::to_string(rel % game.cfg.lanes);
}

std::vector<TrajectoryEvent> replay(const CardGame& game,
                                    const std::vector<int>& actions,
                                    CardGameState* final_state) {
  CardGameState s = new_game(game);
  std::vector<TrajectoryEvent> events;
  for (int a : actions) {
    EQLAB_CHECK(!s.terminal, "replay: action after the game ended");
    const int player = s.to_act;
    const int turn = s.p[player].turns_taken;
    s = step(game, s, a);
    events.push_back({turn, player, a, s.terminal ? s.reward : 0.0});
  }
  if (final_state) *final_state = s;
  return events;
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryEvent>& events) {
  for (const auto& e : events)
    out << e.turn << ' ' << e.player << ' ' << e.action << ' '
        << fmt_double(e.reward) << '\n';
}

std::string CardGameState::debug_string() const {
  std::ostringstream os;
  os << (stage == Stage::kBuild ? "CB" : "BT") << " to_act=" << to_act
     << " terminal=" << terminal << " reward=" << reward
     << " rng=" << rng.seed() << "/" << rng.counter()
     << " pending=" << pending_draws << " needc=" << need_candidates
     << " cand=" << join_ints(cb_candidates) << '\n';
  for (int i = 0; i < 2; ++i) {
    const PlayerState& ps = p[i];
    os << "P" << i << " hp=" << ps.hp << " mana=" << ps.mana
       << " cb=" << ps.cb_progress << " turns=" << ps.turns_taken
       << " deck=" << join_ints(ps.deck) << " hand=" << join_ints(ps.hand)
       << " grave=" << join_ints(ps.graveyard) << " lanes=";
    for (const auto& l : ps.lanes) {
      if (l)
        os << '[' << l->card_id << '/' << l->attack << '/' << l->health << '/'
           << l->attacked << ']';
      else
        os << "[]";
    }
    os << " obs=" << ps.obs << '\n';
  }
  return os.str();
}

}  // namespace eqlab::card
