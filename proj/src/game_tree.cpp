#include "eqlab/game_tree.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace eqlab::efg {

int GameTreeBuilder::add_decision(int player, std::string infoset_key,
                                  std::vector<int> children,
                                  std::vector<int> action_labels) {
  EQLAB_CHECK(player == 0 || player == 1, "decision node: player must be 0 or 1");
  EQLAB_CHECK(!children.empty(), "decision node: needs at least one action");
  EQLAB_CHECK(infoset_key.find_first_of(" \t\n") == std::string::npos,
              "infoset keys must not contain whitespace");
  if (action_labels.empty()) {
    action_labels.resize(children.size());
    std::iota(action_labels.begin(), action_labels.end(), 0);
  }
  EQLAB_CHECK(action_labels.size() == children.size(),
              "decision node: one label per action");
  GameTree::Node n;
  n.player = player;
  n.children = std::move(children);
  nodes_.push_back(std::move(n));
  keys_.push_back(std::move(infoset_key));
  labels_.push_back(std::move(action_labels));
  return static_cast<int>(nodes_.size()) - 1;
}

int GameTreeBuilder::add_chance(std::vector<int> children, std::vector<double> probs) {
  EQLAB_CHECK(!children.empty(), "chance node: needs outcomes");
  EQLAB_CHECK(children.size() == probs.size(), "chance node: one prob per child");
  double sum = 0.0;
  for (double p : probs) {
    EQLAB_CHECK(p >= 0.0, "chance node: negative probability");
    sum += p;
  }
  EQLAB_CHECK(std::abs(sum - 1.0) <= 1e-9, "chance node: probabilities must sum to 1");
  GameTree::Node n;
  n.player = kChancePlayer;
  n.children = std::move(children);
  n.chance_probs = std::move(probs);
  nodes_.push_back(std::move(n));
  keys_.emplace_back();
  labels_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

int GameTreeBuilder::add_leaf(double payoff) {
  EQLAB_CHECK(std::isfinite(payoff), "leaf payoff must be finite");
  GameTree::Node n;
  n.player = kLeafPlayer;
  n.payoff = payoff;
  nodes_.push_back(std::move(n));
  keys_.emplace_back();
  labels_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

GameTree GameTreeBuilder::build(int root, long long budget) {
  EQLAB_CHECK(root >= 0 && root < static_cast<int>(nodes_.size()), "bad root id");
  if (budget > 0 && static_cast<long long>(nodes_.size()) > budget)
    throw BudgetExceeded("game tree exceeds node budget",
                         static_cast<long long>(nodes_.size()));

  GameTree gt;
  // Breadth-first renumbering; parents end up before children.
  std::vector<int> order;
  std::vector<int> remap(nodes_.size(), -1);
  std::deque<int> queue{root};
  remap[root] = 0;
  order.push_back(root);
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    for (int c : nodes_[id].children) {
      EQLAB_CHECK(c >= 0 && c < static_cast<int>(nodes_.size()), "bad child id");
      EQLAB_CHECK(remap[c] == -1, "node reachable twice; the structure must be a tree");
      remap[c] = static_cast<int>(order.size());
      order.push_back(c);
      queue.push_back(c);
    }
  }

  gt.nodes_.resize(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    GameTree::Node n = nodes_[order[i]];
    for (int& c : n.children) c = remap[c];
    gt.nodes_[i] = std::move(n);
  }

  // Discover information states in topological order and check perfect
  // recall: every node of an information state must share the acting
  // player's parent sequence, action count and action labels.
  std::map<std::pair<int, std::string>, int> infoset_ids;
  for (size_t i = 0; i < gt.nodes_.size(); ++i) {
    GameTree::Node& n = gt.nodes_[i];
    if (n.is_leaf()) {
      EQLAB_CHECK(n.children.empty(), "leaf with children");
      gt.leaves_.push_back(static_cast<int>(i));
      continue;
    }
    if (n.is_chance()) {
      for (size_t c = 0; c < n.children.size(); ++c) {
        GameTree::Node& ch = gt.nodes_[n.children[c]];
        ch.seq[0] = n.seq[0];
        ch.seq[1] = n.seq[1];
        ch.chance_reach = n.chance_reach * n.chance_probs[c];
      }
      continue;
    }
    const int p = n.player;
    Treeplex& tp = gt.plex_[p];
    const std::string& key = keys_[order[i]];
    const std::vector<int>& labels = labels_[order[i]];
    auto [it, inserted] = infoset_ids.try_emplace({p, key}, tp.num_infosets());
    if (inserted) {
      Treeplex::InfoSet is;
      is.key = key;
      is.num_actions = static_cast<int>(n.children.size());
      is.parent_seq = n.seq[p];
      is.first_seq = tp.num_sequences;
      is.action_labels = labels;
      tp.num_sequences += is.num_actions;
      tp.infosets.push_back(std::move(is));
      gt.infoset_nodes_[p].emplace_back();
    }
    const int s = it->second;
    const Treeplex::InfoSet& is = tp.infosets[s];
    EQLAB_CHECK(is.num_actions == static_cast<int>(n.children.size()),
                "perfect recall: information state '" + key +
                    "' has inconsistent action sets");
    EQLAB_CHECK(is.action_labels == labels,
                "perfect recall: information state '" + key +
                    "' has inconsistent action labels");
    EQLAB_CHECK(is.parent_seq == n.seq[p],
                "perfect recall: information state '" + key +
                    "' reached through different own histories");
    n.infoset = s;
    gt.infoset_nodes_[p][s].push_back(static_cast<int>(i));
    for (size_t a = 0; a < n.children.size(); ++a) {
      GameTree::Node& ch = gt.nodes_[n.children[a]];
      ch.seq[0] = n.seq[0];
      ch.seq[1] = n.seq[1];
      ch.seq[p] = tp.infosets[s].first_seq + static_cast<int>(a);
      ch.chance_reach = n.chance_reach;
    }
  }

  for (int p = 0; p < 2; ++p) {
    Treeplex& tp = gt.plex_[p];
    tp.seq_children.assign(tp.num_sequences, {});
    for (int s = 0; s < tp.num_infosets(); ++s) {
      const int parent = tp.infosets[s].parent_seq;
      if (parent < 0)
        tp.root_infosets.push_back(s);
      else
        tp.seq_children[parent].push_back(s);
    }
  }
  return gt;
}

void GameTree::save(std::ostream& out) const {
  out << "efg v1\n" << nodes_.size() << '\n';
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    out << i << ' ';
    if (n.is_leaf()) {
      out << "t " << fmt_double(n.payoff);
    } else if (n.is_chance()) {
      out << "c " << n.children.size();
      for (int c : n.children) out << ' ' << c;
      for (double p : n.chance_probs) out << ' ' << fmt_double(p);
    } else {
      const Treeplex::InfoSet& is = plex_[n.player].infosets[n.infoset];
      out << "d " << n.player << ' ' << is.key << ' ' << n.children.size();
      for (int c : n.children) out << ' ' << c;
      for (int l : is.action_labels) out << ' ' << l;
    }
    out << '\n';
  }
}

GameTree GameTree::load(std::istream& in) {
  std::string tag, version;
  in >> tag >> version;
  if (tag != "efg" || version != "v1") throw ConfigError("game tree: bad header");
  size_t count = 0;
  if (!(in >> count) || count == 0) throw ConfigError("game tree: bad node count");

  GameTreeBuilder b;
  std::vector<int> ids(count);
  for (size_t i = 0; i < count; ++i) {
    size_t id;
    std::string kind;
    if (!(in >> id >> kind) || id != i)
      throw ConfigError("game tree: nodes must be listed in order");
    if (kind == "t") {
      double payoff;
      if (!(in >> payoff)) throw ConfigError("game tree: bad leaf");
      ids[i] = b.add_leaf(payoff);
    } else if (kind == "c") {
      size_t nc;
      if (!(in >> nc) || nc == 0) throw ConfigError("game tree: bad chance node");
      std::vector<int> children(nc);
      std::vector<double> probs(nc);
      for (auto& c : children)
        if (!(in >> c)) throw ConfigError("game tree: bad chance child");
      for (auto& p : probs)
        if (!(in >> p)) throw ConfigError("game tree: bad chance prob");
      ids[i] = b.add_chance(std::move(children), std::move(probs));
    } else if (kind == "d") {
      int player;
      std::string key;
      size_t nc;
      if (!(in >> player >> key >> nc) || nc == 0)
        throw ConfigError("game tree: bad decision node");
      std::vector<int> children(nc);
      std::vector<int> labels(nc);
      for (auto& c : children)
        if (!(in >> c)) throw ConfigError("game tree: bad child");
      for (auto& l : labels)
        if (!(in >> l)) throw ConfigError("game tree: bad label");
      ids[i] = b.add_decision(player, std::move(key), std::move(children),
                              std::move(labels));
    } else {
      throw ConfigError("game tree: unknown node kind '" + kind + "'");
    }
  }
  // Children reference original ids; they are written in BFS order so the
  // identity map is correct.
  (void)ids;
  return b.build(0);
}

GameTree GameTree::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("game tree: cannot open " + path);
  return load(in);
}

GameTree GameTree::matching_pennies() {
  GameTreeBuilder b;
  // Payoffs are the first player's return; heads/heads favors player 2
  // under the usual "matcher minimizes" convention used by the matrix
  // preset, so returns are -A entries.
  const int ll = b.add_leaf(-1), lr = b.add_leaf(1);
  const int rl = b.add_leaf(1), rr = b.add_leaf(-1);
  const int yl = b.add_decision(1, "y", {ll, lr});
  const int yr = b.add_decision(1, "y", {rl, rr});
  const int root = b.add_decision(0, "x", {yl, yr});
  return b.build(root);
}

}  // namespace eqlab::efg
