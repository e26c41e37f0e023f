#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eqlab/common.hpp"

namespace eqlab::efg {

inline constexpr int kChancePlayer = -1;
inline constexpr int kLeafPlayer = -2;

// One player's sequence-form index: information states in topological order
// (parents first), each owning a contiguous block of sequences, one per
// action. parent_seq is the player's own edge that leads into the
// information state, -1 for the empty sequence.
struct Treeplex {
  struct InfoSet {
    std::string key;
    int num_actions = 0;
    int parent_seq = -1;
    int first_seq = 0;
    // External action ids (e.g. flat card-game actions); 0..n-1 by default.
    std::vector<int> action_labels;
  };

  std::vector<InfoSet> infosets;
  int num_sequences = 0;
  // Information states hanging under each sequence; index -1 is kept
  // separately in root_infosets.
  std::vector<std::vector<int>> seq_children;
  std::vector<int> root_infosets;

  int num_infosets() const { return static_cast<int>(infosets.size()); }
  int seq(int s, int a) const { return infosets[s].first_seq + a; }
};

// Two-player zero-sum extensive-form game with chance. Leaf payoffs are the
// FIRST player's return; the second player's return is the negation. Nodes
// are stored in breadth-first order, so index order is topological.
class GameTree {
 public:
  struct Node {
    int player = kLeafPlayer;         // 0, 1, kChancePlayer or kLeafPlayer
    int infoset = -1;                 // id in the acting player's treeplex
    std::vector<int> children;
    std::vector<double> chance_probs; // parallel to children at chance nodes
    double payoff = 0.0;              // first player's return (leaves)
    int seq[2] = {-1, -1};            // each player's last own sequence above
    double chance_reach = 1.0;        // product of chance probs from the root

    bool is_leaf() const { return player == kLeafPlayer; }
    bool is_chance() const { return player == kChancePlayer; }
    bool is_decision() const { return player >= 0; }
  };

  const Node& node(int id) const { return nodes_[id]; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& leaves() const { return leaves_; }
  const Treeplex& plex(int player) const { return plex_[player]; }
  // Node ids grouped by information state, per player.
  const std::vector<std::vector<int>>& infoset_nodes(int player) const {
    return infoset_nodes_[player];
  }

  // Line-oriented text format, documented in the README. Keys must not
  // contain whitespace.
  void save(std::ostream& out) const;
  static GameTree load(std::istream& in);
  static GameTree load_file(const std::string& path);

  // Matching pennies as a two-level imperfect-information tree: the second
  // player moves without observing the first player's action.
  static GameTree matching_pennies();

 private:
  friend class GameTreeBuilder;
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
  Treeplex plex_[2];
  std::vector<std::vector<int>> infoset_nodes_[2];
};

// Assembles nodes in any order (children before parents is convenient),
// then build() reorders breadth-first from the root, derives both
// treeplexes and validates perfect recall.
class GameTreeBuilder {
 public:
  int add_decision(int player, std::string infoset_key, std::vector<int> children,
                   std::vector<int> action_labels = {});
  int add_chance(std::vector<int> children, std::vector<double> probs);
  int add_leaf(double payoff);

  // `budget`: maximum node count, guards runaway enumerations.
  GameTree build(int root, long long budget = -1);

 private:
  std::vector<GameTree::Node> nodes_;
  std::vector<std::string> keys_;
  std::vector<std::vector<int>> labels_;
};

}  // namespace eqlab::efg
