#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "eqlab/cardgame.hpp"
#include "eqlab/common.hpp"
#include "eqlab/treeplex_ops.hpp"

namespace eqlab::pg {

using card::Stage;

// Policy as logit tables keyed by information-state key, held in two
// disjoint parameter blocks selected by the stage indicator: the acting
// policy is the build-stage table on build states and the battle-stage
// table otherwise. Unseen states read as all-zero logits.
class TabularPolicy {
 public:
  // Logit row for a key, grown to at least `min_size` (new entries zero).
  Vector& logits(Stage stage, const std::string& key, int min_size);
  const Vector* find(Stage stage, const std::string& key) const;

  // Simplex over the flat action space: softmax(logits / tau) restricted to
  // mask-legal actions, zero elsewhere. tau = 0 returns the argmax one-hot
  // (lowest legal index wins ties).
  Vector act(const card::InfoState& s, const card::ActionMask& mask,
             double tau) const;

  // Same, over an explicit list of legal action labels (tree bridge). The
  // stage is parsed from the key prefix ("CB|..." selects the build block).
  Vector act_on_labels(const std::string& key, const std::vector<int>& labels,
                       double tau) const;

  static Stage stage_of_key(const std::string& key);

  const std::map<std::string, Vector>& block(Stage stage) const {
    return stage == Stage::kBuild ? cb_ : bt_;
  }
  std::map<std::string, Vector>& mutable_block(Stage stage) {
    return stage == Stage::kBuild ? cb_ : bt_;
  }
  bool block_identical(const TabularPolicy& other, Stage stage) const;

  void save(std::ostream& out) const;
  static TabularPolicy load(std::istream& in);
  void save_file(const std::string& path) const;
  static TabularPolicy load_file(const std::string& path);

 private:
  std::map<std::string, Vector> cb_;
  std::map<std::string, Vector> bt_;
};

// Induced behavioral policy on a flattened game: one distribution per
// information state of `player`, using each information state's action
// labels.
efg::BehavioralPolicy policy_behavioral(const efg::GameTree& gt, int player,
                                        const TabularPolicy& policy, double tau);
efg::SequencePolicy policy_sequence(const efg::GameTree& gt, int player,
                                    const TabularPolicy& policy, double tau);

}  // namespace eqlab::pg
