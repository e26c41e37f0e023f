#include "eqlab/tabular_policy.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eqlab/simplex.hpp"
#include "eqlab/treeplex_ops.hpp"

namespace eqlab::pg {

Vector& TabularPolicy::logits(Stage stage, const std::string& key, int min_size) {
  auto& block = stage == Stage::kBuild ? cb_ : bt_;
  Vector& row = block[key];
  if (row.size() < min_size) {
    Vector grown = Vector::Zero(min_size);
    grown.head(row.size()) = row;
    row = std::move(grown);
  }
  return row;
}

const Vector* TabularPolicy::find(Stage stage, const std::string& key) const {
  const auto& block = stage == Stage::kBuild ? cb_ : bt_;
  const auto it = block.find(key);
  return it == block.end() ? nullptr : &it->second;
}

namespace {

double logit_at(const Vector* row, int index) {
  return row && index < row->size() ? (*row)[index] : 0.0;
}

// Softmax over an index subset with temperature; tau = 0 is argmax.
Vector masked_policy(const Vector* row, const std::vector<int>& ids, int out_size,
                     double tau) {
  Vector p = Vector::Zero(out_size);
  if (tau == 0.0) {
    int best = ids[0];
    for (int a : ids)
      if (logit_at(row, a) > logit_at(row, best)) best = a;
    p[best] = 1.0;
    return p;
  }
  double m = -1e300;
  for (int a : ids) m = std::max(m, logit_at(row, a) / tau);
  double z = 0.0;
  for (int a : ids) z += std::exp(logit_at(row, a) / tau - m);
  for (int a : ids) p[a] = std::exp(logit_at(row, a) / tau - m) / z;
  return p;
}

}  // namespace

Vector TabularPolicy::act(const card::InfoState& s, const card::ActionMask& mask,
                          double tau) const {
  EQLAB_CHECK(tau >= 0.0, "act: tau must be nonnegative");
  const std::vector<int> ids = mask.legal_ids();
  EQLAB_CHECK(!ids.empty(), "act: empty action mask");
  return masked_policy(find(s.stage, s.key), ids,
                       static_cast<int>(mask.legal.size()), tau);
}

Vector TabularPolicy::act_on_labels(const std::string& key,
                                    const std::vector<int>& labels,
                                    double tau) const {
  EQLAB_CHECK(!labels.empty(), "act_on_labels: no actions");
  int size = 0;
  for (int l : labels) size = std::max(size, l + 1);
  const Vector full =
      masked_policy(find(stage_of_key(key), key), labels, size, tau);
  Vector p(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) p[i] = full[labels[i]];
  return p;
}

Stage TabularPolicy::stage_of_key(const std::string& key) {
  return key.rfind("CB|", 0) == 0 ? Stage::kBuild : Stage::kBattle;
}

bool TabularPolicy::block_identical(const TabularPolicy& other, Stage stage) const {
  const auto& a = block(stage);
  const auto& b = other.block(stage);
  if (a.size() != b.size()) return false;
  for (auto ita = a.begin(), itb = b.begin(); ita != a.end(); ++ita, ++itb) {
    if (ita->first != itb->first) return false;
    if (ita->second.size() != itb->second.size()) return false;
    if (std::memcmp(ita->second.data(), itb->second.data(),
                    sizeof(double) * ita->second.size()) != 0)
      return false;
  }
  return true;
}

void TabularPolicy::save(std::ostream& out) const {
  out << "eqlab-policy v1\n";
  for (int stage = 0; stage < 2; ++stage) {
    const auto& block = stage == 0 ? cb_ : bt_;
    for (const auto& [key, row] : block) {
      out << (stage == 0 ? "CB " : "BT ") << key << ' ' << row.size();
      for (Index i = 0; i < row.size(); ++i) out << ' ' << fmt_double(row[i]);
      out << '\n';
    }
  }
}

TabularPolicy TabularPolicy::load(std::istream& in) {
  std::string tag, version;
  in >> tag >> version;
  if (tag != "eqlab-policy" || version != "v1")
    throw ConfigError("policy file: bad header");
  TabularPolicy p;
  std::string stage, key;
  while (in >> stage >> key) {
    Index n = 0;
    if (!(in >> n) || n < 0) throw ConfigError("policy file: bad row size");
    Vector row(n);
    for (Index i = 0; i < n; ++i)
      if (!(in >> row[i])) throw ConfigError("policy file: bad logit");
    if (stage == "CB") p.cb_[key] = std::move(row);
    else if (stage == "BT") p.bt_[key] = std::move(row);
    else throw ConfigError("policy file: bad stage tag " + stage);
  }
  return p;
}

void TabularPolicy::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("policy file: cannot write " + path);
  save(out);
}

TabularPolicy TabularPolicy::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("policy file: cannot open " + path);
  return load(in);
}

efg::BehavioralPolicy policy_behavioral(const efg::GameTree& gt, int player,
                                        const TabularPolicy& policy, double tau) {
  efg::BehavioralPolicy pi;
  for (const auto& is : gt.plex(player).infosets)
    pi.pi.push_back(policy.act_on_labels(is.key, is.action_labels, tau));
  return pi;
}

efg::SequencePolicy policy_sequence(const efg::GameTree& gt, int player,
                                    const TabularPolicy& policy, double tau) {
  return efg::behavioral_to_sequence(gt.plex(player),
                                     policy_behavioral(gt, player, policy, tau));
}

}  // namespace eqlab::pg
