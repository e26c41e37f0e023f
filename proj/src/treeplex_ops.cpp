#include "eqlab/treeplex_ops.hpp"

#include <cmath>

#include "eqlab/simplex.hpp"

namespace eqlab::efg {

BehavioralPolicy uniform_behavioral(const Treeplex& tp) {
  BehavioralPolicy pi;
  pi.pi.reserve(tp.infosets.size());
  for (const auto& is : tp.infosets) pi.pi.push_back(uniform_simplex(is.num_actions));
  return pi;
}

void validate_sequence_policy(const Treeplex& tp, const SequencePolicy& x, double tol) {
  EQLAB_CHECK(x.size() == tp.num_sequences, "sequence policy has wrong dimension");
  EQLAB_CHECK((x.array() >= -tol).all() && (x.array() <= 1.0 + tol).all(),
              "sequence policy entries must lie in [0, 1]");
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    double sum = 0.0;
    for (int a = 0; a < is.num_actions; ++a) sum += x[is.first_seq + a];
    const double parent = is.parent_seq < 0 ? 1.0 : x[is.parent_seq];
    EQLAB_CHECK(std::abs(sum - parent) <= tol,
                "sequence policy violates flow conservation at '" + is.key + "'");
  }
}

SequencePolicy behavioral_to_sequence(const Treeplex& tp, const BehavioralPolicy& pi) {
  EQLAB_CHECK(static_cast<int>(pi.pi.size()) == tp.num_infosets(),
              "behavioral policy has wrong number of information states");
  SequencePolicy x = SequencePolicy::Zero(tp.num_sequences);
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    EQLAB_CHECK(is_simplex(pi.pi[s]), "behavioral policy entry is not a simplex");
    const double mass = is.parent_seq < 0 ? 1.0 : x[is.parent_seq];
    for (int a = 0; a < is.num_actions; ++a)
      x[is.first_seq + a] = mass * pi.pi[s][a];
  }
  return x;
}

BehavioralPolicy sequence_to_behavioral(const Treeplex& tp, const SequencePolicy& x) {
  validate_sequence_policy(tp, x);
  BehavioralPolicy pi;
  pi.pi.reserve(tp.infosets.size());
  for (const auto& is : tp.infosets) {
    double sum = 0.0;
    for (int a = 0; a < is.num_actions; ++a) sum += x[is.first_seq + a];
    if (sum > 0.0) {
      Vector p(is.num_actions);
      for (int a = 0; a < is.num_actions; ++a) p[a] = x[is.first_seq + a] / sum;
      pi.pi.push_back(std::move(p));
    } else {
      pi.pi.push_back(uniform_simplex(is.num_actions));
    }
  }
  return pi;
}

namespace {

inline double seq_value(const SequencePolicy& x, int seq) {
  return seq < 0 ? 1.0 : x[seq];
}

}  // namespace

double expected_return(const GameTree& gt, const SequencePolicy& x,
                       const SequencePolicy& y) {
  validate_sequence_policy(gt.plex(0), x);
  validate_sequence_policy(gt.plex(1), y);
  double total = 0.0;
  for (int leaf : gt.leaves()) {
    const auto& n = gt.node(leaf);
    total += seq_value(x, n.seq[0]) * seq_value(y, n.seq[1]) * n.chance_reach * n.payoff;
  }
  return total;
}

SeqPayoff sequence_payoff(const GameTree& gt, const SequencePolicy& x,
                          const SequencePolicy& y) {
  SeqPayoff f{Vector::Zero(gt.plex(0).num_sequences),
              Vector::Zero(gt.plex(1).num_sequences)};
  for (int leaf : gt.leaves()) {
    const auto& n = gt.node(leaf);
    const double r = n.chance_reach * n.payoff;
    if (n.seq[0] >= 0) f.f0[n.seq[0]] -= seq_value(y, n.seq[1]) * r;
    if (n.seq[1] >= 0) f.f1[n.seq[1]] += seq_value(x, n.seq[0]) * r;
  }
  return f;
}

CfValues counterfactual_q(const GameTree& gt, const SequencePolicy& x,
                          const SequencePolicy& y, int player) {
  EQLAB_CHECK(player == 0 || player == 1, "player must be 0 or 1");
  validate_sequence_policy(gt.plex(0), x);
  validate_sequence_policy(gt.plex(1), y);
  const Treeplex& tp = gt.plex(player);
  const BehavioralPolicy pi0 = sequence_to_behavioral(gt.plex(0), x);
  const BehavioralPolicy pi1 = sequence_to_behavioral(gt.plex(1), y);

  // Backward pass: node values under both policies, from `player`'s side.
  const double sign = player == 0 ? 1.0 : -1.0;
  std::vector<double> value(gt.num_nodes(), 0.0);
  for (int id = gt.num_nodes() - 1; id >= 0; --id) {
    const auto& n = gt.node(id);
    if (n.is_leaf()) {
      value[id] = sign * n.payoff;
    } else if (n.is_chance()) {
      double v = 0.0;
      for (size_t c = 0; c < n.children.size(); ++c)
        v += n.chance_probs[c] * value[n.children[c]];
      value[id] = v;
    } else {
      const Vector& p =
          (n.player == 0 ? pi0 : pi1).pi[n.infoset];
      double v = 0.0;
      for (size_t c = 0; c < n.children.size(); ++c)
        v += p[c] * value[n.children[c]];
      value[id] = v;
    }
  }

  CfValues cf;
  cf.q = Vector::Zero(tp.num_sequences);
  cf.rho_s = Vector::Zero(tp.num_infosets());
  cf.v = Vector::Zero(tp.num_infosets());
  cf.reached.assign(tp.num_infosets(), 0);

  // Forward reach of every node of the queried player, including chance and
  // both players' own probabilities.
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    double rho = 0.0;
    Vector w = Vector::Zero(is.num_actions);
    double v_state = 0.0;
    for (int id : gt.infoset_nodes(player)[s]) {
      const auto& n = gt.node(id);
      const double reach =
          seq_value(x, n.seq[0]) * seq_value(y, n.seq[1]) * n.chance_reach;
      rho += reach;
      v_state += reach * value[id];
      for (int a = 0; a < is.num_actions; ++a)
        w[a] += reach * value[n.children[a]];
    }
    cf.rho_s[s] = rho;
    if (rho > 0.0) {
      cf.reached[s] = 1;
      cf.v[s] = v_state / rho;
      for (int a = 0; a < is.num_actions; ++a) cf.q[is.first_seq + a] = w[a] / rho;
    }
  }
  return cf;
}

std::pair<SequencePolicy, double> exact_br(const GameTree& gt,
                                           const SequencePolicy& opponent,
                                           int player) {
  EQLAB_CHECK(player == 0 || player == 1, "player must be 0 or 1");
  const int opp = 1 - player;
  const Treeplex& tp = gt.plex(player);
  validate_sequence_policy(gt.plex(opp), opponent);

  const double sign = player == 0 ? 1.0 : -1.0;
  // Weight of each own sequence: opponent and chance reach times return,
  // accumulated over leaves. g_empty collects leaves the responder never
  // acts before.
  Vector g = Vector::Zero(tp.num_sequences);
  double g_empty = 0.0;
  for (int leaf : gt.leaves()) {
    const auto& n = gt.node(leaf);
    const double w =
        seq_value(opponent, n.seq[opp]) * n.chance_reach * sign * n.payoff;
    if (n.seq[player] >= 0)
      g[n.seq[player]] += w;
    else
      g_empty += w;
  }

  // Bottom-up: best achievable mass-1 value of each information state.
  std::vector<double> best(tp.num_infosets(), 0.0);
  std::vector<int> pick(tp.num_infosets(), 0);
  for (int s = tp.num_infosets() - 1; s >= 0; --s) {
    const auto& is = tp.infosets[s];
    double best_v = 0.0;
    int best_a = 0;
    for (int a = 0; a < is.num_actions; ++a) {
      double v = g[is.first_seq + a];
      for (int sc : tp.seq_children[is.first_seq + a]) v += best[sc];
      if (a == 0 || v > best_v) {
        best_v = v;
        best_a = a;
      }
    }
    best[s] = best_v;
    pick[s] = best_a;
  }

  double value = g_empty;
  for (int s : tp.root_infosets) value += best[s];

  // Top-down vertex: the argmax action carries the parent mass everywhere.
  SequencePolicy x = SequencePolicy::Zero(tp.num_sequences);
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    const double mass = is.parent_seq < 0 ? 1.0 : x[is.parent_seq];
    x[is.first_seq + pick[s]] = mass;
  }
  return {std::move(x), value};
}

double exploitability(const GameTree& gt, const SequencePolicy& x,
                      const SequencePolicy& y) {
  return exact_br(gt, y, 0).second + exact_br(gt, x, 1).second;
}

double dilated_entropy(const Treeplex& tp, const SequencePolicy& x) {
  validate_sequence_policy(tp, x);
  double psi = 0.0;
  for (const auto& is : tp.infosets) {
    double sum = 0.0;
    for (int a = 0; a < is.num_actions; ++a) sum += x[is.first_seq + a];
    if (sum <= 0.0) continue;
    for (int a = 0; a < is.num_actions; ++a) psi += xlogx(x[is.first_seq + a]);
    psi -= xlogx(sum);
  }
  return psi;
}

SequencePolicy sbr_treeplex(const Treeplex& tp, const Vector& g, double mu) {
  EQLAB_CHECK(mu > 0.0, "sbr_treeplex: mu must be positive");
  EQLAB_CHECK(g.size() == tp.num_sequences, "sbr_treeplex: gradient dimension");

  // Bottom-up soft-min. smoothed[s] = -mu log sum_a exp(-(c_sa)/mu) where
  // c_sa adds the smoothed values of the information states below (s,a).
  std::vector<double> smoothed(tp.num_infosets(), 0.0);
  std::vector<Vector> pi(tp.num_infosets());
  for (int s = tp.num_infosets() - 1; s >= 0; --s) {
    const auto& is = tp.infosets[s];
    Vector c(is.num_actions);
    for (int a = 0; a < is.num_actions; ++a) {
      double v = g[is.first_seq + a];
      for (int sc : tp.seq_children[is.first_seq + a]) v += smoothed[sc];
      c[a] = -v / mu;
    }
    const double m = c.maxCoeff();
    const Vector e = (c.array() - m).exp();
    const double z = e.sum();
    pi[s] = e / z;
    smoothed[s] = -mu * (m + std::log(z));
  }

  SequencePolicy x = SequencePolicy::Zero(tp.num_sequences);
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    const double mass = is.parent_seq < 0 ? 1.0 : x[is.parent_seq];
    for (int a = 0; a < is.num_actions; ++a)
      x[is.first_seq + a] = mass * pi[s][a];
  }
  return x;
}

EfgSolveResult osfp_solve(const GameTree& gt, double eta, int iters,
                          int log_every, bool optimistic, double stop_below) {
  EQLAB_CHECK(eta > 0.0, "osfp_solve: eta must be positive");
  EQLAB_CHECK(iters >= 1, "osfp_solve: iters must be >= 1");
  const Treeplex& tp0 = gt.plex(0);
  const Treeplex& tp1 = gt.plex(1);

  SequencePolicy x = behavioral_to_sequence(tp0, uniform_behavioral(tp0));
  SequencePolicy y = behavioral_to_sequence(tp1, uniform_behavioral(tp1));
  SequencePolicy xbar = x, ybar = y;
  SeqPayoff tilde{Vector::Zero(tp0.num_sequences), Vector::Zero(tp1.num_sequences)};
  const double opt = optimistic ? 1.0 : 0.0;

  EfgSolveResult res;
  res.x = x;
  res.y = y;
  res.gap = exploitability(gt, x, y);
  for (int k = 1; k <= iters; ++k) {
    const SeqPayoff f = sequence_payoff(gt, x, y);
    tilde += f;
    x = sbr_treeplex(tp0, eta * (tilde.f0 + opt * f.f0), 1.0);
    y = sbr_treeplex(tp1, eta * (tilde.f1 + opt * f.f1), 1.0);
    const double w = 1.0 / static_cast<double>(k + 1);
    xbar += w * (x - xbar);
    ybar += w * (y - ybar);
    if (k % log_every == 0 || k == iters) {
      const double gap = exploitability(gt, x, y);
      const double gap_avg = exploitability(gt, xbar, ybar);
      res.trace.push_back({k, gap, gap_avg, expected_return(gt, x, y)});
      if (gap < res.gap) {
        res.gap = gap;
        res.x = x;
        res.y = y;
      }
      if (gap_avg < res.gap) {
        res.gap = gap_avg;
        res.x = xbar;
        res.y = ybar;
      }
      if (stop_below > 0.0 && res.gap < stop_below) break;
    }
  }
  return res;
}

namespace {

// Reduced pure strategies: decide one pending information state at a time;
// choosing an action queues the information states hanging below that edge.
// Unreachable states keep all-zero rows, which is the vertex form.
void enumerate_pending(const Treeplex& tp, std::vector<int> pending,
                       SequencePolicy& current,
                       std::vector<SequencePolicy>& out, long long budget) {
  if (pending.empty()) {
    out.push_back(current);
    if (budget > 0 && static_cast<long long>(out.size()) > budget)
      throw BudgetExceeded("too many pure policies",
                           static_cast<long long>(out.size()));
    return;
  }
  const int s = pending.back();
  pending.pop_back();
  const auto& is = tp.infosets[s];
  for (int a = 0; a < is.num_actions; ++a) {
    current[is.first_seq + a] = 1.0;
    std::vector<int> next = pending;
    for (int sc : tp.seq_children[is.first_seq + a]) next.push_back(sc);
    enumerate_pending(tp, std::move(next), current, out, budget);
    current[is.first_seq + a] = 0.0;
  }
}

}  // namespace

std::vector<SequencePolicy> enumerate_pure_policies(const Treeplex& tp,
                                                    long long budget) {
  std::vector<SequencePolicy> out;
  SequencePolicy current = SequencePolicy::Zero(tp.num_sequences);
  enumerate_pending(tp, tp.root_infosets, current, out, budget);
  return out;
}

}  // namespace eqlab::efg
