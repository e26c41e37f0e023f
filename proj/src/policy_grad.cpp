#include "eqlab/policy_grad.hpp"

#include <cmath>
#include <map>

#include "eqlab/simplex.hpp"

namespace eqlab::pg {

OpponentMixture make_opponent_mixture(std::vector<efg::SequencePolicy> opponents,
                                      double eta) {
  EQLAB_CHECK(!opponents.empty(), "opponent mixture must not be empty");
  EQLAB_CHECK(eta > 0.0, "opponent mixture: eta must be positive");
  OpponentMixture mix;
  mix.opponents = std::move(opponents);
  mix.eta = eta;
  const int k = mix.size();
  Vector alpha = Vector::Ones(k);
  alpha[k - 1] = 2.0;
  mix.mu = eta * alpha.sum();
  mix.alpha_tilde = eta * alpha / mix.mu;
  return mix;
}

int sample_opponent(const OpponentMixture& mix, Rng& rng) {
  EQLAB_CHECK(mix.size() >= 1, "sample_opponent: empty mixture");
  return sample_index(mix.alpha_tilde, rng);
}

Vector policy_gradient(const efg::GameTree& gt, const efg::SequencePolicy& own,
                       const efg::SequencePolicy& opp, int player) {
  const efg::SequencePolicy& x = player == 0 ? own : opp;
  const efg::SequencePolicy& y = player == 0 ? opp : own;
  const efg::CfValues cf = efg::counterfactual_q(gt, x, y, player);
  const efg::Treeplex& tp = gt.plex(player);
  Vector grad = Vector::Zero(tp.num_sequences);
  for (int s = 0; s < tp.num_infosets(); ++s) {
    if (!cf.is_reached(s)) continue;
    const auto& is = tp.infosets[s];
    for (int a = 0; a < is.num_actions; ++a)
      grad[is.first_seq + a] = cf.rho_s[s] * cf.q[is.first_seq + a];
  }
  return grad;
}

Vector dilated_entropy_pi_gradient(const efg::Treeplex& tp,
                                   const efg::SequencePolicy& x) {
  const efg::BehavioralPolicy pi = efg::sequence_to_behavioral(tp, x);
  // Bottom-up: expected downstream negentropy per unit of own reach.
  std::vector<double> below(tp.num_sequences, 0.0);
  std::vector<double> state_psi(tp.num_infosets(), 0.0);
  for (int s = tp.num_infosets() - 1; s >= 0; --s) {
    const auto& is = tp.infosets[s];
    double e = negentropy(pi.pi[s]);
    for (int a = 0; a < is.num_actions; ++a) {
      double g = 0.0;
      for (int sc : tp.seq_children[is.first_seq + a]) g += state_psi[sc];
      below[is.first_seq + a] = g;
      e += pi.pi[s][a] * g;
    }
    state_psi[s] = e;
  }
  Vector grad(tp.num_sequences);
  for (int s = 0; s < tp.num_infosets(); ++s) {
    const auto& is = tp.infosets[s];
    double own_reach = is.parent_seq < 0 ? 1.0 : x[is.parent_seq];
    for (int a = 0; a < is.num_actions; ++a) {
      const double p = std::max(pi.pi[s][a], 1e-300);
      grad[is.first_seq + a] =
          own_reach * (std::log(p) + 1.0 + below[is.first_seq + a]);
    }
  }
  return grad;
}

double sbr_objective(const efg::GameTree& gt, const efg::SequencePolicy& x,
                     const OpponentMixture& mix) {
  double obj = 0.0;
  for (int i = 0; i < mix.size(); ++i)
    obj += mix.alpha_tilde[i] * -efg::expected_return(gt, x, mix.opponents[i]);
  obj += efg::dilated_entropy(gt.plex(0), x) / mix.mu;
  return obj;
}

Vector sbr_pi_gradient(const efg::GameTree& gt, const efg::SequencePolicy& x,
                       const OpponentMixture& mix, int only_opponent) {
  const efg::Treeplex& tp = gt.plex(0);
  Vector grad = Vector::Zero(tp.num_sequences);
  if (only_opponent >= 0) {
    grad = -policy_gradient(gt, x, mix.opponents[only_opponent], 0);
  } else {
    for (int i = 0; i < mix.size(); ++i)
      grad -= mix.alpha_tilde[i] * policy_gradient(gt, x, mix.opponents[i], 0);
  }
  grad += dilated_entropy_pi_gradient(tp, x) / mix.mu;
  // This is the descent direction of <F, x> + psi/mu in pi coordinates;
  // callers ascend on -grad.
  return grad;
}

namespace {

// d softmax loss: converts a gradient in pi coordinates into logit space at
// one information state and applies the ascent step.
void apply_logit_step(Vector& logits, const std::vector<int>& labels,
                      const Vector& pi, const Vector& dpi, double lr) {
  double inner = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) inner += pi[i] * dpi[i];
  for (size_t i = 0; i < labels.size(); ++i)
    logits[labels[i]] += lr * pi[i] * (dpi[i] - inner);
}

}  // namespace

void reinforce_update(TabularPolicy& policy, std::span<const Episode> batch,
                      const ReinforceParams& params,
                      const Stage* train_only_stage) {
  if (batch.empty()) return;
  double baseline = 0.0;
  if (params.baseline) {
    for (const auto& ep : batch) baseline += ep.ret;
    baseline /= static_cast<double>(batch.size());
  }
  for (const auto& ep : batch) {
    const int n = static_cast<int>(ep.steps.size());
    for (int t = 0; t < n; ++t) {
      const StepRecord& st = ep.steps[t];
      const Stage stage = TabularPolicy::stage_of_key(st.key);
      if (train_only_stage && stage != *train_only_stage) continue;
      int size = 0;
      for (int l : st.labels) size = std::max(size, l + 1);
      const Vector pi = policy.act_on_labels(st.key, st.labels, 1.0);
      Vector& logits = policy.logits(stage, st.key, size);

      const double g = std::pow(params.discount, n - 1 - t) * ep.ret - baseline;
      double ratio = 1.0;
      if (st.behavior_prob > 0.0)
        ratio = std::min(pi[st.action_index] / st.behavior_prob, params.is_clip);
      // Score-function step plus a per-state entropy bonus.
      for (size_t i = 0; i < st.labels.size(); ++i) {
        const double indicator = static_cast<int>(i) == st.action_index ? 1.0 : 0.0;
        double d = ratio * g * (indicator - pi[i]);
        if (params.entropy_weight > 0.0) {
          const double h = -negentropy(pi);
          d -= params.entropy_weight * pi[i] *
               (std::log(std::max(pi[i], 1e-300)) + h);
        }
        logits[st.labels[i]] += params.lr * d;
      }
    }
  }
}

efg::SequencePolicy solve_sbr_pg(const efg::GameTree& gt, const OpponentMixture& mix,
                                 const SbrPgParams& params, Rng& rng,
                                 TabularPolicy* policy_out) {
  EQLAB_CHECK(params.steps >= 1, "solve_sbr_pg: steps must be >= 1");
  EQLAB_CHECK(params.lr > 0.0, "solve_sbr_pg: lr must be positive");
  const efg::Treeplex& tp = gt.plex(0);
  TabularPolicy policy;

  if (params.exact_gradient) {
    for (int step = 0; step < params.steps; ++step) {
      const efg::SequencePolicy x = policy_sequence(gt, 0, policy, 1.0);
      const int pick =
          params.sample_opponents ? sample_opponent(mix, rng) : -1;
      const Vector descent = sbr_pi_gradient(gt, x, mix, pick);
      for (const auto& is : tp.infosets) {
        const Vector pi = policy.act_on_labels(is.key, is.action_labels, 1.0);
        Vector dpi(is.num_actions);
        for (int a = 0; a < is.num_actions; ++a)
          dpi[a] = -descent[is.first_seq + a];
        int size = 0;
        for (int l : is.action_labels) size = std::max(size, l + 1);
        apply_logit_step(
            policy.logits(TabularPolicy::stage_of_key(is.key), is.key, size),
            is.action_labels, pi, dpi, params.lr);
      }
    }
  } else {
    const ReinforceParams rp{params.lr, 1.0 / mix.mu, params.discount, true, 1.0};
    for (int step = 0; step < params.steps; ++step) {
      std::vector<Episode> batch;
      batch.reserve(params.episodes_per_step);
      for (int e = 0; e < params.episodes_per_step; ++e) {
        const int opp = sample_opponent(mix, rng);
        const efg::BehavioralPolicy opp_pi =
            efg::sequence_to_behavioral(gt.plex(1), mix.opponents[opp]);
        Episode ep;
        int node = 0;
        while (!gt.node(node).is_leaf()) {
          const auto& n = gt.node(node);
          if (n.is_chance()) {
            Vector probs(n.chance_probs.size());
            for (size_t c = 0; c < n.chance_probs.size(); ++c)
              probs[c] = n.chance_probs[c];
            node = n.children[sample_index(probs, rng)];
          } else if (n.player == 1) {
            node = n.children[sample_index(opp_pi.pi[n.infoset], rng)];
          } else {
            const auto& is = tp.infosets[n.infoset];
            const Vector b =
                policy.act_on_labels(is.key, is.action_labels, params.behavior_tau);
            const int a = sample_index(b, rng);
            ep.steps.push_back({is.key, is.action_labels, a, b[a]});
            node = n.children[a];
          }
        }
        ep.ret = gt.node(node).payoff;
        batch.push_back(std::move(ep));
      }
      reinforce_update(policy, batch, rp);
    }
  }

  if (policy_out) *policy_out = policy;
  return policy_sequence(gt, 0, policy, 1.0);
}

}  // namespace eqlab::pg
