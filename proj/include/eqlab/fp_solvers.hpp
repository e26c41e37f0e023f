#pragma once

#include <string>
#include <vector>

#include "eqlab/matrix_game.hpp"

namespace eqlab {

// Negative entropy psi(x) = sum_i x_i log x_i. Mirror map grad psi(x)_i =
// 1 + log x_i; its inverse restricted to the simplex is softmax of the
// negated input, so every smooth best response below is a softmax.
struct EntropyRegularizer {
  static double value(const Vector& p);
  // argmin_z  eta <f, z> + psi(z)  over the simplex, blockwise.
  static Vector smooth_argmin(const Vector& scaled_loss);
};

// Smooth best response: each block is softmax(-eta * F_block). Unique and
// strictly interior for any eta > 0.
JointPolicy sbr(const PayoffVector& f, double eta);

// State shared by the fictitious-play style steppers.
//   k        iterates produced so far (z is the k-th),
//   z        current iterate z_k,
//   z_bar    running average of z_1..z_k,
//   f_tilde  sum of payoff vectors of the iterates already accumulated,
//            i.e. F(z_1) + ... + F(z_{k-1}); each step folds in F(z_k)
//            before computing z_{k+1},
//   f_prev   payoff vector of the last accumulated iterate (zero initially).
struct SolverState {
  int k = 1;
  JointPolicy z;
  JointPolicy z_bar;
  PayoffVector f_tilde;
  PayoffVector f_prev;
  double eta = 0.1;
};

SolverState make_solver_state(const MatrixGame& game, double eta);
SolverState make_solver_state(const MatrixGame& game, JointPolicy z1, double eta);

// z_{k+1} = SBR(eta * F_tilde_k): follow-the-regularized-leader. The average
// sequence converges to equilibrium; the actual sequence may cycle.
SolverState sfp_step(SolverState state, const MatrixGame& game);

// z_{k+1} = SBR(eta * (F_tilde_k + F_k)): the current payoff vector counts
// twice, acting as a prediction of the opponent's next policy. The actual
// sequence converges (last-iterate).
SolverState osfp_step(SolverState state, const MatrixGame& game);

// Two-sequence mirror-descent state. z is the primary sequence, z_hat the
// auxiliary one. Initialization places z_hat at the mirror-map minimum
// (uniform) and treats F_0 = 0, so z_1 = z_hat_1 = uniform.
struct OmdState {
  int k = 1;
  JointPolicy z;
  JointPolicy z_hat;
  double eta = 0.1;
};

OmdState make_omd_state(const MatrixGame& game, double eta);

// With F_k = F(z_k):
//   z_hat_{k+1} = argmin eta <F_k, z> + D_psi(z, z_hat_k)
//   z_{k+1}     = argmin eta <F_k, z> + D_psi(z, z_hat_{k+1})
// Under negative entropy both are multiplicative-weights updates. The
// primary sequence coincides with the optimistic fictitious-play iterates.
OmdState omd_step(OmdState state, const MatrixGame& game);

enum class Method { kSfp, kOsfp, kOmd };

Method parse_method(const std::string& name);

struct IterationRecord {
  int k;
  double gap_actual;
  double gap_average;
};

// Runs `iters` steps of the chosen method and records the duality gap of the
// actual and average sequences after each step. Deterministic.
std::vector<IterationRecord> solve(const MatrixGame& game, Method method,
                                   double eta, int iters,
                                   const JointPolicy* z1 = nullptr);

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);

}  // namespace eqlab
