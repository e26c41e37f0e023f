#pragma once

#include <iosfwd>
#include <string>

#include "eqlab/common.hpp"

namespace eqlab {

// Two-player zero-sum game in normal form. Player 1 (rows) minimizes
// x' A y, player 2 (columns) maximizes it. Rectangular matrices are
// allowed; the square case is what the iterative solvers mostly see.
class MatrixGame {
 public:
  explicit MatrixGame(Matrix a);

  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }
  const Matrix& payoff_matrix() const { return a_; }

  // Plain-text format: first line "rows cols", then rows of decimals.
  static MatrixGame load(std::istream& in);
  static MatrixGame load_file(const std::string& path);
  void save(std::ostream& out) const;

  static MatrixGame rock_paper_scissors();
  static MatrixGame matching_pennies();
  static MatrixGame random(Index rows, Index cols, class Rng& rng);

 private:
  Matrix a_;
};

// z = (x, y), one mixed policy per player.
struct JointPolicy {
  Vector x;
  Vector y;
};

// F(z) = (A y, -A' x): the concatenation of the players' individual
// payoff gradients. Each player treats its own block as a loss vector.
struct PayoffVector {
  Vector fx;
  Vector fy;

  PayoffVector& operator+=(const PayoffVector& o) {
    fx += o.fx;
    fy += o.fy;
    return *this;
  }
};

JointPolicy uniform_joint(const MatrixGame& game);
void validate_joint(const MatrixGame& game, const JointPolicy& z);

// x' A y.
double payoff(const MatrixGame& game, const JointPolicy& z);

// (A y, -A' x). <fx, x> = -<fy, y> = payoff(z).
PayoffVector payoff_vector(const MatrixGame& game, const JointPolicy& z);

// Vertex minimizing each block of F; ties break toward the lowest index.
JointPolicy best_response(const PayoffVector& f);

// max_y' u(x, y') - min_x' u(x', y); nonnegative, zero exactly at a
// Nash equilibrium. Both optima are attained at vertices.
double duality_gap(const MatrixGame& game, const JointPolicy& z);

bool ne_check(const MatrixGame& game, const JointPolicy& z, double tol = 1e-9);

}  // namespace eqlab
