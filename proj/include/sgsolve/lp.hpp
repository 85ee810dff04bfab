#pragma once

#include <vector>

namespace sgsolve {

// Small dense linear programs solved by a two-phase primal simplex with
// Bland's pivoting rule (deterministic, cycle-free).  Variables are
// nonnegative unless marked free; free variables are split internally.
struct LinearProgram {
  enum Rel { LE, GE, EQ };
  struct Row {
    std::vector<double> a;
    Rel rel;
    double b;
  };

  int num_vars = 0;
  std::vector<double> objective;  // maximized
  std::vector<Row> rows;
  std::vector<bool> free_var;     // empty means all nonnegative

  void add_row(const std::vector<double>& a, Rel rel, double b) {
    rows.push_back({a, rel, b});
  }
};

struct LpResult {
  enum Status { OPTIMAL, INFEASIBLE, UNBOUNDED };
  Status status = INFEASIBLE;
  double value = 0.0;
  std::vector<double> x;
};

LpResult solve_lp(const LinearProgram& lp);

// Value and optimal mixed strategies of the zero-sum matrix game where the
// row player maximizes m[r][c].  Solved by two LPs.
struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> row_strategy;
  std::vector<double> col_strategy;
};

MatrixGameSolution solve_matrix_game(const std::vector<std::vector<double>>& m);

}  // namespace sgsolve
