#include "sgsolve/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgsolve {

namespace {

constexpr double kTol = 1e-9;

// Dense tableau kept in canonical form (basis columns are unit vectors).
struct Tableau {
  int m = 0, n = 0;
  std::vector<std::vector<double>> a;  // m x n
  std::vector<double> b;               // m, kept nonnegative
  std::vector<int> basis;              // basis column per row
  std::vector<bool> allowed;           // columns the pivot may enter

  void pivot(int row, int col) {
    const double piv = a[row][col];
    for (int j = 0; j < n; ++j) a[row][j] /= piv;
    b[row] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = a[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) a[i][j] -= f * a[row][j];
      b[i] -= f * b[row];
      if (b[i] < 0.0 && b[i] > -kTol) b[i] = 0.0;
    }
    basis[row] = col;
  }

  // Maximizes c over the current basis; returns false when unbounded.
  bool run(const std::vector<double>& c) {
    while (true) {
      // Reduced costs r_j = c_j - c_B . a_j; Bland: smallest improving index.
      std::vector<double> cb(m);
      for (int i = 0; i < m; ++i) cb[i] = c[basis[i]];
      int enter = -1;
      for (int j = 0; j < n && enter < 0; ++j) {
        if (!allowed[j]) continue;
        double r = c[j];
        for (int i = 0; i < m; ++i)
          if (cb[i] != 0.0) r -= cb[i] * a[i][j];
        if (r > kTol) enter = j;
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (a[i][enter] > kTol) {
          const double ratio = b[i] / a[i][enter];
          if (ratio < best - kTol ||
              (ratio < best + kTol && (leave < 0 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const int nv = lp.num_vars;
  std::vector<bool> is_free(nv, false);
  if (!lp.free_var.empty()) {
    if (static_cast<int>(lp.free_var.size()) != nv)
      throw std::invalid_argument("solve_lp: free_var size mismatch");
    for (int j = 0; j < nv; ++j) is_free[j] = lp.free_var[j];
  }
  // Column layout: split structural vars (x = u - v for free ones), then one
  // slack per inequality row, then one artificial per row.
  std::vector<int> pos_col(nv), neg_col(nv, -1);
  int ncols = 0;
  for (int j = 0; j < nv; ++j) {
    pos_col[j] = ncols++;
    if (is_free[j]) neg_col[j] = ncols++;
  }
  const int m = static_cast<int>(lp.rows.size());
  const int slack_base = ncols;
  int nslack = 0;
  for (const auto& row : lp.rows)
    if (row.rel != LinearProgram::EQ) ++nslack;
  ncols += nslack;
  const int art_base = ncols;
  ncols += m;

  Tableau t;
  t.m = m;
  t.n = ncols;
  t.a.assign(m, std::vector<double>(ncols, 0.0));
  t.b.assign(m, 0.0);
  t.basis.assign(m, 0);
  t.allowed.assign(ncols, true);

  int slack_idx = 0;
  for (int i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    if (static_cast<int>(row.a.size()) != nv)
      throw std::invalid_argument("solve_lp: row length mismatch");
    double sign = 1.0;
    double b = row.b;
    double slack = 0.0;
    if (row.rel == LinearProgram::LE) slack = 1.0;
    if (row.rel == LinearProgram::GE) slack = -1.0;
    if (b < 0.0) {  // keep rhs nonnegative
      sign = -1.0;
      b = -b;
      slack = -slack;
    }
    for (int j = 0; j < nv; ++j) {
      const double v = sign * row.a[j];
      t.a[i][pos_col[j]] = v;
      if (neg_col[j] >= 0) t.a[i][neg_col[j]] = -v;
    }
    if (row.rel != LinearProgram::EQ) t.a[i][slack_base + slack_idx++] = slack;
    t.a[i][art_base + i] = 1.0;
    t.b[i] = b;
    t.basis[i] = art_base + i;
  }

  // Phase 1: drive the artificial variables to zero.
  std::vector<double> phase1(ncols, 0.0);
  for (int i = 0; i < m; ++i) phase1[art_base + i] = -1.0;
  if (!t.run(phase1)) return {LpResult::UNBOUNDED, 0.0, {}};
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (t.basis[i] >= art_base) infeas += t.b[i];
  if (infeas > 1e-7) return {LpResult::INFEASIBLE, 0.0, {}};
  // Pivot lingering artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (t.basis[i] < art_base) continue;
    int col = -1;
    for (int j = 0; j < art_base && col < 0; ++j)
      if (std::fabs(t.a[i][j]) > kTol) col = j;
    if (col >= 0) t.pivot(i, col);
  }
  for (int j = art_base; j < ncols; ++j) t.allowed[j] = false;

  // Phase 2: original objective.
  std::vector<double> c(ncols, 0.0);
  for (int j = 0; j < nv; ++j) {
    c[pos_col[j]] = lp.objective[j];
    if (neg_col[j] >= 0) c[neg_col[j]] = -lp.objective[j];
  }
  if (!t.run(c)) return {LpResult::UNBOUNDED, 0.0, {}};

  std::vector<double> full(ncols, 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < ncols) full[t.basis[i]] = t.b[i];
  LpResult res;
  res.status = LpResult::OPTIMAL;
  res.x.assign(nv, 0.0);
  for (int j = 0; j < nv; ++j) {
    res.x[j] = full[pos_col[j]];
    if (neg_col[j] >= 0) res.x[j] -= full[neg_col[j]];
    res.value += lp.objective[j] * res.x[j];
  }
  return res;
}

MatrixGameSolution solve_matrix_game(
    const std::vector<std::vector<double>>& m) {
  const int nr = static_cast<int>(m.size());
  const int nc = static_cast<int>(m[0].size());
  MatrixGameSolution sol;

  // Row player: maximize v subject to p.M[:,c] >= v for every column c.
  {
    LinearProgram lp;
    lp.num_vars = nr + 1;
    lp.objective.assign(nr + 1, 0.0);
    lp.objective[nr] = 1.0;
    lp.free_var.assign(nr + 1, false);
    lp.free_var[nr] = true;
    for (int c = 0; c < nc; ++c) {
      std::vector<double> row(nr + 1, 0.0);
      for (int r = 0; r < nr; ++r) row[r] = m[r][c];
      row[nr] = -1.0;
      lp.add_row(row, LinearProgram::GE, 0.0);
    }
    std::vector<double> ones(nr + 1, 1.0);
    ones[nr] = 0.0;
    lp.add_row(ones, LinearProgram::EQ, 1.0);
    const LpResult r = solve_lp(lp);
    if (r.status != LpResult::OPTIMAL)
      throw std::runtime_error("matrix game row LP failed");
    sol.value = r.value;
    sol.row_strategy.assign(r.x.begin(), r.x.begin() + nr);
  }

  // Column player: minimize w subject to M[r,:].q <= w for every row r.
  {
    LinearProgram lp;
    lp.num_vars = nc + 1;
    lp.objective.assign(nc + 1, 0.0);
    lp.objective[nc] = -1.0;
    lp.free_var.assign(nc + 1, false);
    lp.free_var[nc] = true;
    for (int r = 0; r < nr; ++r) {
      std::vector<double> row(nc + 1, 0.0);
      for (int c = 0; c < nc; ++c) row[c] = m[r][c];
      row[nc] = -1.0;
      lp.add_row(row, LinearProgram::LE, 0.0);
    }
    std::vector<double> ones(nc + 1, 1.0);
    ones[nc] = 0.0;
    lp.add_row(ones, LinearProgram::EQ, 1.0);
    const LpResult r = solve_lp(lp);
    if (r.status != LpResult::OPTIMAL)
      throw std::runtime_error("matrix game column LP failed");
    sol.col_strategy.assign(r.x.begin(), r.x.begin() + nc);
  }
  return sol;
}

}  // namespace sgsolve
