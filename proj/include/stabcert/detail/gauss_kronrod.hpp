#pragma once

// Adaptive Gauss-Kronrod core shared by the scalar, nested and vector-valued
// integrators. Not part of the public surface.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace stabcert::detail {

// G7/K15 abscissae and weights (QUADPACK qk15).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// Value returned by a (possibly nested) integrand: the point value, the error
/// of any inner integration that produced it, and the work spent.
template <class V>
struct Sample {
  V value;
  double error = 0.0;
  std::size_t evals = 1;
};

inline double norm_of(double v) { return std::fabs(v); }
inline double norm_of(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

template <class V>
struct GkResult {
  V value;
  double error = 0.0;
  std::size_t evals = 0;
  bool converged = true;
};

struct GkOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::size_t max_evals = 1'000'000;
  double min_width = 0.0;
};

template <class V>
struct GkCell {
  double a = 0.0;
  double b = 0.0;
  V value;
  double error = 0.0;
  bool final = false;
};

template <class V, class F>
GkCell<V> gk15_cell(F& f, double a, double b, const V& zero, std::size_t& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  V fv[15];
  double inner_err = 0.0;
  auto eval = [&](int k, double x, double w) {
    Sample<V> s = f(x);
    evals += s.evals;
    inner_err += w * s.error;
    fv[k] = std::move(s.value);
  };
  eval(7, c, kWgk[7]);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    eval(j, c - dx, kWgk[j]);
    eval(14 - j, c + dx, kWgk[j]);
  }
  V kron = zero;
  V gauss = zero;
  kron = kron + kWgk[7] * fv[7];
  gauss = gauss + kWg[3] * fv[7];
  for (int j = 0; j < 7; ++j) {
    kron = kron + kWgk[j] * (fv[j] + fv[14 - j]);
    if (j % 2 == 1) gauss = gauss + kWg[j / 2] * (fv[j] + fv[14 - j]);
  }
  const V mean = 0.5 * kron;
  double resabs = 0.0;
  double resasc = 0.0;
  for (int k = 0; k < 15; ++k) {
    const double w = kWgk[k < 8 ? k : 14 - k];
    resabs += w * norm_of(fv[k]);
    resasc += w * norm_of(V(fv[k] - mean));
  }
  resabs *= std::fabs(h);
  resasc *= std::fabs(h);
  double err = norm_of(V((kron - gauss) * h));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  err += std::fabs(h) * inner_err;
  return GkCell<V>{a, b, V(kron * h), err, false};
}

/// Globally adaptive bisection driven by a max-heap on cell error. `cuts` are
/// the sorted initial cell boundaries (at least two). The final value is summed
/// in left-to-right cell order so results are bit-reproducible.
template <class V, class F>
GkResult<V> adaptive_gk(F&& f, std::span<const double> cuts, const V& zero, const GkOptions& opt) {
  std::vector<GkCell<V>> cells;
  std::size_t evals = 0;
  cells.reserve(64);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) cells.push_back(gk15_cell<V>(f, cuts[i], cuts[i + 1], zero, evals));
  }
  auto cmp = [&](std::size_t x, std::size_t y) { return cells[x].error < cells[y].error; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
  for (std::size_t i = 0; i < cells.size(); ++i) heap.push(i);

  auto totals = [&](V& val, double& err) {
    val = zero;
    err = 0.0;
    for (const auto& c : cells) {
      val = val + c.value;
      err += c.error;
    }
  };
  V total = zero;
  double total_err = 0.0;
  totals(total, total_err);
  bool converged = true;
  std::size_t since_resum = 0;
  double final_err = 0.0;
  while (!heap.empty()) {
    const double target = std::max(opt.abs_tol, opt.rel_tol * norm_of(total));
    if (total_err <= target) break;
    if (final_err > target && total_err - final_err <= 0.1 * target) {
      converged = false;
      break;
    }
    if (evals >= opt.max_evals) {
      converged = false;
      break;
    }
    const std::size_t idx = heap.top();
    heap.pop();
    GkCell<V>& cell = cells[idx];
    const double mid = 0.5 * (cell.a + cell.b);
    const double width = cell.b - cell.a;
    if (width <= opt.min_width || mid <= cell.a || mid >= cell.b ||
        width <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(cell.a), std::fabs(cell.b))) {
      cell.final = true;
      final_err += cell.error;
      continue;
    }
    GkCell<V> left = gk15_cell<V>(f, cell.a, mid, zero, evals);
    GkCell<V> right = gk15_cell<V>(f, mid, cell.b, zero, evals);
    total = total - cell.value + left.value + right.value;
    total_err += left.error + right.error - cell.error;
    cells[idx] = std::move(left);
    cells.push_back(std::move(right));
    heap.push(idx);
    heap.push(cells.size() - 1);
    if (++since_resum == 256) {
      totals(total, total_err);
      since_resum = 0;
    }
  }
  // heap exhausted with error still above target: every remaining cell hit the width floor
  totals(total, total_err);
  if (heap.empty() && total_err > std::max(opt.abs_tol, opt.rel_tol * norm_of(total))) converged = false;

  std::sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  V value = zero;
  double err = 0.0;
  for (const auto& c : cells) {
    value = value + c.value;
    err += c.error;
  }
  return GkResult<V>{value, err, evals, converged};
}

/// Sorted, deduplicated cut list for [a, b] including interior breakpoints.
inline std::vector<double> make_cuts(double a, double b, std::span<const double> breaks) {
  std::vector<double> cuts{a, b};
  for (double x : breaks) {
    if (x > a && x < b) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace stabcert::detail
