#include "cclab/quadrature.hpp"

#include <array>
#include <queue>
#include <vector>

namespace cclab {

namespace {

// Kronrod 15-point abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed abscissae.
constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  Complex value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment kronrod(const std::function<Complex(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const Complex fc = f(c);
  Complex k = kWk[7] * fc;
  Complex g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const Complex f1 = f(c - h * kXk[j]);
    const Complex f2 = f(c + h * kXk[j]);
    k += kWk[j] * (f1 + f2);
    if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace

QuadratureResult adaptive_gauss_kronrod(const std::function<Complex(double)>& f, double a,
                                        double b, double abs_tol, double rel_tol,
                                        int max_intervals) {
  std::priority_queue<Segment> heap;
  Segment first = kronrod(f, a, b);
  Complex total = first.value;
  double err = first.error;
  heap.push(first);
  int evals = 15;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) &&
         static_cast<int>(heap.size()) < max_intervals) {
    Segment s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    Segment l = kronrod(f, s.a, m);
    Segment r = kronrod(f, m, s.b);
    evals += 30;
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  // Re-sum to shed the rounding accumulated by the running updates.
  Complex sum = 0.0;
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  return {sum, esum, evals, esum <= std::max(abs_tol, rel_tol * std::abs(sum))};
}

}  // namespace cclab
