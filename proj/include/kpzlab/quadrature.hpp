// Adaptive Gauss-Kronrod quadrature and a peak-centered integrator for
// densities given by their log.  The latter is the workhorse behind the
// normalizers and log-moment integrals: it locates a representative maximum
// of the log-integrand, expands the window until the tails are negligible,
// and integrates exp(log_h - ref) * w with worst-segment-first refinement.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "kpzlab/errors.hpp"

namespace kpzlab {

namespace detail {

// 15-point Kronrod nodes/weights extending 7-point Gauss (positive half).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F& f, double a, double b, double* result, double* err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double res_g = fc * kWg[3];
  double res_k = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    res_k += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) res_g += kWg[j / 2] * (f1 + f2);
  }
  *result = res_k * h;
  *err = std::fabs((res_k - res_g) * h);
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive GK15 on [a,b], worst-segment-first.  Throws QuadratureFailure if
// the requested tolerance cannot be reached.
template <class F>
QuadResult integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                     double abs_tol = 0.0, int max_segments = 6000) {
  std::priority_queue<detail::Segment> heap;
  detail::Segment s0{a, b, 0.0, 0.0};
  detail::gk15(f, a, b, &s0.value, &s0.error);
  heap.push(s0);
  double total = s0.value, total_err = s0.error;
  int n = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::fabs(total)) && n < max_segments) {
    detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      heap.push(worst);  // interval at machine resolution; accept what we have
      break;
    }
    detail::Segment l{worst.a, mid, 0.0, 0.0}, r{mid, worst.b, 0.0, 0.0};
    detail::gk15(f, l.a, l.b, &l.value, &l.error);
    detail::gk15(f, r.a, r.b, &r.value, &r.error);
    total += l.value + r.value - worst.value;
    total_err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  if (total_err > 100.0 * std::max(abs_tol, rel_tol * std::fabs(total)) + 1e-290) {
    throw QuadratureFailure("adaptive quadrature: tolerance not reached");
  }
  return {total, total_err};
}

// Window and reference level for a log-integrand over (lo, hi); either side
// may be infinite.  The reference is a representative maximum: near an
// integrable endpoint singularity we do not chase the (infinite) sup, only
// scale so the smooth part is O(1).
struct LogWindow {
  double lo = 0.0;
  double hi = 0.0;
  double ref = 0.0;
};

template <class LogH>
LogWindow find_log_window(const LogH& log_h, double lo, double hi) {
  const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);

  std::vector<double> candidates;
  {
    const double glo = lo_inf ? -60.0 : lo;
    const double ghi = hi_inf ? 60.0 : hi;
    const int kScan = 128;
    for (int i = 1; i < kScan; ++i) {
      candidates.push_back(glo + (ghi - glo) * static_cast<double>(i) / kScan);
    }
    // Geometric offsets toward finite endpoints catch singular mass.
    const double span = ghi - glo;
    for (int k = 1; k <= 8; ++k) {
      const double off = span * std::pow(10.0, -k);
      if (!lo_inf) candidates.push_back(lo + off);
      if (!hi_inf) candidates.push_back(hi - off);
    }
  }
  double best = candidates.front();
  double fbest = -std::numeric_limits<double>::infinity();
  for (double y : candidates) {
    const double fy = log_h(y);
    if (std::isfinite(fy) && fy > fbest) {
      fbest = fy;
      best = y;
    }
  }
  if (!std::isfinite(fbest)) throw QuadratureFailure("log integrand nowhere finite on scan");

  // Uphill walk with doubling steps (for peaks outside the scan range, e.g.
  // slowly decaying tilts), guarded away from finite endpoints.
  const double guard = 1e-7;
  auto clamp = [&](double y) {
    double r = y;
    if (!lo_inf) r = std::max(r, lo + guard * (1.0 + std::fabs(lo)));
    if (!hi_inf) r = std::min(r, hi - guard * (1.0 + std::fabs(hi)));
    return r;
  };
  for (double dir : {+1.0, -1.0}) {
    double step = 0.5;
    double y = best;
    for (int i = 0; i < 200; ++i) {
      const double yn = clamp(y + dir * step);
      if (yn == y) break;
      const double fn = log_h(yn);
      if (std::isfinite(fn) && fn > fbest) {
        fbest = fn;
        best = yn;
        y = yn;
        step *= 2.0;
      } else {
        break;
      }
    }
  }
  // Local golden-section polish.
  {
    double a = clamp(best - 1.0), b = clamp(best + 1.0);
    const double gr = 0.6180339887498949;
    for (int i = 0; i < 60 && (b - a) > 1e-9; ++i) {
      const double c = b - gr * (b - a);
      const double d = a + gr * (b - a);
      if (log_h(c) > log_h(d)) b = d; else a = c;
    }
    const double mid = clamp(0.5 * (a + b));
    const double fm = log_h(mid);
    if (std::isfinite(fm) && fm > fbest) {
      fbest = fm;
      best = mid;
    }
  }

  // Expand outward until the integrand has dropped by e^-90 (polynomial
  // weights cannot undo that) or a support endpoint is reached.
  const double drop = 90.0;
  auto expand = [&](double dir) {
    double step = 0.5;
    double y = best;
    for (int i = 0; i < 500; ++i) {
      const double yn = y + dir * step;
      if (dir < 0 && !lo_inf && yn <= lo) return lo;
      if (dir > 0 && !hi_inf && yn >= hi) return hi;
      const double fy = log_h(yn);
      if (std::isfinite(fy) && fy > fbest - drop) {
        y = yn;
        step *= 2.0;
      } else if (step > 1e-7 * (1.0 + std::fabs(y))) {
        step *= 0.5;
      } else {
        return yn;
      }
    }
    throw QuadratureFailure("window expansion failed");
  };
  LogWindow w;
  w.lo = expand(-1.0);
  w.hi = expand(+1.0);
  w.ref = fbest;
  return w;
}

// Integral over the window of exp(log_h(y) - window.ref) * weight(y).
template <class LogH, class W>
double integrate_log_scaled(const LogH& log_h, const W& weight, const LogWindow& win,
                            double rel_tol = 1e-12, double abs_tol = 1e-280) {
  auto f = [&](double y) {
    const double lh = log_h(y);
    if (!std::isfinite(lh)) return 0.0;
    const double e = lh - win.ref;
    if (e < -745.0) return 0.0;
    return std::exp(e) * weight(y);
  };
  return integrate(f, win.lo, win.hi, rel_tol, abs_tol).value;
}

}  // namespace kpzlab
