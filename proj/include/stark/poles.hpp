// Resonance poles: complex zeros of the pole denominator D(E), their
// continuation in the well separation R, and crossing classification.
//
// D is entire in E, so evaluating it below the real axis continues the
// resolvent onto the resonance sheet; poles there have Im E < 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <future>
#include <optional>
#include <string_view>
#include <thread>
#include <vector>

#include "model.hpp"
#include "starkfield.hpp"

namespace stark {

struct PoleRecord {
  double R = 0;
  cplx E;
  double residual = 0;  // |D(E)| of the normalised denominator
  int iterations = 0;
};

enum class PoleStatus { Converged, NoConvergence, OutOfStrip };

inline std::string_view to_string(PoleStatus s) {
  switch (s) {
    case PoleStatus::Converged: return "converged";
    case PoleStatus::NoConvergence: return "no-convergence";
    case PoleStatus::OutOfStrip: return "out-of-strip";
  }
  return "unknown";
}

struct PoleResult {
  PoleRecord record;  // the root, or the best iterate on failure
  PoleStatus status = PoleStatus::NoConvergence;
  [[nodiscard]] bool ok() const { return status == PoleStatus::Converged; }
};

struct PoleSearchOptions {
  double step_tol = 1e-12;      // |Delta E| at convergence
  double residual_tol = 1e-10;  // |D| at convergence
  int max_iterations = 100;
  double re_min = -10, re_max = 10;
  double im_min = -5, im_max = 0;
  double im_slack = 1e-12;  // accepted roots satisfy Im E <= im_max + im_slack
};

namespace poles_detail {

inline bool in_strip(cplx E, const PoleSearchOptions& o, double pad) {
  return E.real() >= o.re_min - pad && E.real() <= o.re_max + pad && E.imag() >= o.im_min - pad &&
         E.imag() <= o.im_max + pad;
}

// Muller iteration for f from the seed triple (x0, x1, x2).
inline PoleResult muller(const std::function<cplx(cplx)>& f, cplx x0, cplx x1, cplx x2, const PoleSearchOptions& o) {
  cplx f0 = f(x0), f1 = f(x1), f2 = f(x2);
  PoleResult best;
  best.record.E = x2;
  best.record.residual = std::abs(f2);
  // Iterates may wander a little while converging; only a real escape aborts.
  const double pad = 1.0;
  for (int it = 1; it <= o.max_iterations; ++it) {
    const cplx h1 = x1 - x0, h2 = x2 - x1;
    if (h1 == cplx(0) || h2 == cplx(0) || h1 + h2 == cplx(0)) break;
    const cplx d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
    const cplx a = (d2 - d1) / (h2 + h1);
    const cplx b = a * h2 + d2;
    const cplx disc = std::sqrt(b * b - 4.0 * a * f2);
    const cplx den = std::abs(b + disc) >= std::abs(b - disc) ? b + disc : b - disc;
    cplx dx;
    if (den == cplx(0)) {
      dx = 1e-3 * (1.0 + std::abs(x2));  // degenerate parabola: nudge
    } else {
      dx = -2.0 * f2 / den;
    }
    const cplx x3 = x2 + dx;
    const cplx f3 = f(x3);
    if (!std::isfinite(std::abs(f3))) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x3;
    f2 = f3;
    if (std::abs(f3) < best.record.residual) {
      best.record.E = x3;
      best.record.residual = std::abs(f3);
    }
    best.record.iterations = it;
    if (!in_strip(x3, o, pad)) {
      best.record.E = x3;
      best.record.residual = std::abs(f3);
      best.status = PoleStatus::OutOfStrip;
      return best;
    }
    const bool small_step = std::abs(dx) < o.step_tol * std::max(1.0, std::abs(x3));
    if (small_step && std::abs(f3) < o.residual_tol) {
      best.record.E = x3;
      best.record.residual = std::abs(f3);
      best.status = PoleStatus::Converged;
      break;
    }
  }
  if (best.status == PoleStatus::Converged && !in_strip(best.record.E, o, 0.0)) {
    // Accepted roots must lie in the strip; only the upper edge has slack.
    const cplx E = best.record.E;
    const bool above = E.imag() > o.im_max && E.imag() <= o.im_max + o.im_slack;
    if (!(above && in_strip(cplx(E.real(), o.im_max), o, 0.0))) best.status = PoleStatus::OutOfStrip;
  }
  return best;
}

}  // namespace poles_detail

// Zero of D near E_guess. Muller seeds: E_guess and E_guess +- delta + 1e-4 i
// with delta = 1e-4 max(|E_guess|, 1).
inline PoleResult find_pole(cplx E_guess, const ModelParams& p, const PoleSearchOptions& o = {}) {
  require_field(p);
  const double delta = 1e-4 * std::max(std::abs(E_guess), 1.0);
  const cplx up(0, 1e-4);
  auto D = [&p](cplx E) { return pole_denominator(E, p); };
  PoleResult r = poles_detail::muller(D, E_guess - delta + up, E_guess + delta + up, E_guess, o);
  r.record.R = p.R;
  return r;
}

// Rectangular search window for scan_poles.
struct ScanWindow {
  double re_min = -3, re_max = 1;
  double im_min = -0.2, im_max = 0;
  double re_step = 0.1;
  std::vector<double> im_seeds{-0.02, -0.1};
  double dedup_tol = 1e-6;
};

// All roots reached by Muller from a grid of seeds that land inside the
// window, deduplicated and sorted by Re E.
inline std::vector<PoleRecord> scan_poles(const ModelParams& p, const ScanWindow& w, const PoleSearchOptions& o = {}) {
  require_field(p);
  std::vector<PoleRecord> found;
  const int n = int(std::floor((w.re_max - w.re_min) / w.re_step + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double re = w.re_min + w.re_step * i;
    for (double im : w.im_seeds) {
      const PoleResult r = find_pole(cplx(re, im), p, o);
      if (!r.ok()) continue;
      const cplx E = r.record.E;
      if (E.real() < w.re_min || E.real() > w.re_max || E.imag() < w.im_min || E.imag() > w.im_max + o.im_slack) continue;
      const bool dup = std::any_of(found.begin(), found.end(),
                                   [&](const PoleRecord& f) { return std::abs(f.E - E) < w.dedup_tol; });
      if (!dup) found.push_back(r.record);
    }
  }
  std::sort(found.begin(), found.end(), [](const PoleRecord& a, const PoleRecord& b) { return a.E.real() < b.E.real(); });
  return found;
}

// Converge every guess, drop failures and duplicates (within dedup_tol),
// and return the distinct roots in input order.
inline std::vector<cplx> converge_seeds(const std::vector<cplx>& guesses, const ModelParams& p, double dedup_tol = 1e-6,
                                        const PoleSearchOptions& o = {}) {
  std::vector<cplx> out;
  for (cplx g : guesses) {
    const PoleResult r = find_pole(g, p, o);
    if (!r.ok()) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](cplx e) { return std::abs(e - r.record.E) < dedup_tol; });
    if (!dup) out.push_back(r.record.E);
  }
  return out;
}

// ------------------------------------------------------------ continuation

enum class EventKind { Crossing, AvoidedCrossing, Ambiguous };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Crossing: return "crossing";
    case EventKind::AvoidedCrossing: return "avoided-crossing";
    case EventKind::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

struct PoleEvent {
  double R = 0;
  EventKind kind = EventKind::Crossing;
  int partner = -1;  // branch id of the other trace
  cplx E;            // this branch's energy at the event
};

struct PoleTrace {
  int branch_id = 0;
  std::vector<PoleRecord> records;
  std::vector<PoleEvent> events;
  bool aborted = false;             // a solve failed; records stop there
  std::optional<PoleResult> failure;  // the failed solve, if any
  std::vector<double> collisions;   // R values where another branch hit the same root
};

struct ContinuationOptions {
  PoleSearchOptions search;
  double collision_tol = 1e-9;
  unsigned threads = 0;  // 0: one thread per branch up to hardware concurrency
};

namespace poles_detail {

inline PoleTrace march(int id, cplx seed, ModelParams p, double R0, int steps, double step,
                       const PoleSearchOptions& o) {
  PoleTrace t;
  t.branch_id = id;
  for (int k = 0; k <= steps; ++k) {
    p.R = R0 + step * k;
    cplx guess = seed;
    const std::size_t n = t.records.size();
    if (n >= 2) {
      guess = 2.0 * t.records[n - 1].E - t.records[n - 2].E;
    } else if (n == 1) {
      guess = t.records[0].E;
    }
    PoleResult r = find_pole(guess, p, o);
    if (!r.ok()) {
      t.aborted = true;
      t.failure = r;
      break;
    }
    t.records.push_back(r.record);
  }
  return t;
}

}  // namespace poles_detail

// Continue each seed from R0 to R1 (inclusive) in steps of `step`. Seeds
// must be roots, or good guesses for roots, at R0.
inline std::vector<PoleTrace> continue_in_R(const std::vector<cplx>& seeds, const ModelParams& p, double R0, double R1,
                                            double step, const ContinuationOptions& o = {}) {
  require_field(p);
  if (!(step > 0) || !(R1 >= R0)) throw std::invalid_argument("continue_in_R: need step > 0 and R1 >= R0");
  const int steps = int(std::floor((R1 - R0) / step + 1e-9));
  std::vector<PoleTrace> traces(seeds.size());
  unsigned workers = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max<std::size_t>(1, seeds.size()));
  std::size_t next = 0;
  while (next < seeds.size()) {
    std::vector<std::future<PoleTrace>> batch;
    for (unsigned w = 0; w < workers && next < seeds.size(); ++w, ++next) {
      batch.push_back(std::async(std::launch::async, poles_detail::march, int(next), seeds[next], p, R0, steps, step,
                                 o.search));
    }
    const std::size_t first = next - batch.size();
    for (std::size_t i = 0; i < batch.size(); ++i) traces[first + i] = batch[i].get();
  }
  // Collisions: two branches on the same root at the same R.
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t j = i + 1; j < traces.size(); ++j) {
      const std::size_t n = std::min(traces[i].records.size(), traces[j].records.size());
      for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(traces[i].records[k].E - traces[j].records[k].E) < o.collision_tol) {
          traces[i].collisions.push_back(traces[i].records[k].R);
          traces[j].collisions.push_back(traces[j].records[k].R);
        }
      }
    }
  }
  return traces;
}

// ---------------------------------------------------------- classification

struct EventOptions {
  double d_avoid = 0.05;  // distance scale, units of mc^2
  int window = 5;         // steps on each side for the slope-exchange test
  double coincidence_tol = 1e-9;
};

namespace poles_detail {

inline void add_event(std::vector<PoleTrace>& traces, std::size_t i, std::size_t j, std::size_t k, EventKind kind) {
  traces[i].events.push_back({traces[i].records[k].R, kind, traces[j].branch_id, traces[i].records[k].E});
  traces[j].events.push_back({traces[j].records[k].R, kind, traces[i].branch_id, traces[j].records[k].E});
}

}  // namespace poles_detail

// Annotate every pair of traces with crossings and avoided crossings over
// their common records (records are matched by index, i.e. by R).
inline void classify_events(std::vector<PoleTrace>& traces, const EventOptions& o = {}) {
  using poles_detail::add_event;
  for (auto& t : traces) t.events.clear();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t j = i + 1; j < traces.size(); ++j) {
      const auto& ri = traces[i].records;
      const auto& rj = traces[j].records;
      const std::size_t n = std::min(ri.size(), rj.size());
      if (n < 2) continue;
      std::vector<double> dist(n);
      for (std::size_t k = 0; k < n; ++k) dist[k] = std::abs(ri[k].E - rj[k].E);
      // Coincident branches are collisions, reported by continue_in_R.
      auto coincident = [&](std::size_t k) { return dist[k] < o.coincidence_tol; };
      // Avoided-crossing candidates: local minima of the distance below d_avoid
      // where the branches exchange widths, i.e. the Im E ordering swaps within
      // the window while the Im E slopes have opposite signs at the minimum.
      auto im_gap = [&](std::size_t k) { return ri[k].E.imag() - rj[k].E.imag(); };
      std::vector<std::size_t> avoided;
      for (std::size_t k = 1; k + 1 < n; ++k) {
        if (coincident(k)) continue;
        const bool minimum = dist[k] <= dist[k - 1] && dist[k] < dist[k + 1];
        if (!minimum || !(dist[k] < o.d_avoid)) continue;
        const std::size_t lo = k > std::size_t(o.window) ? k - o.window : 0;
        const std::size_t hi = std::min(n - 1, k + o.window);
        const bool swapped = (im_gap(lo) > 0) != (im_gap(hi) > 0);
        const double si = ri[k + 1].E.imag() - ri[k - 1].E.imag();
        const double sj = rj[k + 1].E.imag() - rj[k - 1].E.imag();
        if (swapped && si * sj < 0) avoided.push_back(k);
      }
      // Crossings: the Re E ordering swaps while Im E stays well separated.
      std::vector<std::size_t> crossing;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = ri[k].E.real() - rj[k].E.real();
        const double b = ri[k + 1].E.real() - rj[k + 1].E.real();
        if (!((a < 0 && b >= 0) || (a > 0 && b <= 0)) || coincident(k) || coincident(k + 1)) continue;
        const bool separated = std::abs(ri[k].E.imag() - rj[k].E.imag()) > o.d_avoid &&
                               std::abs(ri[k + 1].E.imag() - rj[k + 1].E.imag()) > o.d_avoid;
        if (separated) crossing.push_back(k + 1);
      }
      auto near = [&](const std::vector<std::size_t>& v, std::size_t k) {
        return std::any_of(v.begin(), v.end(), [&](std::size_t m) {
          return (m > k ? m - k : k - m) <= std::size_t(o.window);
        });
      };
      for (std::size_t k : avoided) add_event(traces, i, j, k, near(crossing, k) ? EventKind::Ambiguous : EventKind::AvoidedCrossing);
      for (std::size_t k : crossing) {
        if (!near(avoided, k)) add_event(traces, i, j, k, EventKind::Crossing);
      }
    }
  }
  for (auto& t : traces) {
    std::sort(t.events.begin(), t.events.end(), [](const PoleEvent& x, const PoleEvent& y) { return x.R < y.R; });
  }
}

[[nodiscard]] inline int count_events(const PoleTrace& t, EventKind kind) {
  return int(std::count_if(t.events.begin(), t.events.end(), [&](const PoleEvent& e) { return e.kind == kind; }));
}

}  // namespace stark
