#include "agetrack/errors.hpp"
#include "agetrack/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace agetrack {

namespace {

struct Point {
  double t;
  double v;
};

std::vector<Point> points(const Curve& m) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) out.push_back({static_cast<double>(i), *m[i]});
  }
  return out;
}

// m(0), falling back to the first defined value.
double baseline(const std::vector<Point>& pts) { return pts.front().v; }

}  // namespace

double half_life(const Curve& m) {
  const auto pts = points(m);
  if (pts.empty()) throw ValidationError("half_life: curve has no defined values");
  const double m0 = baseline(pts);
  if (!(m0 > 0.0)) return std::numeric_limits<double>::infinity();
  const double threshold = 0.5 * m0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].v <= threshold) {
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      return a.t + (a.v - threshold) / (a.v - b.v) * (b.t - a.t);
    }
  }
  return std::numeric_limits<double>::infinity();
}

std::optional<double> ols_slope(const Curve& m) {
  const auto pts = points(m);
  if (pts.size() < 2) return std::nullopt;
  const bool flat = std::all_of(pts.begin(), pts.end(), [&](const Point& p) { return p.v == pts.front().v; });
  if (flat) return 0.0;
  double tbar = 0.0;
  double vbar = 0.0;
  for (const auto& p : pts) {
    tbar += p.t;
    vbar += p.v;
  }
  tbar /= static_cast<double>(pts.size());
  vbar /= static_cast<double>(pts.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& p : pts) {
    sxy += (p.t - tbar) * (p.v - vbar);
    sxx += (p.t - tbar) * (p.t - tbar);
  }
  return sxy / sxx;
}

double hazard(const Curve& m, double tau) {
  const auto pts = points(m);
  if (pts.empty()) return 0.0;
  const auto below = std::count_if(pts.begin(), pts.end(), [&](const Point& p) { return p.v < tau; });
  return static_cast<double>(below) / static_cast<double>(pts.size());
}

CurveStats curve_stats(const Curve& m, std::optional<double> tau) {
  const auto pts = points(m);
  if (pts.empty()) throw ValidationError("curve_stats: curve has no defined values");
  CurveStats s;
  s.tau = tau.value_or(0.5 * baseline(pts));
  s.half_life = half_life(m);
  s.slope = ols_slope(m);
  s.hazard = hazard(m, s.tau);
  s.final_value = pts.back().v;
  double sum = 0.0;
  for (const auto& p : pts) sum += p.v;
  s.mean = sum / static_cast<double>(pts.size());
  return s;
}

std::optional<double> window_delta(const Curve& m, int event_session, int width) {
  if (width < 1) throw ValidationError("window_delta: width must be >= 1");
  auto mean_over = [&](int from, int to) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (int t = std::max(from, 0); t < to && t < static_cast<int>(m.size()); ++t) {
      if (m[static_cast<std::size_t>(t)]) {
        sum += *m[static_cast<std::size_t>(t)];
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  const auto pre = mean_over(event_session - width, event_session);
  const auto post = mean_over(event_session, event_session + width);
  if (!pre || !post) return std::nullopt;
  return *post - *pre;
}

Json curve_stats_json(const CurveStats& s) {
  Json j;
  j["half_life"] = std::isinf(s.half_life) ? Json("inf") : Json(s.half_life);
  j["slope"] = s.slope ? Json(*s.slope) : Json(nullptr);
  j["hazard"] = s.hazard;
  j["final"] = s.final_value;
  j["mean"] = s.mean;
  j["tau"] = s.tau;
  return j;
}

}  // namespace agetrack
