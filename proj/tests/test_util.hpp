#pragma once

// Shared oracles and generators for the test suites. Everything here is
// independent of the implementation paths it checks: quadrature, dense
// sampling, Monte Carlo and scalar re-implementations only.

#include <cmath>
#include <functional>
#include <vector>

#include "vgd/geometry.hpp"
#include "vgd/image.hpp"
#include "vgd/params.hpp"
#include "vgd/rng.hpp"

namespace testutil {

using vgd::Vec2;

inline Vec2 cubic_deriv(const vgd::CubicSegment& s, double t) {
    double u = 1.0 - t;
    Vec2 d = 3.0 * u * u * (s.p1 - s.p0) + (6.0 * u * t) * (s.p2 - s.p1) + 3.0 * t * t * (s.p3 - s.p2);
    return d;
}

// Adaptive Simpson arc length of a cubic segment.
inline double arc_length_quadrature(const vgd::CubicSegment& s, double a = 0.0, double b = 1.0,
                                    double tol = 1e-10, int depth = 24) {
    auto speed = [&](double t) { return vgd::norm(cubic_deriv(s, t)); };
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) -> double {
        double mid = 0.5 * (lo + hi);
        double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        double flm = speed(lm), frm = speed(rm);
        double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol) return left + right;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
    };
    double flo = speed(a), fhi = speed(b), fmid = speed(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (flo + 4.0 * fmid + fhi);
    return rec(a, b, flo, fmid, fhi, whole, depth);
}

inline double polyline_length(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += vgd::norm(pts[i + 1] - pts[i]);
    return len;
}

// Minimum distance from p to densely sampled boundary points of a path.
inline double dense_boundary_distance(const vgd::VectorPath& path, Vec2 p, int samples_per_seg) {
    double best = std::numeric_limits<double>::infinity();
    if (path.kind == vgd::PathKind::FixedSquare) {
        for (int e = 0; e < 4; ++e) {
            Vec2 a = path.points[e], b = path.points[(e + 1) % 4];
            for (int i = 0; i <= samples_per_seg; ++i) {
                Vec2 q = a + (static_cast<double>(i) / samples_per_seg) * (b - a);
                best = std::min(best, vgd::norm(p - q));
            }
        }
        return best;
    }
    int k = path.segment_count();
    for (int s = 0; s < k; ++s) {
        vgd::CubicSegment cs = path.segment(s);
        bool degenerate = vgd::norm2(cs.p0 - cs.p1) == 0 && vgd::norm2(cs.p1 - cs.p2) == 0 &&
                          vgd::norm2(cs.p2 - cs.p3) == 0;
        if (degenerate) continue;
        for (int i = 0; i <= samples_per_seg; ++i) {
            Vec2 q = vgd::cubic_point(cs, static_cast<double>(i) / samples_per_seg);
            best = std::min(best, vgd::norm(p - q));
        }
    }
    return best;
}

// Central finite difference of a scalar function of a flat parameter vector.
inline std::vector<double> finite_diff(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-3) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double x0 = x[i];
        x[i] = x0 + h;
        double fp = f(x);
        x[i] = x0 - h;
        double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline bool grad_close(double analytic, double numeric, double rel = 1e-3, double abs = 1e-6) {
    double diff = std::abs(analytic - numeric);
    if (diff <= abs) return true;
    return diff <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

inline vgd::Color random_color(vgd::Rng& rng, double alpha_lo = 0.2, double alpha_hi = 1.0) {
    return {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(alpha_lo, alpha_hi)};
}

// Small random scene of closed filled paths (plus optionally strokes), used
// by the gradient suites.
inline vgd::Scene random_scene(vgd::Rng& rng, int size, int npaths, bool with_stroke = false) {
    vgd::Scene scene;
    scene.width = scene.height = size;
    scene.background = {rng.uniform(), rng.uniform(), rng.uniform(), 1.0};
    for (int i = 0; i < npaths; ++i) {
        bool stroke = with_stroke && i % 3 == 2;
        vgd::VectorPath p;
        Vec2 c{rng.uniform(0.2, 0.8) * size, rng.uniform(0.2, 0.8) * size};
        double r = rng.uniform(0.08, 0.22) * size;
        if (stroke) {
            p.kind = vgd::PathKind::OpenStroked;
            p.stroke_width = rng.uniform(1.5, 4.0);
            p.stroke = {0.0, 0.0, 0.0, 1.0};
            int segs = 2;
            p.points.resize(3 * segs + 1);
            Vec2 cur{rng.uniform(0.2, 0.8) * size, rng.uniform(0.2, 0.8) * size};
            for (auto& pt : p.points) {
                pt = cur;
                cur = cur + Vec2{rng.uniform(-0.12, 0.12) * size, rng.uniform(-0.12, 0.12) * size};
            }
        } else {
            p = vgd::circle_path(c, r, random_color(rng));
            for (auto& pt : p.points) { // jitter so shapes are irregular
                pt.x += rng.uniform(-0.03, 0.03) * size;
                pt.y += rng.uniform(-0.03, 0.03) * size;
            }
        }
        p.z_index = i;
        scene.paths.push_back(p);
    }
    return scene;
}

} // namespace testutil
