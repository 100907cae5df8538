#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "vgd/geometry.hpp"
#include "vgd/image.hpp"

namespace vgd {

// Output resolution (0 = scene dimensions), logistic softness tau in canvas
// units, boundary subdivision, and the coverage cutoff in units of tau.
// Beyond cutoff*tau a path's coverage is exactly 0; at the default 30*tau the
// truncated tail is < 1e-13.
struct RenderConfig {
    int width = 0;
    int height = 0;
    double tau = 0.8;
    int subdiv = 16;
    double cutoff = 30.0;

    int out_w(const Scene& s) const { return width > 0 ? width : s.width; }
    int out_h(const Scene& s) const { return height > 0 ? height : s.height; }
};

// Gradient record mirroring the optimizable scalars of a Scene: control
// points unless the path is a FixedSquare, fill RGBA unless the path is
// stroked, and background RGB (never background alpha).
struct PathGrad {
    std::vector<Vec2> points; // empty when control points are immutable
    std::array<double, 4> fill{0, 0, 0, 0};
    bool has_fill = false;
};

struct SceneGrad {
    std::vector<PathGrad> paths;
    std::array<double, 3> background{0, 0, 0};
};

inline SceneGrad zero_grad(const Scene& scene) {
    SceneGrad g;
    g.paths.resize(scene.paths.size());
    for (std::size_t i = 0; i < scene.paths.size(); ++i) {
        const auto& p = scene.paths[i];
        if (p.points_optimizable()) g.paths[i].points.assign(p.points.size(), Vec2{});
        g.paths[i].has_fill = p.fill_optimizable();
    }
    return g;
}

inline void add_scaled(SceneGrad& dst, const SceneGrad& src, double s) {
    for (std::size_t i = 0; i < dst.paths.size(); ++i) {
        auto& d = dst.paths[i];
        const auto& a = src.paths[i];
        for (std::size_t j = 0; j < d.points.size() && j < a.points.size(); ++j) {
            d.points[j].x += s * a.points[j].x;
            d.points[j].y += s * a.points[j].y;
        }
        if (d.has_fill && a.has_fill)
            for (int c = 0; c < 4; ++c) d.fill[c] += s * a.fill[c];
    }
    for (int c = 0; c < 3; ++c) dst.background[c] += s * src.background[c];
}

namespace detail {

struct PathRaster {
    Flattened flat;
    bool even_odd = false;
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0; // pixel rect, half-open
    std::vector<double> d;              // signed distance per rect pixel (inf = no coverage)
    std::vector<int> edge;              // nearest boundary edge, -1 if none
    std::vector<double> tstar;

    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y - y0) * (x1 - x0) + (x - x0);
    }
};

inline double coverage_of(double d, double tau, double cut) {
    if (!(d <= cut)) return 0.0; // also rejects +inf
    return 1.0 / (1.0 + std::exp(d / tau));
}

} // namespace detail

// Per-render cache: flattened boundaries, active pixel rects, signed
// distances and nearest-edge records. render_backward can reuse it to avoid
// recomputing the forward distances.
struct RenderCache {
    int out_w = 0, out_h = 0;
    double sx = 1.0, sy = 1.0; // canvas units per output pixel
    std::vector<detail::PathRaster> paths;
    std::vector<int> draw_order; // path indices sorted by z_index
};

struct RenderResult {
    Raster raster;
    RenderCache cache;
};

inline RenderResult render_forward(const Scene& scene, const RenderConfig& cfg) {
    if (cfg.tau <= 0.0) throw std::invalid_argument("render: tau must be > 0");
    RenderResult out;
    RenderCache& cache = out.cache;
    cache.out_w = cfg.out_w(scene);
    cache.out_h = cfg.out_h(scene);
    cache.sx = static_cast<double>(scene.width) / cache.out_w;
    cache.sy = static_cast<double>(scene.height) / cache.out_h;
    double cut = cfg.cutoff * cfg.tau;

    cache.draw_order.resize(scene.paths.size());
    std::iota(cache.draw_order.begin(), cache.draw_order.end(), 0);
    std::stable_sort(cache.draw_order.begin(), cache.draw_order.end(), [&](int a, int b) {
        return scene.paths[a].z_index < scene.paths[b].z_index;
    });

    cache.paths.resize(scene.paths.size());
    for (std::size_t pi = 0; pi < scene.paths.size(); ++pi) {
        const VectorPath& path = scene.paths[pi];
        detail::PathRaster& pr = cache.paths[pi];
        pr.flat = flatten_path(path, cfg.subdiv);
        pr.even_odd = pr.flat.closed && self_intersects(pr.flat);
        Bbox box = bbox_of(pr.flat);
        double margin = cut + (path.kind == PathKind::OpenStroked ? 0.5 * path.stroke_width : 0.0);
        box.expand(margin);
        // pixel centers (x+0.5)*sx inside the expanded box
        pr.x0 = std::max(0, static_cast<int>(std::ceil(box.xmin / cache.sx - 0.5)));
        pr.x1 = std::min(cache.out_w, static_cast<int>(std::floor(box.xmax / cache.sx - 0.5)) + 1);
        pr.y0 = std::max(0, static_cast<int>(std::ceil(box.ymin / cache.sy - 0.5)));
        pr.y1 = std::min(cache.out_h, static_cast<int>(std::floor(box.ymax / cache.sy - 0.5)) + 1);
        if (pr.x1 <= pr.x0 || pr.y1 <= pr.y0) {
            pr.x0 = pr.x1 = pr.y0 = pr.y1 = 0;
            continue;
        }
        std::size_t count = static_cast<std::size_t>(pr.x1 - pr.x0) * (pr.y1 - pr.y0);
        pr.d.assign(count, std::numeric_limits<double>::infinity());
        pr.edge.assign(count, -1);
        pr.tstar.assign(count, 0.0);
        for (int y = pr.y0; y < pr.y1; ++y) {
            for (int x = pr.x0; x < pr.x1; ++x) {
                Vec2 p{(x + 0.5) * cache.sx, (y + 0.5) * cache.sy};
                SignedDistance sd = signed_distance_flat(pr.flat, p, pr.even_odd);
                std::size_t k = pr.idx(x, y);
                if (!std::isfinite(sd.nearest.dist)) continue;
                double dv = sd.value;
                if (path.kind == PathKind::OpenStroked) dv -= 0.5 * path.stroke_width;
                pr.d[k] = dv;
                pr.edge[k] = static_cast<int>(sd.nearest.edge);
                pr.tstar[k] = sd.nearest.tstar;
            }
        }
    }

    Raster& img = out.raster;
    img = Raster(cache.out_h, cache.out_w, 3);
    for (int y = 0; y < cache.out_h; ++y) {
        for (int x = 0; x < cache.out_w; ++x) {
            double col[3] = {scene.background.r, scene.background.g, scene.background.b};
            for (int pi : cache.draw_order) {
                const detail::PathRaster& pr = cache.paths[pi];
                if (!pr.contains(x, y)) continue;
                double cov = detail::coverage_of(pr.d[pr.idx(x, y)], cfg.tau, cut);
                if (cov == 0.0) continue;
                const VectorPath& path = scene.paths[pi];
                const Color& c = path.kind == PathKind::OpenStroked ? path.stroke : path.fill;
                double a = cov * c.a;
                col[0] = c.r * a + col[0] * (1.0 - a);
                col[1] = c.g * a + col[1] * (1.0 - a);
                col[2] = c.b * a + col[2] * (1.0 - a);
            }
            for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = col[ch];
        }
    }
    return out;
}

inline Raster render(const Scene& scene, const RenderConfig& cfg) {
    return render_forward(scene, cfg).raster;
}

// Vector-Jacobian product of the render map. Differentiates through
// compositing -> coverage -> signed distance -> flattened polyline -> control
// points, and through compositing -> fill/stroke alpha, fill colors and
// background. Hard branches (winding sign, nearest edge, clamp) are held
// constant, which is exact almost everywhere (envelope argument at the
// nearest-point minimum).
inline SceneGrad render_backward(const Scene& scene, const RenderConfig& cfg,
                                 const Image& d_loss_d_pixels, const RenderCache& cache) {
    if (d_loss_d_pixels.h != cache.out_h || d_loss_d_pixels.w != cache.out_w ||
        d_loss_d_pixels.c != 3)
        throw std::invalid_argument("render_backward: upstream gradient shape mismatch");
    double cut = cfg.cutoff * cfg.tau;
    SceneGrad grad = zero_grad(scene);

    std::vector<int> active;
    std::vector<double> covs;
    std::vector<double> below; // composite color below each active path, flattened rgb
    active.reserve(scene.paths.size());

    for (int y = 0; y < cache.out_h; ++y) {
        for (int x = 0; x < cache.out_w; ++x) {
            const double u[3] = {d_loss_d_pixels.at(y, x, 0), d_loss_d_pixels.at(y, x, 1),
                                 d_loss_d_pixels.at(y, x, 2)};
            if (u[0] == 0.0 && u[1] == 0.0 && u[2] == 0.0) continue;
            active.clear();
            covs.clear();
            for (int pi : cache.draw_order) {
                const detail::PathRaster& pr = cache.paths[pi];
                if (!pr.contains(x, y)) continue;
                double cov = detail::coverage_of(pr.d[pr.idx(x, y)], cfg.tau, cut);
                if (cov == 0.0) continue;
                active.push_back(pi);
                covs.push_back(cov);
            }
            // forward prefix of composite colors
            below.assign(3 * (active.size() + 1), 0.0);
            below[0] = scene.background.r;
            below[1] = scene.background.g;
            below[2] = scene.background.b;
            for (std::size_t i = 0; i < active.size(); ++i) {
                const VectorPath& path = scene.paths[active[i]];
                const Color& c = path.kind == PathKind::OpenStroked ? path.stroke : path.fill;
                double a = covs[i] * c.a;
                for (int ch = 0; ch < 3; ++ch) {
                    double cc = ch == 0 ? c.r : (ch == 1 ? c.g : c.b);
                    below[3 * (i + 1) + ch] = cc * a + below[3 * i + ch] * (1.0 - a);
                }
            }
            double T = 1.0; // transmittance of everything above the current path
            for (std::size_t ii = active.size(); ii-- > 0;) {
                int pi = active[ii];
                const VectorPath& path = scene.paths[pi];
                const detail::PathRaster& pr = cache.paths[pi];
                const Color& c = path.kind == PathKind::OpenStroked ? path.stroke : path.fill;
                double cov = covs[ii];
                double a = cov * c.a;
                double g_a = 0.0;
                for (int ch = 0; ch < 3; ++ch) {
                    double cc = ch == 0 ? c.r : (ch == 1 ? c.g : c.b);
                    double gc = u[ch] * a * T;
                    if (grad.paths[pi].has_fill) grad.paths[pi].fill[ch] += gc;
                    g_a += u[ch] * (cc - below[3 * ii + ch]) * T;
                }
                if (grad.paths[pi].has_fill) grad.paths[pi].fill[3] += g_a * cov;
                T *= (1.0 - a);

                if (!path.points_optimizable()) continue;
                std::size_t k = pr.idx(x, y);
                int e = pr.edge[k];
                if (e < 0) continue;
                double g_cov = g_a * c.a;
                double g_d = -g_cov * cov * (1.0 - cov) / cfg.tau;
                if (g_d == 0.0) continue;
                Vec2 p{(x + 0.5) * cache.sx, (y + 0.5) * cache.sy};
                Vec2 ea = pr.flat.edge_a(e), eb = pr.flat.edge_b(e);
                double ts = pr.tstar[k];
                Vec2 q = ea + ts * (eb - ea);
                Vec2 dir = q - p;
                double m = norm(dir);
                if (m == 0.0) continue;
                double bsign = 1.0;
                if (pr.flat.closed) bsign = pr.d[k] < 0.0 ? -1.0 : 1.0;
                Vec2 gm = (g_d * bsign / m) * dir; // d m / d q, scaled
                // route the two edge vertices back to their segment's control points
                std::size_t npts = pr.flat.pts.size();
                std::size_t verts[2] = {static_cast<std::size_t>(e), (static_cast<std::size_t>(e) + 1) % npts};
                double vw[2] = {1.0 - ts, ts};
                for (int vi = 0; vi < 2; ++vi) {
                    std::size_t v = verts[vi];
                    int s = pr.flat.seg[v];
                    double bw[4];
                    bernstein_weights(pr.flat.t[v], bw);
                    for (int j = 0; j < 4; ++j) {
                        std::size_t cp = path.kind == PathKind::ClosedFilled
                                             ? (3 * static_cast<std::size_t>(s) + j) % path.points.size()
                                             : 3 * static_cast<std::size_t>(s) + j;
                        grad.paths[pi].points[cp].x += vw[vi] * bw[j] * gm.x;
                        grad.paths[pi].points[cp].y += vw[vi] * bw[j] * gm.y;
                    }
                }
            }
            for (int ch = 0; ch < 3; ++ch) grad.background[ch] += u[ch] * T;
        }
    }
    return grad;
}

inline SceneGrad render_backward(const Scene& scene, const RenderConfig& cfg,
                                 const Image& d_loss_d_pixels) {
    RenderResult rr = render_forward(scene, cfg);
    return render_backward(scene, cfg, d_loss_d_pixels, rr.cache);
}

} // namespace vgd
