#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "vgd/geometry.hpp"
#include "vgd/image.hpp"
#include "vgd/rasterizer.hpp"

namespace vgd {

struct LossValue {
    double value = 0.0;
    std::optional<Image> d_pixels;      // gradient w.r.t. the image argument
    std::optional<SceneGrad> d_geometry; // direct path-parameter gradients (xing only)
};

inline LossValue l2(const Raster& image, const Raster& target) {
    require_same_shape(image, target, "l2");
    LossValue out;
    Image g(image.h, image.w, image.c);
    double n = static_cast<double>(image.data.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < image.data.size(); ++i) {
        double d = image.data[i] - target.data[i];
        acc += d * d;
        g.data[i] = 2.0 * d / n;
    }
    out.value = acc / n;
    out.d_pixels = std::move(g);
    return out;
}

inline LossValue l1(const Raster& image, const Raster& target) {
    require_same_shape(image, target, "l1");
    LossValue out;
    Image g(image.h, image.w, image.c);
    double n = static_cast<double>(image.data.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < image.data.size(); ++i) {
        double d = image.data[i] - target.data[i];
        acc += std::abs(d);
        g.data[i] = d > 0.0 ? 1.0 / n : (d < 0.0 ? -1.0 / n : 0.0); // subgradient 0 at equality
    }
    out.value = acc / n;
    out.d_pixels = std::move(g);
    return out;
}

// Unsigned distance from each pixel center to the nearest path boundary over
// all paths, at the raster's resolution. Strokes measure to the stroke edge.
inline Image distance_field(const Scene& scene, int out_h, int out_w, int subdiv = 16) {
    if (scene.paths.empty()) throw std::invalid_argument("distance_field: empty scene");
    Image field(out_h, out_w, 1, std::numeric_limits<double>::infinity());
    double sx = static_cast<double>(scene.width) / out_w;
    double sy = static_cast<double>(scene.height) / out_h;
    for (const auto& path : scene.paths) {
        Flattened f = flatten_path(path, path.kind == PathKind::FixedSquare ? 1 : subdiv);
        Bbox box = bbox_of(f);
        double half_w = path.kind == PathKind::OpenStroked ? 0.5 * path.stroke_width : 0.0;
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                double& cur = field.at(y, x, 0);
                Vec2 p{(x + 0.5) * sx, (y + 0.5) * sy};
                if (box.distance(p) - half_w >= cur) continue;
                NearestEdge ne = nearest_edge(f, p);
                if (!std::isfinite(ne.dist)) continue;
                double d = std::abs(ne.dist - half_w);
                if (d < cur) cur = d;
            }
        }
    }
    return field;
}

// (1/3) * sum_i d'_i * sum_c (I_ic - Ihat_ic)^2, with d' the distance field,
// treated as a constant (recomputed by the caller each step, never
// differentiated).
inline LossValue udf_weighted_l2(const Raster& image, const Raster& target, const Scene& scene,
                                 int subdiv = 16) {
    require_same_shape(image, target, "udf_weighted_l2");
    if (scene.paths.empty()) throw std::invalid_argument("udf_weighted_l2: empty scene");
    Image d = distance_field(scene, image.h, image.w, subdiv);
    LossValue out;
    Image g(image.h, image.w, image.c);
    double acc = 0.0;
    for (int y = 0; y < image.h; ++y)
        for (int x = 0; x < image.w; ++x) {
            double w = d.at(y, x, 0);
            for (int c = 0; c < image.c; ++c) {
                double diff = image.at(y, x, c) - target.at(y, x, c);
                acc += w * diff * diff;
                g.at(y, x, c) = (2.0 / 3.0) * w * diff;
            }
        }
    out.value = acc / 3.0;
    out.d_pixels = std::move(g);
    return out;
}

// Self-intersection regularizer over cubic control polygons. Per segment with
// edges u=p1-p0, v=p2-p1, w=p3-p2: D1 = [cross(u,v) > 0] held constant,
// D2 = cross(v,w)/(|v||w|); term = D1*relu(-D2) + (1-D1)*relu(D2). Gradients
// flow through D2 only; zero-length edges contribute nothing.
inline LossValue xing(const Scene& scene) {
    LossValue out;
    SceneGrad g = zero_grad(scene);
    double total = 0.0;
    for (std::size_t pi = 0; pi < scene.paths.size(); ++pi) {
        const VectorPath& path = scene.paths[pi];
        if (path.kind == PathKind::FixedSquare) continue;
        int k = path.segment_count();
        for (int s = 0; s < k; ++s) {
            CubicSegment cs = path.segment(s);
            Vec2 u = cs.p1 - cs.p0, v = cs.p2 - cs.p1, w = cs.p3 - cs.p2;
            double nv = norm(v), nw = norm(w);
            if (nv == 0.0 || nw == 0.0) continue;
            double d1 = cross(u, v) > 0.0 ? 1.0 : 0.0;
            double c = cross(v, w);
            double n = nv * nw;
            double d2 = c / n;
            double term = d1 * std::max(0.0, -d2) + (1.0 - d1) * std::max(0.0, d2);
            total += term;
            double dterm_dd2 = 0.0;
            if (d1 == 1.0 && d2 < 0.0) dterm_dd2 = -1.0;
            if (d1 == 0.0 && d2 > 0.0) dterm_dd2 = 1.0;
            if (dterm_dd2 == 0.0) continue;
            Vec2 dc_dv{w.y, -w.x}, dc_dw{-v.y, v.x};
            Vec2 dd2_dv = (1.0 / n) * dc_dv - (d2 / (nv * nv)) * v;
            Vec2 dd2_dw = (1.0 / n) * dc_dw - (d2 / (nw * nw)) * w;
            Vec2 gv = dterm_dd2 * dd2_dv, gw = dterm_dd2 * dd2_dw;
            // v = p2-p1, w = p3-p2; control point indices within the stored list
            auto& pts = g.paths[pi].points;
            std::size_t i1 = 3 * static_cast<std::size_t>(s) + 1;
            std::size_t i2 = 3 * static_cast<std::size_t>(s) + 2;
            std::size_t i3 = path.kind == PathKind::ClosedFilled
                                 ? (3 * static_cast<std::size_t>(s) + 3) % path.points.size()
                                 : 3 * static_cast<std::size_t>(s) + 3;
            pts[i1].x -= gv.x; pts[i1].y -= gv.y;
            pts[i2].x += gv.x - gw.x; pts[i2].y += gv.y - gw.y;
            pts[i3].x += gw.x; pts[i3].y += gw.y;
        }
    }
    out.value = total;
    out.d_geometry = std::move(g);
    return out;
}

// (1/3) * mean(s_r^2 + s_g^2 + s_b^2) on the image rescaled to [-1,1].
// Callers apply the paper weight (0.05).
inline LossValue saturation_penalty(const Raster& image) {
    LossValue out;
    Image g(image.h, image.w, image.c);
    double npix = static_cast<double>(image.h) * image.w;
    double acc = 0.0;
    for (std::size_t i = 0; i < image.data.size(); ++i) {
        double s = 2.0 * image.data[i] - 1.0;
        acc += s * s;
        g.data[i] = 4.0 * s / (3.0 * npix);
    }
    out.value = acc / (3.0 * npix);
    out.d_pixels = std::move(g);
    return out;
}

} // namespace vgd
