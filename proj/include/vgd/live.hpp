#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "vgd/losses.hpp"
#include "vgd/optimizer.hpp"
#include "vgd/params.hpp"
#include "vgd/rasterizer.hpp"
#include "vgd/rng.hpp"

namespace vgd {

// Per-stage path counts. Documented schedules: [2,4,10] for 16 paths,
// [8,8,16,16,16] for 64, [8,16,32,72] for 128.
struct PathSchedule {
    std::vector<int> stage_counts;

    static PathSchedule for_paths(int total) {
        if (total == 16) return {{2, 4, 10}};
        if (total == 64) return {{8, 8, 16, 16, 16}};
        if (total == 128) return {{8, 16, 32, 72}};
        // generic fallback: stages of 8-16 paths
        PathSchedule s;
        int left = total;
        while (left > 0) {
            int take = std::min(left, left > 24 ? 16 : (left > 16 ? left - 8 : left));
            s.stage_counts.push_back(take);
            left -= take;
        }
        return s;
    }

    int total() const {
        int t = 0;
        for (int c : stage_counts) t += c;
        return t;
    }
};

// Per-pixel summed squared channel error, box-blurred (radius 2) to
// stabilize the argmax.
inline Image loss_map(const Raster& image, const Raster& target) {
    require_same_shape(image, target, "loss_map");
    Image err(image.h, image.w, 1);
    for (int y = 0; y < image.h; ++y)
        for (int x = 0; x < image.w; ++x) {
            double acc = 0.0;
            for (int c = 0; c < image.c; ++c) {
                double d = image.at(y, x, c) - target.at(y, x, c);
                acc += d * d;
            }
            err.at(y, x, 0) = acc;
        }
    Image blurred(image.h, image.w, 1);
    const int r = 2;
    // center tap counted twice so an isolated error peaks at its own pixel
    // instead of a flat 5x5 plateau; total mass is still preserved
    for (int y = 0; y < image.h; ++y)
        for (int x = 0; x < image.w; ++x) {
            double acc = err.at(y, x, 0);
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= image.h || xx < 0 || xx >= image.w) continue;
                    acc += err.at(yy, xx, 0);
                }
            blurred.at(y, x, 0) = acc / ((2 * r + 1) * (2 * r + 1) + 1);
        }
    return blurred;
}

inline double live_init_radius(int canvas) { return 20.0 * canvas / 600.0; }

// New paths are radius-20 circles (scaled by the render-resolution ratio)
// centered at successive loss-map argmaxes, with the map suppressed in an
// init-radius disk after each pick. Fill color copies the target pixel at
// the center; opacity ~ U(0.7, 1).
inline std::vector<VectorPath> init_paths(int k, Image map, const Raster& target, Rng& rng,
                                          double radius = 0.0) {
    if (k < 1) throw std::invalid_argument("init_paths: k >= 1 required");
    if (radius <= 0.0) radius = live_init_radius(std::max(target.w, target.h));
    std::vector<VectorPath> out;
    for (int i = 0; i < k; ++i) {
        int best_x = 0, best_y = 0;
        double best = -1.0;
        for (int y = 0; y < map.h; ++y)
            for (int x = 0; x < map.w; ++x)
                if (map.at(y, x, 0) > best) {
                    best = map.at(y, x, 0);
                    best_x = x;
                    best_y = y;
                }
        Vec2 center{best_x + 0.5, best_y + 0.5};
        Color fill{target.at(best_y, best_x, 0), target.at(best_y, best_x, 1),
                   target.at(best_y, best_x, 2), rng.uniform(0.7, 1.0)};
        out.push_back(circle_path(center, radius, fill));
        for (int y = 0; y < map.h; ++y)
            for (int x = 0; x < map.w; ++x) {
                double dx = x + 0.5 - center.x, dy = y + 0.5 - center.y;
                if (dx * dx + dy * dy <= radius * radius) map.at(y, x, 0) = 0.0;
            }
    }
    return out;
}

inline Color border_mean(const Raster& target) {
    double acc[3] = {0, 0, 0};
    int n = 0;
    for (int x = 0; x < target.w; ++x)
        for (int y : {0, target.h - 1}) {
            for (int c = 0; c < 3; ++c) acc[c] += target.at(y, x, c);
            ++n;
        }
    for (int y = 1; y + 1 < target.h; ++y)
        for (int x : {0, target.w - 1}) {
            for (int c = 0; c < 3; ++c) acc[c] += target.at(y, x, c);
            ++n;
        }
    return {acc[0] / n, acc[1] / n, acc[2] / n, 1.0};
}

struct VectorizeOptions {
    int iters_per_stage = 500;
    double lambda_xing = 0.01;
    LrSchedule lr = LrSchedule::live();
    std::uint64_t seed = 0;
    // called with (stage index, scene) after each stage finishes
    std::function<void(int, const Scene&)> stage_snapshot;
};

// Layer-wise vectorization: stages add paths at high-loss regions, then all
// current paths plus the background are optimized with the distance-weighted
// reconstruction loss and the xing regularizer.
inline Scene vectorize(const Raster& target, const PathSchedule& schedule,
                       const RenderConfig& render_cfg, const VectorizeOptions& opt = {}) {
    if (schedule.stage_counts.empty()) throw std::invalid_argument("vectorize: empty schedule");
    Rng rng(opt.seed);
    Scene scene;
    scene.width = target.w;
    scene.height = target.h;
    scene.background = border_mean(target);

    for (std::size_t stage = 0; stage < schedule.stage_counts.size(); ++stage) {
        Raster current = render(scene, render_cfg);
        Image map = loss_map(current, target);
        int z0 = scene.paths.empty() ? 0 : scene.max_z() + 1;
        auto fresh = init_paths(schedule.stage_counts[stage], std::move(map), target, rng);
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            fresh[i].z_index = z0 + static_cast<int>(i);
            scene.paths.push_back(std::move(fresh[i]));
        }

        ParamLayout layout = ParamLayout::of(scene);
        std::vector<double> params = layout.gather(scene);
        AdamState adam(layout.total);
        for (int it = 0; it < opt.iters_per_stage; ++it) {
            RenderResult rr = render_forward(scene, render_cfg);
            LossValue udf = udf_weighted_l2(rr.raster, target, scene, render_cfg.subdiv);
            SceneGrad grad = render_backward(scene, render_cfg, *udf.d_pixels, rr.cache);
            if (opt.lambda_xing != 0.0) {
                LossValue xl = xing(scene);
                add_scaled(grad, *xl.d_geometry, opt.lambda_xing);
            }
            std::vector<double> g = layout.flatten(grad);
            adam_step(adam, params, g, rates_for(opt.lr, layout, it, opt.iters_per_stage));
            layout.scatter(scene, params);
            clamp_colors(scene);
            params = layout.gather(scene);
        }
        if (opt.stage_snapshot) opt.stage_snapshot(static_cast<int>(stage), scene);
    }
    return scene;
}

} // namespace vgd
