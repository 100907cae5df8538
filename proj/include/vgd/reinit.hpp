#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "vgd/geometry.hpp"
#include "vgd/rng.hpp"

namespace vgd {

// Periodic reinitialization of unused paths. Paper table defaults: opacity
// threshold 0.05, area threshold 64 px^2 (0 for from-scratch runs), every 50
// steps, with a freeze window at the end of optimization.
struct ReinitConfig {
    double opacity_thresh = 0.05;
    double area_thresh = 64.0;
    int frequency = 50;
    int freeze_window = 300;
    int area_subdiv = 16;

    static ReinitConfig from_scratch() {
        ReinitConfig c;
        c.area_thresh = 0.0;
        return c;
    }
    static ReinitConfig live_init() { return {}; }
};

struct SweepResult {
    std::vector<int> replaced; // indices into the pre-sweep path list
    std::vector<int> order;    // order[new_index] = old_index after the z re-sort
};

// Replace every path with fill opacity or area strictly below its threshold
// by a fresh radius-20 circle at a random location, random color, opacity
// U(0.7, 1), stacked on top of all existing paths. No-op outside the
// frequency grid or inside the freeze window. Path count is conserved.
inline SweepResult sweep(Scene& scene, const ReinitConfig& cfg, int step, int total_steps,
                         Rng& rng) {
    if (cfg.frequency < 1 || cfg.opacity_thresh < 0.0 || cfg.area_thresh < 0.0)
        throw std::invalid_argument("sweep: invalid reinit configuration");
    SweepResult res;
    res.order.resize(scene.paths.size());
    std::iota(res.order.begin(), res.order.end(), 0);
    if (step % cfg.frequency != 0) return res;
    if (step >= total_steps - cfg.freeze_window) return res;

    int zmax = scene.max_z();
    for (std::size_t i = 0; i < scene.paths.size(); ++i) {
        VectorPath& p = scene.paths[i];
        if (p.kind == PathKind::FixedSquare) continue; // pixel grids are never reinitialized
        bool low_opacity, low_area = false;
        if (p.kind == PathKind::OpenStroked) {
            low_opacity = p.stroke.a < cfg.opacity_thresh; // opacity rule only (no area for strokes)
        } else {
            low_opacity = p.fill.a < cfg.opacity_thresh;
            low_area = path_area(p, cfg.area_subdiv) < cfg.area_thresh;
        }
        if (!low_opacity && !low_area) continue;
        Vec2 center{rng.uniform(0.0, static_cast<double>(scene.width)),
                    rng.uniform(0.0, static_cast<double>(scene.height))};
        Color fill{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(0.7, 1.0)};
        p = circle_path(center, 20.0, fill, ++zmax);
        res.replaced.push_back(static_cast<int>(i));
    }
    if (!res.replaced.empty()) {
        std::stable_sort(res.order.begin(), res.order.end(), [&](int a, int b) {
            return scene.paths[a].z_index < scene.paths[b].z_index;
        });
        std::vector<VectorPath> sorted;
        sorted.reserve(scene.paths.size());
        for (int oi : res.order) sorted.push_back(std::move(scene.paths[oi]));
        scene.paths = std::move(sorted);
    }
    return res;
}

} // namespace vgd
