#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vgd/geometry.hpp"
#include "vgd/rasterizer.hpp"

namespace vgd {

enum class ParamGroup { ControlPoint, FillColor, Background };

// Flat view over the optimizable scalars of a Scene, in path order:
// control-point coordinates (unless FixedSquare), then fill RGBA (unless
// OpenStroked), with background RGB at the end. Gives the optimizer and the
// finite-difference harness one canonical ordering.
struct ParamLayout {
    struct Block {
        std::size_t offset = 0;
        std::size_t count = 0;
    };
    std::vector<Block> blocks; // one per path
    std::vector<ParamGroup> groups;
    std::size_t total = 0;

    static ParamLayout of(const Scene& scene) {
        ParamLayout l;
        l.blocks.resize(scene.paths.size());
        for (std::size_t i = 0; i < scene.paths.size(); ++i) {
            const auto& p = scene.paths[i];
            l.blocks[i].offset = l.total;
            std::size_t n = 0;
            if (p.points_optimizable()) n += 2 * p.points.size();
            if (p.fill_optimizable()) n += 4;
            l.blocks[i].count = n;
            l.total += n;
            if (p.points_optimizable())
                l.groups.insert(l.groups.end(), 2 * p.points.size(), ParamGroup::ControlPoint);
            if (p.fill_optimizable()) l.groups.insert(l.groups.end(), 4, ParamGroup::FillColor);
        }
        l.groups.insert(l.groups.end(), 3, ParamGroup::Background);
        l.total += 3;
        return l;
    }

    std::vector<double> gather(const Scene& scene) const {
        std::vector<double> v;
        v.reserve(total);
        for (const auto& p : scene.paths) {
            if (p.points_optimizable())
                for (const auto& pt : p.points) {
                    v.push_back(pt.x);
                    v.push_back(pt.y);
                }
            if (p.fill_optimizable()) {
                v.push_back(p.fill.r);
                v.push_back(p.fill.g);
                v.push_back(p.fill.b);
                v.push_back(p.fill.a);
            }
        }
        v.push_back(scene.background.r);
        v.push_back(scene.background.g);
        v.push_back(scene.background.b);
        if (v.size() != total) throw std::logic_error("ParamLayout::gather: stale layout");
        return v;
    }

    void scatter(Scene& scene, const std::vector<double>& v) const {
        if (v.size() != total) throw std::invalid_argument("ParamLayout::scatter: size mismatch");
        std::size_t i = 0;
        for (auto& p : scene.paths) {
            if (p.points_optimizable())
                for (auto& pt : p.points) {
                    pt.x = v[i++];
                    pt.y = v[i++];
                }
            if (p.fill_optimizable()) {
                p.fill.r = v[i++];
                p.fill.g = v[i++];
                p.fill.b = v[i++];
                p.fill.a = v[i++];
            }
        }
        scene.background.r = v[i++];
        scene.background.g = v[i++];
        scene.background.b = v[i++];
    }

    std::vector<double> flatten(const SceneGrad& g) const {
        std::vector<double> v;
        v.reserve(total);
        for (const auto& pg : g.paths) {
            for (const auto& pt : pg.points) {
                v.push_back(pt.x);
                v.push_back(pt.y);
            }
            if (pg.has_fill)
                for (int c = 0; c < 4; ++c) v.push_back(pg.fill[c]);
        }
        for (int c = 0; c < 3; ++c) v.push_back(g.background[c]);
        if (v.size() != total) throw std::invalid_argument("ParamLayout::flatten: grad shape mismatch");
        return v;
    }
};

} // namespace vgd
