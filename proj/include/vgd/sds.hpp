#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "vgd/diffusion.hpp"
#include "vgd/losses.hpp"
#include "vgd/optimizer.hpp"
#include "vgd/params.hpp"
#include "vgd/rasterizer.hpp"
#include "vgd/reinit.hpp"
#include "vgd/rng.hpp"

namespace vgd {

// The whole render -> augment -> encode -> score gradient chain runs in full
// double precision; no half-precision path exists in this codebase.
static_assert(std::is_same_v<decltype(Image::data)::value_type, double>,
              "gradient chain must be full precision");

// Perspective + random-crop augmentation. Crop 0 means the proportional
// default: round(render * 512/600) to the nearest multiple of 8 (600 -> 512,
// 128 -> 112).
struct AugmentSpec {
    double perspective_prob = 0.7;
    double distortion = 0.5;
    int crop = 0;
    std::uint64_t seed = 0;

    static int default_crop(int render_size) {
        int c = static_cast<int>(std::lround(render_size * 512.0 / 600.0 / 8.0)) * 8;
        return std::min(std::max(c, 8), render_size);
    }
    int crop_for(int render_size) const { return crop > 0 ? crop : default_crop(render_size); }
};

// Replayable record: output pixel p maps to input homogeneous coordinates
// H * (x + cx, y + cy, 1). The sampling map is fixed by the draw, so the
// image-to-image map is linear and its gradient is the exact transpose.
struct TransformRecord {
    std::array<double, 9> H{1, 0, 0, 0, 1, 0, 0, 0, 1};
    int crop_x = 0, crop_y = 0;
    int out_h = 0, out_w = 0;
    int in_h = 0, in_w = 0;
    bool perspective = false;
};

namespace detail {

// Solve the 8x8 DLT system mapping quad src -> dst (H * src_i ~ dst_i).
inline std::array<double, 9> homography(const std::array<Vec2, 4>& src,
                                        const std::array<Vec2, 4>& dst) {
    double A[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        double x = src[i].x, y = src[i].y, X = dst[i].x, Y = dst[i].y;
        double* r0 = A[2 * i];
        double* r1 = A[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -X * x; r0[7] = -X * y; r0[8] = X;
        r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -Y * x; r1[7] = -Y * y; r1[8] = Y;
    }
    for (int col = 0; col < 8; ++col) {
        int piv = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (A[piv][col] == 0.0) throw std::runtime_error("homography: singular system");
        if (piv != col)
            for (int c = 0; c < 9; ++c) std::swap(A[piv][c], A[col][c]);
        for (int r = 0; r < 8; ++r) {
            if (r == col) continue;
            double f = A[r][col] / A[col][col];
            for (int c = col; c < 9; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::array<double, 9> h;
    for (int i = 0; i < 8; ++i) h[i] = A[i][8] / A[i][i];
    h[8] = 1.0;
    return h;
}

struct BilinearTap {
    int x0, y0;
    double fx, fy;
    bool valid;
};

inline BilinearTap tap_at(const TransformRecord& rec, int ox, int oy) {
    double px = ox + 0.5 + rec.crop_x, py = oy + 0.5 + rec.crop_y;
    double X = rec.H[0] * px + rec.H[1] * py + rec.H[2];
    double Y = rec.H[3] * px + rec.H[4] * py + rec.H[5];
    double W = rec.H[6] * px + rec.H[7] * py + rec.H[8];
    BilinearTap t{};
    if (W == 0.0) { t.valid = false; return t; }
    double sx = X / W - 0.5, sy = Y / W - 0.5; // back to sample space
    t.x0 = static_cast<int>(std::floor(sx));
    t.y0 = static_cast<int>(std::floor(sy));
    t.fx = sx - t.x0;
    t.fy = sy - t.y0;
    t.valid = true;
    return t;
}

} // namespace detail

// Bilinear resampling through the recorded homography + crop; zero fill
// outside the input.
inline Image apply_transform(const Image& img, const TransformRecord& rec) {
    Image out(rec.out_h, rec.out_w, img.c);
    for (int y = 0; y < rec.out_h; ++y)
        for (int x = 0; x < rec.out_w; ++x) {
            detail::BilinearTap t = detail::tap_at(rec, x, y);
            if (!t.valid) continue;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    int sx = t.x0 + dx, sy = t.y0 + dy;
                    if (sx < 0 || sx >= img.w || sy < 0 || sy >= img.h) continue;
                    double w = (dx ? t.fx : 1.0 - t.fx) * (dy ? t.fy : 1.0 - t.fy);
                    for (int c = 0; c < img.c; ++c) out.at(y, x, c) += w * img.at(sy, sx, c);
                }
        }
    return out;
}

// Exact transpose of apply_transform: scatter output-pixel gradients back
// through the same bilinear weights.
inline Image transform_backward(const TransformRecord& rec, const Image& g_out) {
    if (g_out.h != rec.out_h || g_out.w != rec.out_w)
        throw std::invalid_argument("transform_backward: gradient shape mismatch");
    Image g_in(rec.in_h, rec.in_w, g_out.c);
    for (int y = 0; y < rec.out_h; ++y)
        for (int x = 0; x < rec.out_w; ++x) {
            detail::BilinearTap t = detail::tap_at(rec, x, y);
            if (!t.valid) continue;
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    int sx = t.x0 + dx, sy = t.y0 + dy;
                    if (sx < 0 || sx >= rec.in_w || sy < 0 || sy >= rec.in_h) continue;
                    double w = (dx ? t.fx : 1.0 - t.fx) * (dy ? t.fy : 1.0 - t.fy);
                    for (int c = 0; c < g_out.c; ++c) g_in.at(sy, sx, c) += w * g_out.at(y, x, c);
                }
        }
    return g_in;
}

struct AugmentResult {
    Image image;
    TransformRecord record;
};

inline AugmentResult augment(const Image& image, const AugmentSpec& spec, Rng& rng) {
    TransformRecord rec;
    rec.in_h = image.h;
    rec.in_w = image.w;
    int crop = spec.crop_for(std::min(image.h, image.w));
    if (crop > image.h || crop > image.w)
        throw std::invalid_argument("augment: crop larger than the image");
    rec.out_h = rec.out_w = crop;

    double u = rng.uniform();
    if (u < spec.perspective_prob) {
        rec.perspective = true;
        double w = image.w, h = image.h;
        double fx = spec.distortion * (w - 1) / 2.0, fy = spec.distortion * (h - 1) / 2.0;
        std::array<Vec2, 4> corners{Vec2{0, 0}, Vec2{w, 0}, Vec2{w, h}, Vec2{0, h}};
        std::array<Vec2, 4> inner;
        // inward displacement per corner, torchvision-style
        double sign_x[4] = {1, -1, -1, 1}, sign_y[4] = {1, 1, -1, -1};
        for (int i = 0; i < 4; ++i) {
            double dx = rng.uniform(0.0, fx), dy = rng.uniform(0.0, fy);
            inner[i] = {corners[i].x + sign_x[i] * dx, corners[i].y + sign_y[i] * dy};
        }
        // content shrinks into the inner quad; output pixels beyond it sample
        // outside the input and fill with zero
        rec.H = detail::homography(inner, corners);
    }
    if (crop < image.w) rec.crop_x = rng.uniform_int(0, image.w - crop);
    if (crop < image.h) rec.crop_y = rng.uniform_int(0, image.h - crop);
    return {apply_transform(image, rec), rec};
}

enum class SdsWeighting { One, SigmaOverAlpha, Zero };

struct SdsConfig {
    NoiseSchedule sched = make_schedule(kDefaultTimesteps, ScheduleKind::Cosine);
    int t_min = 50;
    int t_max = 950;
    double omega = kDefaultGuidance;
    SdsWeighting weighting = SdsWeighting::One;
    int steps = 2000;
    bool augment_enabled = false;
    AugmentSpec augment;
    bool latent = false;
    int encoder_factor = 8;
    double lambda_xing = 0.01;

    double weight_at(int t) const {
        switch (weighting) {
            case SdsWeighting::One: return 1.0;
            case SdsWeighting::SigmaOverAlpha: return sched.sigma[t] / sched.alpha[t];
            case SdsWeighting::Zero: return 0.0;
        }
        return 1.0;
    }
};

// Non-overlapping f x f patch averaging per channel; the exact transpose is
// available for the gradient chain.
struct AnalyticEncoder {
    int factor = 8;

    Image encode(const Image& img) const {
        if (img.h % factor != 0 || img.w % factor != 0)
            throw std::invalid_argument("AnalyticEncoder: dims not divisible by factor");
        Image z(img.h / factor, img.w / factor, img.c);
        double inv = 1.0 / (static_cast<double>(factor) * factor);
        for (int y = 0; y < z.h; ++y)
            for (int x = 0; x < z.w; ++x)
                for (int c = 0; c < img.c; ++c) {
                    double acc = 0.0;
                    for (int dy = 0; dy < factor; ++dy)
                        for (int dx = 0; dx < factor; ++dx)
                            acc += img.at(y * factor + dy, x * factor + dx, c);
                    z.at(y, x, c) = acc * inv;
                }
        return z;
    }

    Image encode_transpose(const Image& g_z) const {
        Image g(g_z.h * factor, g_z.w * factor, g_z.c);
        double inv = 1.0 / (static_cast<double>(factor) * factor);
        for (int y = 0; y < g_z.h; ++y)
            for (int x = 0; x < g_z.w; ++x)
                for (int c = 0; c < g_z.c; ++c) {
                    double v = g_z.at(y, x, c) * inv;
                    for (int dy = 0; dy < factor; ++dy)
                        for (int dx = 0; dx < factor; ++dx)
                            g.at(y * factor + dy, x * factor + dx, c) = v;
                }
        return g;
    }
};

// Score distillation gradient with respect to image pixels: draw
// t ~ U(t_min, t_max) and eps ~ N(0,1), return w(t) * (eps_hat - eps). No
// gradient flows through the denoiser internals. Draw order is part of the
// contract: one uniform_int for t, then one normal per element in storage
// order.
inline Image sds_grad(const Denoiser& denoiser, const Image& image, std::optional<int> cond,
                      const SdsConfig& cfg, Rng& rng) {
    if (cfg.t_min < 1 || cfg.t_max > cfg.sched.T || cfg.t_min > cfg.t_max)
        throw std::invalid_argument("sds_grad: need 1 <= t_min <= t_max <= T");
    int t = rng.uniform_int(cfg.t_min, cfg.t_max);
    Image eps(image.h, image.w, image.c);
    for (auto& v : eps.data) v = rng.normal();
    Image x_t = q_sample(image, t, eps, cfg.sched);
    Image pred = vgd::cfg(denoiser, x_t, t, cond, cfg.omega);
    double w = cfg.weight_at(t);
    Image g(image.h, image.w, image.c);
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] = w * (pred.data[i] - eps.data[i]);
    return g;
}

// Latent-space variant: encode, take the SDS gradient at latent resolution,
// and chain back through the encoder transpose.
inline Image latent_sds_grad(const Denoiser& denoiser, const Image& image, std::optional<int> cond,
                             const AnalyticEncoder& encoder, const SdsConfig& cfg, Rng& rng) {
    Image z = encoder.encode(image);
    Image g_z = sds_grad(denoiser, z, cond, cfg, rng);
    return encoder.encode_transpose(g_z);
}

struct TraceRow {
    int step = 0;
    double sds_proxy_norm = 0.0;
    double xing_value = 0.0;
    double elapsed_ms = 0.0;
    std::vector<int> reinit_indices;
};

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::string out = "step,sds_proxy_norm,xing,elapsed_ms,reinit_indices\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.3f,", r.step, r.sds_proxy_norm,
                      r.xing_value, r.elapsed_ms);
        out += buf;
        for (std::size_t i = 0; i < r.reinit_indices.size(); ++i) {
            if (i) out += ';';
            out += std::to_string(r.reinit_indices[i]);
        }
        out += '\n';
    }
    return out;
}

struct DistillResult {
    Scene scene;
    std::vector<TraceRow> trace;
};

// Optional extra pixel-space objective (e.g. the pixel-art saturation
// penalty); receives the raw render and returns (value, d_pixels scaled by
// its weight).
using ExtraPixelLoss = std::function<LossValue(const Raster&)>;

// Optional periodic raster snapshots during distillation.
struct SnapshotHook {
    int every = 0; // 0 disables
    std::function<void(int step, const Raster&)> fn;
};

// Rebuilds Adam moments after a reinit sweep: survivors carry their moment
// blocks to their new positions, replaced paths restart from zero, and the
// trailing background block is preserved.
inline AdamState remap_adam_after_sweep(const AdamState& adam, const ParamLayout& old_layout,
                                        const ParamLayout& new_layout, const SweepResult& sw) {
    AdamState fresh(new_layout.total);
    fresh.beta1 = adam.beta1;
    fresh.beta2 = adam.beta2;
    fresh.eps = adam.eps;
    fresh.step = adam.step;
    for (std::size_t ni = 0; ni < sw.order.size(); ++ni) {
        int oi = sw.order[ni];
        if (std::find(sw.replaced.begin(), sw.replaced.end(), oi) != sw.replaced.end()) continue;
        const auto& ob = old_layout.blocks[oi];
        const auto& nb = new_layout.blocks[ni];
        for (std::size_t k = 0; k < std::min(ob.count, nb.count); ++k) {
            fresh.m[nb.offset + k] = adam.m[ob.offset + k];
            fresh.v[nb.offset + k] = adam.v[ob.offset + k];
        }
    }
    for (std::size_t k = 1; k <= 3; ++k) {
        fresh.m[new_layout.total - k] = adam.m[old_layout.total - k];
        fresh.v[new_layout.total - k] = adam.v[old_layout.total - k];
    }
    return fresh;
}

// SDS optimization loop: render -> augment -> (latent) sds_grad -> chain back
// through augment and the rasterizer -> add xing gradients -> Adam step with
// grouped learning rates -> clamp colors -> periodic path reinitialization.
// Deterministic given the seed.
inline DistillResult distill(Scene scene, const Denoiser& denoiser, std::optional<int> cond,
                             const SdsConfig& sds_cfg, const RenderConfig& render_cfg,
                             const LrSchedule& lr, std::optional<ReinitConfig> reinit_cfg,
                             std::uint64_t seed, const ExtraPixelLoss& extra = nullptr,
                             const SnapshotHook& snapshot = {}) {
    DistillResult out;
    Rng rng(seed);
    AnalyticEncoder encoder{sds_cfg.encoder_factor};
    ParamLayout layout = ParamLayout::of(scene);
    std::vector<double> params = layout.gather(scene);
    AdamState adam(layout.total);

    auto t_start = std::chrono::steady_clock::now();
    for (int step = 0; step < sds_cfg.steps; ++step) {
        RenderResult rr = render_forward(scene, render_cfg);
        if (snapshot.every > 0 && snapshot.fn && step % snapshot.every == 0)
            snapshot.fn(step, rr.raster);

        Image aug = rr.raster;
        TransformRecord rec;
        bool augmented = false;
        if (sds_cfg.augment_enabled) {
            AugmentResult ar = augment(rr.raster, sds_cfg.augment, rng);
            aug = std::move(ar.image);
            rec = ar.record;
            augmented = true;
        }

        Image g_aug = sds_cfg.latent ? latent_sds_grad(denoiser, aug, cond, encoder, sds_cfg, rng)
                                     : sds_grad(denoiser, aug, cond, sds_cfg, rng);
        double proxy_norm = l2_norm(g_aug);

        Image g_pixels = augmented ? transform_backward(rec, g_aug) : std::move(g_aug);
        if (extra) {
            LossValue ex = extra(rr.raster);
            if (ex.d_pixels)
                for (std::size_t i = 0; i < g_pixels.data.size(); ++i)
                    g_pixels.data[i] += ex.d_pixels->data[i];
        }

        SceneGrad grad = render_backward(scene, render_cfg, g_pixels, rr.cache);
        LossValue xl = xing(scene);
        if (sds_cfg.lambda_xing != 0.0) add_scaled(grad, *xl.d_geometry, sds_cfg.lambda_xing);

        std::vector<double> g = layout.flatten(grad);
        adam_step(adam, params, g, rates_for(lr, layout, step, sds_cfg.steps));
        layout.scatter(scene, params);
        clamp_colors(scene);
        params = layout.gather(scene);

        TraceRow row;
        row.step = step;
        row.sds_proxy_norm = proxy_norm;
        row.xing_value = xl.value;

        if (reinit_cfg.has_value()) {
            SweepResult sw = sweep(scene, *reinit_cfg, step, sds_cfg.steps, rng);
            if (!sw.replaced.empty()) {
                ParamLayout new_layout = ParamLayout::of(scene);
                adam = remap_adam_after_sweep(adam, layout, new_layout, sw);
                layout = new_layout;
                params = layout.gather(scene);
                row.reinit_indices = sw.replaced;
            }
        }

        for (double v : params)
            if (std::isnan(v)) throw std::runtime_error("distill: NaN parameter at step " +
                                                        std::to_string(step));
        row.elapsed_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
                .count();
        out.trace.push_back(std::move(row));
    }
    out.scene = std::move(scene);
    return out;
}

} // namespace vgd
