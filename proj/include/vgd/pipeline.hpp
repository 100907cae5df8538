#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgd/diffusion.hpp"
#include "vgd/live.hpp"
#include "vgd/losses.hpp"
#include "vgd/optimizer.hpp"
#include "vgd/reinit.hpp"
#include "vgd/sds.hpp"

namespace vgd {

// Prompt suffixes, stored verbatim; toy priors are label-conditioned so the
// suffix travels with the condition label mapping.
inline constexpr const char* kIconPromptSuffix =
    "minimal flat 2d vector icon. lineal color. on a white background. trending on artstation";
inline constexpr const char* kPixelPromptSuffix = "pixel art. trending on artstation";
inline constexpr const char* kSketchPromptSuffix = "minimal 2d line drawing. trending on artstation.";

enum class Style { Iconography, PixelArt, Sketch };
enum class RunMode { FromScratch, SampleInit };

struct StyleConfig {
    Style style = Style::Iconography;
    int path_count = 64;
    int segments_per_path = 4;
    int pixel_grid = 32;
    double stroke_width = 6.0;
    int render_res = 128;
    std::string prompt_suffix = kIconPromptSuffix;

    static StyleConfig iconography() { return {}; }
    static StyleConfig pixel_art() {
        StyleConfig c;
        c.style = Style::PixelArt;
        c.prompt_suffix = kPixelPromptSuffix;
        return c;
    }
    static StyleConfig sketch() {
        StyleConfig c;
        c.style = Style::Sketch;
        c.path_count = 16;
        c.segments_per_path = 5;
        c.prompt_suffix = kSketchPromptSuffix;
        return c;
    }
};

// --------------------------------------------------------------------------
// Rejection reranking and retrieval metrics over externally produced score
// tables (CLIP itself is out of scope; scores arrive as files).
// --------------------------------------------------------------------------

inline std::size_t rerank(const std::vector<Image>& candidates, const std::vector<double>& scores) {
    if (candidates.empty()) throw std::invalid_argument("rerank: empty candidate list");
    if (candidates.size() != scores.size())
        throw std::invalid_argument("rerank: candidate/score length mismatch");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i; // ties keep the lowest index
    return best;
}

struct ScoreTable {
    std::vector<std::string> captions; // column ids
    std::vector<std::string> items;    // row ids
    std::vector<std::vector<double>> scores;
    std::string provenance;

    std::size_t rows() const { return scores.size(); }
    std::size_t cols() const { return scores.empty() ? 0 : scores[0].size(); }
};

inline ScoreTable parse_score_csv(const std::string& text) {
    ScoreTable t;
    std::istringstream in(text);
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string meta = line.substr(1);
            std::size_t at = meta.find("provenance:");
            if (at != std::string::npos) {
                std::string v = meta.substr(at + 11);
                while (!v.empty() && v.front() == ' ') v.erase(v.begin());
                t.provenance = v;
            }
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!header_done) {
            if (cells.size() < 2) throw std::runtime_error("score csv: header needs caption ids");
            t.captions.assign(cells.begin() + 1, cells.end());
            header_done = true;
            continue;
        }
        if (cells.size() != t.captions.size() + 1)
            throw std::runtime_error("score csv: ragged row '" + line + "'");
        t.items.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            double v = 0;
            try {
                v = std::stod(cells[i]);
            } catch (...) {
                throw std::runtime_error("score csv: bad number '" + cells[i] + "'");
            }
            if (!std::isfinite(v)) throw std::runtime_error("score csv: non-finite score");
            row.push_back(v);
        }
        t.scores.push_back(std::move(row));
    }
    if (!header_done) throw std::runtime_error("score csv: missing header");
    return t;
}

inline std::string score_csv(const ScoreTable& t) {
    std::string out;
    if (!t.provenance.empty()) out += "# provenance: " + t.provenance + "\n";
    out += "item";
    for (const auto& c : t.captions) out += "," + c;
    out += "\n";
    char buf[64];
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out += r < t.items.size() ? t.items[r] : ("item_" + std::to_string(r));
        for (double v : t.scores[r]) {
            std::snprintf(buf, sizeof(buf), ",%.9g", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

// Fraction of rows whose diagonal entry is the strict unique maximum; ties
// count as failures.
inline double r_precision(const ScoreTable& t) {
    if (t.rows() != t.cols()) throw std::invalid_argument("r_precision: square score table required");
    if (t.rows() == 0) throw std::invalid_argument("r_precision: empty score table");
    int good = 0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        bool strict = true;
        for (std::size_t c = 0; c < t.cols(); ++c)
            if (c != r && t.scores[r][c] >= t.scores[r][r]) {
                strict = false;
                break;
            }
        if (strict) ++good;
    }
    return static_cast<double>(good) / t.rows();
}

inline double mean_similarity(const ScoreTable& t) {
    if (t.rows() != t.cols()) throw std::invalid_argument("mean_similarity: square score table required");
    if (t.rows() == 0) throw std::invalid_argument("mean_similarity: empty score table");
    double acc = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) acc += t.scores[r][r];
    return acc / t.rows();
}

inline std::vector<std::string> load_prompts(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open prompt list: " + path);
    std::vector<std::string> prompts;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) prompts.push_back(line);
    }
    return prompts;
}

// --------------------------------------------------------------------------
// Pixel-art closed-form fit: per-cell median (L1) or mean (L2), the exact
// minimizers, no iterative optimization.
// --------------------------------------------------------------------------

enum class FitNorm { L1, L2 };

inline Scene pixel_fit(const Raster& target, int grid, FitNorm norm) {
    if (grid < 1) throw std::invalid_argument("pixel_fit: grid >= 1 required");
    if (target.w % grid != 0 || target.h % grid != 0)
        throw std::invalid_argument("pixel_fit: target dims must be divisible by the grid");
    int cell_w = target.w / grid, cell_h = target.h / grid;
    Scene scene;
    scene.width = target.w;
    scene.height = target.h;
    scene.background = {1, 1, 1, 1};
    std::vector<double> vals;
    for (int gy = 0; gy < grid; ++gy)
        for (int gx = 0; gx < grid; ++gx) {
            Color col{0, 0, 0, 1};
            for (int c = 0; c < 3; ++c) {
                vals.clear();
                for (int y = gy * cell_h; y < (gy + 1) * cell_h; ++y)
                    for (int x = gx * cell_w; x < (gx + 1) * cell_w; ++x)
                        vals.push_back(target.at(y, x, c));
                double v;
                if (norm == FitNorm::L2) {
                    double acc = 0;
                    for (double t : vals) acc += t;
                    v = acc / vals.size();
                } else {
                    std::sort(vals.begin(), vals.end());
                    std::size_t n = vals.size();
                    v = n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
                }
                if (c == 0) col.r = v;
                if (c == 1) col.g = v;
                if (c == 2) col.b = v;
            }
            scene.paths.push_back(square_path({static_cast<double>(gx * cell_w),
                                               static_cast<double>(gy * cell_h)},
                                              cell_w, col, gy * grid + gx));
        }
    return scene;
}

// --------------------------------------------------------------------------
// Style-aware end-to-end drivers.
// --------------------------------------------------------------------------

struct RunOptions {
    SdsConfig sds;                      // steps, guidance, t-range, weighting, latent
    std::optional<bool> augment;        // default: on for from-scratch runs only
    std::optional<ReinitConfig> reinit; // default: style/mode-appropriate
    int k_rejection = 4;
    std::vector<double> scores;         // external similarity scores for reranking
    int live_iters_per_stage = 500;
    std::uint64_t seed = 0;
    double saturation_weight = 0.05;
    RenderConfig render;
    SnapshotHook snapshots;
};

struct RunResult {
    Scene scene;
    std::vector<TraceRow> trace;
    int picked = -1; // reranked sample index, SampleInit only
};

namespace detail {

inline Scene init_iconography(const StyleConfig& cfg, Rng& rng) {
    Scene s;
    s.width = s.height = cfg.render_res;
    s.background = {1, 1, 1, 1};
    double radius = live_init_radius(cfg.render_res);
    for (int i = 0; i < cfg.path_count; ++i) {
        Vec2 c{rng.uniform(0.0, static_cast<double>(s.width)),
               rng.uniform(0.0, static_cast<double>(s.height))};
        Color fill{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(0.7, 1.0)};
        s.paths.push_back(circle_path(c, radius, fill, i));
    }
    return s;
}

inline Scene init_pixel_grid(const StyleConfig& cfg, Rng& rng) {
    if (cfg.render_res % cfg.pixel_grid != 0)
        throw std::invalid_argument("pixel grid must divide the render resolution");
    Scene s;
    s.width = s.height = cfg.render_res;
    s.background = {1, 1, 1, 1};
    int cell = cfg.render_res / cfg.pixel_grid;
    for (int gy = 0; gy < cfg.pixel_grid; ++gy)
        for (int gx = 0; gx < cfg.pixel_grid; ++gx) {
            Color fill{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(0.7, 1.0)};
            s.paths.push_back(square_path({static_cast<double>(gx * cell),
                                           static_cast<double>(gy * cell)},
                                          cell, fill, gy * cfg.pixel_grid + gx));
        }
    return s;
}

inline Scene init_sketch(const StyleConfig& cfg, Rng& rng) {
    Scene s;
    s.width = s.height = cfg.render_res;
    s.background = {1, 1, 1, 1};
    double spread = 0.08 * cfg.render_res;
    for (int i = 0; i < cfg.path_count; ++i) {
        VectorPath p;
        p.kind = PathKind::OpenStroked;
        p.stroke = {0, 0, 0, 1};
        p.stroke_width = cfg.stroke_width;
        p.z_index = i;
        Vec2 cur{rng.uniform(0.15, 0.85) * s.width, rng.uniform(0.15, 0.85) * s.height};
        int npts = 3 * cfg.segments_per_path + 1;
        for (int j = 0; j < npts; ++j) {
            p.points.push_back(cur);
            cur = cur + Vec2{rng.uniform(-spread, spread), rng.uniform(-spread, spread)};
        }
        s.paths.push_back(std::move(p));
    }
    return s;
}

inline void check_prior_shape(const Denoiser& prior, const SdsConfig& sds, int render_res) {
    ImageShape sh = prior.shape();
    int expect = sds.augment_enabled ? sds.augment.crop_for(render_res) : render_res;
    if (sds.latent) expect /= sds.encoder_factor;
    if (sh.h != expect || sh.w != expect || sh.c != 3)
        throw std::invalid_argument("prior shape " + std::to_string(sh.h) + "x" + std::to_string(sh.w) +
                                    "x" + std::to_string(sh.c) +
                                    " does not match the optimization chain (expected " +
                                    std::to_string(expect) + "x" + std::to_string(expect) + "x3)");
}

} // namespace detail

// FromScratch: random init per style, then SDS distillation. SampleInit:
// diffusion sample -> rerank over K -> LIVE vectorization (iconography) or
// closed-form L1 pixelation (pixel art) -> SDS finetune. Sketches are always
// trained from scratch.
inline RunResult run_style(const StyleConfig& cfg, const Denoiser& prior, std::optional<int> cond,
                           RunMode mode, const RunOptions& opts_in) {
    RunOptions opts = opts_in;
    if (cfg.style == Style::Sketch && mode == RunMode::SampleInit)
        throw std::invalid_argument("run_style: sketches are always trained from scratch");
    opts.render.width = opts.render.height = cfg.render_res;

    SdsConfig sds = opts.sds;
    sds.augment_enabled = opts.augment.value_or(mode == RunMode::FromScratch &&
                                                cfg.style == Style::Iconography);
    detail::check_prior_shape(prior, sds, cfg.render_res);

    Rng rng(opts.seed);
    RunResult out;
    Scene scene;

    if (mode == RunMode::FromScratch) {
        switch (cfg.style) {
            case Style::Iconography: scene = detail::init_iconography(cfg, rng); break;
            case Style::PixelArt: scene = detail::init_pixel_grid(cfg, rng); break;
            case Style::Sketch: scene = detail::init_sketch(cfg, rng); break;
        }
    } else {
        // sample K candidates and keep the highest-scoring one
        std::vector<Image> candidates;
        for (int i = 0; i < opts.k_rejection; ++i)
            candidates.push_back(sample(prior, cond, std::min(kDefaultSampleSteps, sds.sched.T),
                                        sds.omega, sds.sched, opts.seed + 1000 + i));
        if (!opts.scores.empty()) {
            out.picked = static_cast<int>(rerank(candidates, opts.scores));
        } else {
            out.picked = 0; // no external scores: keep the first candidate
        }
        Raster target = clamped01(candidates[out.picked]);

        if (cfg.style == Style::Iconography) {
            VectorizeOptions vo;
            vo.iters_per_stage = opts.live_iters_per_stage;
            vo.seed = opts.seed + 17;
            scene = vectorize(target, PathSchedule::for_paths(cfg.path_count), opts.render, vo);
        } else {
            scene = pixel_fit(target, cfg.pixel_grid, FitNorm::L1);
        }
    }

    std::optional<ReinitConfig> reinit = opts.reinit;
    if (!reinit.has_value()) {
        if (cfg.style == Style::Iconography)
            reinit = mode == RunMode::FromScratch ? ReinitConfig::from_scratch()
                                                  : ReinitConfig::live_init();
        // pixel grids and solid strokes never qualify; skip the sweep
    }

    LrSchedule lr = cfg.style == Style::PixelArt ? LrSchedule::pixel_art() : LrSchedule::iconography();
    ExtraPixelLoss extra;
    if (cfg.style == Style::PixelArt) {
        double w = opts.saturation_weight;
        extra = [w](const Raster& img) {
            LossValue lv = saturation_penalty(img);
            lv.value *= w;
            for (auto& g : lv.d_pixels->data) g *= w;
            return lv;
        };
    }

    DistillResult dr = distill(std::move(scene), prior, cond, sds, opts.render, lr, reinit,
                               opts.seed + 29, extra, opts.snapshots);
    out.scene = std::move(dr.scene);
    out.trace = std::move(dr.trace);
    return out;
}

} // namespace vgd
