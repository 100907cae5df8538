// vgd: text/image-to-vector-graphics distillation toolkit, command line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "vgd/pipeline.hpp"
#include "vgd/svg_io.hpp"
#include "vgd/tiny_denoiser.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// CLI11 config file reader accepting either INI-style key=value or a flat
// JSON object (nested objects map to subcommand options).
class MixedConfig : public CLI::ConfigINI {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::stringstream buf;
        buf << input.rdbuf();
        std::string text = buf.str();
        std::size_t first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{') {
            std::vector<CLI::ConfigItem> items;
            json j = json::parse(text);
            flatten(j, {}, items);
            return items;
        }
        std::stringstream again(text);
        return CLI::ConfigINI::from_config(again);
    }

private:
    static void flatten(const json& j, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.value().is_object()) {
                auto deeper = parents;
                deeper.push_back(it.key());
                flatten(it.value(), deeper, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (it.value().is_string())
                item.inputs = {it.value().get<std::string>()};
            else
                item.inputs = {it.value().dump()};
            items.push_back(std::move(item));
        }
    }
};

vgd::Image to_gray(const vgd::Raster& rgb) {
    vgd::Image out(rgb.h, rgb.w, 1);
    for (int y = 0; y < rgb.h; ++y)
        for (int x = 0; x < rgb.w; ++x)
            out.at(y, x, 0) = (rgb.at(y, x, 0) + rgb.at(y, x, 1) + rgb.at(y, x, 2)) / 3.0;
    return out;
}

vgd::Raster to_rgb(const vgd::Image& img) {
    if (img.c == 3) return img;
    vgd::Raster out(img.h, img.w, 3);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, x, 0);
    return out;
}

struct PriorHandle {
    std::unique_ptr<vgd::Denoiser> denoiser;
    vgd::NoiseSchedule sched;
};

// --prior accepts:
//   ckpt:<file>              trained denoiser checkpoint
//   gauss:<image>:<stdev>    single Gaussian centered at the image
//   gmm:<spec.json>          mixture prior specification
PriorHandle load_prior(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--prior", "expected ckpt:<file>, gauss:<image>:<stdev> or gmm:<json>");
    std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
    PriorHandle out;
    if (kind == "ckpt") {
        auto [net, sched] = vgd::TinyDenoiser::load(rest);
        out.sched = sched;
        out.denoiser = std::make_unique<vgd::TinyDenoiser>(std::move(net));
        return out;
    }
    if (kind == "gauss") {
        auto second = rest.rfind(':');
        if (second == std::string::npos)
            throw CLI::ValidationError("--prior", "gauss needs gauss:<image>:<stdev>");
        std::string img_path = rest.substr(0, second);
        double stdev = std::stod(rest.substr(second + 1));
        vgd::Raster mean = vgd::read_image(img_path);
        out.sched = vgd::make_schedule(vgd::kDefaultTimesteps, vgd::ScheduleKind::Cosine);
        auto prior = std::make_unique<vgd::GaussianMixturePrior>(
            out.sched, vgd::ImageShape{mean.h, mean.w, 3});
        prior->add_component(0, mean, stdev, 1.0);
        out.denoiser = std::move(prior);
        return out;
    }
    if (kind == "gmm") {
        std::ifstream f(rest);
        if (!f) throw CLI::ValidationError("--prior", "cannot open " + rest);
        json j = json::parse(f);
        int T = j.value("T", vgd::kDefaultTimesteps);
        vgd::ScheduleKind sk = vgd::schedule_kind_from_string(j.value("schedule", "cosine"));
        out.sched = vgd::make_schedule(T, sk);
        int h = j.at("shape").at("h"), w = j.at("shape").at("w"), c = j.at("shape").value("c", 3);
        auto prior = std::make_unique<vgd::GaussianMixturePrior>(out.sched, vgd::ImageShape{h, w, c});
        int label = 0;
        for (const auto& lbl : j.at("labels")) {
            for (const auto& comp : lbl.at("components")) {
                vgd::Image mean(h, w, c);
                if (comp.contains("image")) {
                    vgd::Raster img = vgd::read_image(comp.at("image").get<std::string>());
                    vgd::Image m = c == 1 ? to_gray(img) : img;
                    if (m.h != h || m.w != w)
                        throw CLI::ValidationError("--prior", "component image shape mismatch");
                    mean = m;
                } else if (comp.contains("constant")) {
                    auto rgb = comp.at("constant").get<std::vector<double>>();
                    for (int y = 0; y < h; ++y)
                        for (int x = 0; x < w; ++x)
                            for (int ch = 0; ch < c; ++ch)
                                mean.at(y, x, ch) = rgb[ch % rgb.size()];
                } else {
                    throw CLI::ValidationError("--prior", "component needs image or constant");
                }
                prior->add_component(label, std::move(mean), comp.value("stdev", 0.1),
                                     comp.value("weight", 1.0));
            }
            ++label;
        }
        prior->normalize_weights();
        out.denoiser = std::move(prior);
        return out;
    }
    throw CLI::ValidationError("--prior", "unknown prior kind: " + kind);
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

void write_trace(const std::string& path, const std::vector<vgd::TraceRow>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open trace file: " + path);
    f << vgd::trace_csv(rows);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vgd: vector graphics distillation toolkit"};
    app.set_config("--config", "", "INI key=value or JSON configuration file");
    app.config_formatter(std::make_shared<MixedConfig>());
    app.require_subcommand(1);

    // ---- render -----------------------------------------------------------
    auto* cmd_render = app.add_subcommand("render", "rasterize an SVG to a PPM/PNG image");
    std::string render_svg_path, render_out = "out.png";
    int render_res = 0;
    double render_tau = 0.8;
    int render_subdiv = 16;
    cmd_render->add_option("svg", render_svg_path, "input SVG file")->required();
    cmd_render->add_option("--out", render_out, "output image (.ppm or .png)");
    cmd_render->add_option("--res", render_res, "output resolution (default: document size)");
    cmd_render->add_option("--tau", render_tau, "coverage softness in canvas px");
    cmd_render->add_option("--subdiv", render_subdiv, "curve subdivision");

    // ---- vectorize --------------------------------------------------------
    auto* cmd_vec = app.add_subcommand("vectorize", "layer-wise vectorization of a raster image");
    std::string vec_image, vec_out = "out.svg", vec_schedule, vec_snapshots;
    int vec_paths = 64, vec_iters = 500;
    std::uint64_t vec_seed = 0;
    cmd_vec->add_option("image", vec_image, "target raster image")->required();
    cmd_vec->add_option("--paths", vec_paths, "total path count (16/64/128 use paper schedules)");
    cmd_vec->add_option("--schedule", vec_schedule, "explicit per-stage counts, e.g. 2,4,10");
    cmd_vec->add_option("--iters", vec_iters, "optimization iterations per stage");
    cmd_vec->add_option("--seed", vec_seed, "rng seed");
    cmd_vec->add_option("--out", vec_out, "output SVG");
    cmd_vec->add_option("--snapshots", vec_snapshots, "directory for per-stage SVG snapshots");

    // ---- distill ----------------------------------------------------------
    auto* cmd_distill = app.add_subcommand("distill", "optimize an SVG against a diffusion prior");
    std::string di_style = "icon", di_mode = "scratch", di_prior, di_out = "out.svg", di_trace,
                di_scores;
    int di_steps = 2000, di_cond = 0, di_res = 128, di_paths = -1, di_k = 4;
    std::uint64_t di_seed = 0;
    double di_guidance = vgd::kDefaultGuidance;
    int di_tmin = 50, di_tmax = 950;
    int di_augment = -1, di_latent = 0;
    cmd_distill->add_option("--style", di_style, "icon | pixel | sketch");
    cmd_distill->add_option("--mode", di_mode, "scratch | sample-init");
    cmd_distill->add_option("--prior", di_prior, "prior spec (ckpt:/gauss:/gmm:)")->required();
    cmd_distill->add_option("--cond", di_cond, "condition label index");
    cmd_distill->add_option("--steps", di_steps, "SDS steps");
    cmd_distill->add_option("--seed", di_seed, "rng seed");
    cmd_distill->add_option("--res", di_res, "render resolution");
    cmd_distill->add_option("--paths", di_paths, "path/stroke count (style default if unset)");
    cmd_distill->add_option("--k", di_k, "rejection-sampling candidate count");
    cmd_distill->add_option("--guidance", di_guidance, "classifier-free guidance scale");
    cmd_distill->add_option("--t-min", di_tmin, "min diffusion timestep");
    cmd_distill->add_option("--t-max", di_tmax, "max diffusion timestep");
    cmd_distill->add_option("--augment", di_augment, "1/0 force augmentation on/off");
    cmd_distill->add_option("--latent", di_latent, "run SDS through the factor-8 analytic encoder");
    cmd_distill->add_option("--scores", di_scores, "CSV with one row of similarity scores for reranking");
    cmd_distill->add_option("--out", di_out, "output SVG");
    cmd_distill->add_option("--trace", di_trace, "loss trace CSV");
    std::string di_snapshots;
    int di_snapshot_every = 100;
    cmd_distill->add_option("--snapshots", di_snapshots, "directory for periodic render snapshots");
    cmd_distill->add_option("--snapshot-every", di_snapshot_every, "snapshot interval in steps");

    // ---- sample -----------------------------------------------------------
    auto* cmd_sample = app.add_subcommand("sample", "DDIM-sample an image from a prior");
    std::string sa_prior, sa_out = "sample.png";
    int sa_steps = vgd::kDefaultSampleSteps, sa_cond = 0;
    double sa_guidance = vgd::kDefaultGuidance;
    std::uint64_t sa_seed = 0;
    cmd_sample->add_option("--prior", sa_prior, "prior spec (ckpt:/gauss:/gmm:)")->required();
    cmd_sample->add_option("--cond", sa_cond, "condition label index");
    cmd_sample->add_option("--steps", sa_steps, "DDIM steps");
    cmd_sample->add_option("--guidance", sa_guidance, "classifier-free guidance scale");
    cmd_sample->add_option("--seed", sa_seed, "rng seed");
    cmd_sample->add_option("--out", sa_out, "output image (.ppm or .png)");

    // ---- train-prior ------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train-prior", "train the tiny denoiser on a dataset");
    std::string tr_manifest, tr_out = "prior.ckpt";
    int tr_steps = 30000, tr_hidden = 128;
    double tr_lr = 3e-3, tr_dropout = 0.1;
    std::uint64_t tr_seed = 7;
    cmd_train->add_option("manifest", tr_manifest,
                          "JSON manifest: {h,w,c,T,schedule,items:[{image,label}]}")
        ->required();
    cmd_train->add_option("--out", tr_out, "checkpoint path");
    cmd_train->add_option("--steps", tr_steps, "training steps");
    cmd_train->add_option("--hidden", tr_hidden, "hidden width");
    cmd_train->add_option("--lr", tr_lr, "Adam learning rate");
    cmd_train->add_option("--label-dropout", tr_dropout, "CFG label dropout probability");
    cmd_train->add_option("--seed", tr_seed, "rng seed");

    // ---- pixel-fit --------------------------------------------------------
    auto* cmd_pix = app.add_subcommand("pixel-fit", "closed-form pixel-art fit of an image");
    std::string px_image, px_out = "out.svg", px_norm = "l1";
    int px_grid = 32;
    cmd_pix->add_option("image", px_image, "target raster image")->required();
    cmd_pix->add_option("--grid", px_grid, "grid size");
    cmd_pix->add_option("--norm", px_norm, "l1 | l2");
    cmd_pix->add_option("--out", px_out, "output SVG");

    // ---- eval -------------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("eval", "retrieval metrics over a score table");
    std::string ev_scores;
    cmd_eval->add_option("--scores", ev_scores, "score table CSV")->required();

    // ---- sweep ------------------------------------------------------------
    auto* cmd_sweep = app.add_subcommand("sweep", "run a prompt list through the pipeline");
    std::string sw_prompts, sw_prior, sw_style = "icon", sw_mode = "scratch", sw_outdir = "sweep_out";
    std::string sw_seeds = "0";
    int sw_steps = 500, sw_k = 4, sw_res = 64, sw_paths = -1;
    cmd_sweep->add_option("--prompts", sw_prompts, "prompt list, one per line")->required();
    cmd_sweep->add_option("--prior", sw_prior, "prior spec (ckpt:/gauss:/gmm:)")->required();
    cmd_sweep->add_option("--style", sw_style, "icon | pixel | sketch");
    cmd_sweep->add_option("--mode", sw_mode, "scratch | sample-init");
    cmd_sweep->add_option("--k", sw_k, "rejection-sampling candidate count");
    cmd_sweep->add_option("--steps", sw_steps, "SDS steps per job");
    cmd_sweep->add_option("--res", sw_res, "render resolution");
    cmd_sweep->add_option("--paths", sw_paths, "path count (style default if unset)");
    cmd_sweep->add_option("--seeds", sw_seeds, "comma-separated seeds");
    cmd_sweep->add_option("--outdir", sw_outdir, "output directory");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_render) {
            vgd::Scene scene = vgd::read_svg(render_svg_path);
            vgd::RenderConfig rc;
            rc.tau = render_tau;
            rc.subdiv = render_subdiv;
            if (render_res > 0) rc.width = rc.height = render_res;
            vgd::write_image(render_out, vgd::render(scene, rc));
            std::cout << "rendered " << render_svg_path << " -> " << render_out << "\n";
        } else if (*cmd_vec) {
            vgd::Raster target = vgd::read_image(vec_image);
            vgd::PathSchedule sched = vec_schedule.empty()
                                          ? vgd::PathSchedule::for_paths(vec_paths)
                                          : vgd::PathSchedule{parse_int_list(vec_schedule)};
            vgd::RenderConfig rc;
            rc.cutoff = 14.0;
            vgd::VectorizeOptions opt;
            opt.iters_per_stage = vec_iters;
            opt.seed = vec_seed;
            if (!vec_snapshots.empty()) {
                fs::create_directories(vec_snapshots);
                opt.stage_snapshot = [&](int stage, const vgd::Scene& s) {
                    vgd::write_svg(vec_snapshots + "/stage_" + std::to_string(stage) + ".svg", s);
                };
            }
            vgd::Scene scene = vgd::vectorize(target, sched, rc, opt);
            vgd::write_svg(vec_out, scene);
            double err = vgd::l2(vgd::render(scene, rc), target).value;
            std::cout << "vectorized " << vec_image << " -> " << vec_out << " (" << scene.paths.size()
                      << " paths, l2 " << err << ")\n";
        } else if (*cmd_distill) {
            PriorHandle prior = load_prior(di_prior);
            vgd::StyleConfig cfg;
            if (di_style == "icon")
                cfg = vgd::StyleConfig::iconography();
            else if (di_style == "pixel")
                cfg = vgd::StyleConfig::pixel_art();
            else if (di_style == "sketch")
                cfg = vgd::StyleConfig::sketch();
            else
                throw CLI::ValidationError("--style", "want icon|pixel|sketch");
            cfg.render_res = di_res;
            if (di_paths > 0) {
                cfg.path_count = di_paths;
                if (cfg.style == vgd::Style::PixelArt) cfg.pixel_grid = di_paths;
            }
            vgd::RunMode mode;
            if (di_mode == "scratch")
                mode = vgd::RunMode::FromScratch;
            else if (di_mode == "sample-init")
                mode = vgd::RunMode::SampleInit;
            else
                throw CLI::ValidationError("--mode", "want scratch|sample-init");

            vgd::RunOptions opts;
            opts.sds.sched = prior.sched;
            opts.sds.steps = di_steps;
            opts.sds.omega = di_guidance;
            opts.sds.t_min = std::min(di_tmin, prior.sched.T);
            opts.sds.t_max = std::min(di_tmax, prior.sched.T);
            opts.sds.latent = di_latent != 0;
            opts.seed = di_seed;
            opts.k_rejection = di_k;
            opts.render.cutoff = 14.0;
            if (di_augment >= 0) opts.augment = di_augment != 0;
            if (!di_scores.empty()) {
                std::ifstream f(di_scores);
                if (!f) throw std::runtime_error("cannot open scores: " + di_scores);
                std::stringstream ss;
                ss << f.rdbuf();
                vgd::ScoreTable t = vgd::parse_score_csv(ss.str());
                if (t.rows() != 1) throw std::runtime_error("--scores expects exactly one row");
                opts.scores = t.scores[0];
            }
            if (!di_snapshots.empty()) {
                fs::create_directories(di_snapshots);
                opts.snapshots.every = di_snapshot_every;
                opts.snapshots.fn = [&](int step, const vgd::Raster& img) {
                    char name[64];
                    std::snprintf(name, sizeof(name), "/step_%05d.ppm", step);
                    vgd::write_image(di_snapshots + name, img);
                };
            }
            vgd::RunResult res = vgd::run_style(cfg, *prior.denoiser, di_cond, mode, opts);
            vgd::write_svg(di_out, res.scene);
            if (!di_trace.empty()) write_trace(di_trace, res.trace);
            std::cout << "distilled -> " << di_out;
            if (res.picked >= 0) std::cout << " (picked sample " << res.picked << ")";
            std::cout << "\n";
        } else if (*cmd_sample) {
            PriorHandle prior = load_prior(sa_prior);
            vgd::Image img = vgd::sample(*prior.denoiser, sa_cond,
                                         std::min(sa_steps, prior.sched.T), sa_guidance,
                                         prior.sched, sa_seed);
            vgd::write_image(sa_out, vgd::clamped01(to_rgb(img)));
            std::cout << "sampled -> " << sa_out << "\n";
        } else if (*cmd_train) {
            std::ifstream f(tr_manifest);
            if (!f) throw std::runtime_error("cannot open manifest: " + tr_manifest);
            json j = json::parse(f);
            int h = j.at("h"), w = j.at("w"), c = j.value("c", 3);
            int T = j.value("T", 100);
            vgd::NoiseSchedule sched =
                vgd::make_schedule(T, vgd::schedule_kind_from_string(j.value("schedule", "cosine")));
            fs::path base = fs::path(tr_manifest).parent_path();
            std::vector<vgd::TinyDenoiser::LabeledImage> ds;
            int max_label = 0;
            for (const auto& item : j.at("items")) {
                std::string rel = item.at("image").get<std::string>();
                fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
                vgd::Raster img = vgd::read_image(p.string());
                vgd::Image data = c == 1 ? to_gray(img) : img;
                if (data.h != h || data.w != w)
                    throw std::runtime_error("manifest image shape mismatch: " + rel);
                // kept in [0,1]: the whole distillation chain works on raw
                // raster values, so the prior must too
                int label = item.value("label", 0);
                max_label = std::max(max_label, label);
                ds.push_back({std::move(data), label});
            }
            vgd::TinyDenoiser net({h, w, c}, max_label + 1, T, tr_hidden, tr_seed);
            auto [head, tail] = net.train_ddpm(
                ds, sched, {.steps = tr_steps, .lr = tr_lr, .label_dropout = tr_dropout, .seed = tr_seed});
            net.save(tr_out, sched);
            std::cout << "trained " << net.param_count() << " params on " << ds.size()
                      << " images; loss " << head << " -> " << tail << "; saved " << tr_out << "\n";
        } else if (*cmd_pix) {
            vgd::Raster target = vgd::read_image(px_image);
            vgd::FitNorm norm;
            if (px_norm == "l1")
                norm = vgd::FitNorm::L1;
            else if (px_norm == "l2")
                norm = vgd::FitNorm::L2;
            else
                throw CLI::ValidationError("--norm", "want l1|l2");
            vgd::Scene scene = vgd::pixel_fit(target, px_grid, norm);
            vgd::write_svg(px_out, scene);
            std::cout << "pixel-fit " << px_image << " -> " << px_out << " (" << px_grid << "x"
                      << px_grid << ")\n";
        } else if (*cmd_eval) {
            std::ifstream f(ev_scores);
            if (!f) throw std::runtime_error("cannot open scores: " + ev_scores);
            std::stringstream ss;
            ss << f.rdbuf();
            vgd::ScoreTable t = vgd::parse_score_csv(ss.str());
            std::cout << "rows: " << t.rows() << "\n";
            if (!t.provenance.empty()) std::cout << "provenance: " << t.provenance << "\n";
            std::cout << "r_precision: " << vgd::r_precision(t) << "\n";
            std::cout << "mean_similarity: " << vgd::mean_similarity(t) << "\n";
        } else if (*cmd_sweep) {
            PriorHandle prior = load_prior(sw_prior);
            auto prompts = vgd::load_prompts(sw_prompts);
            auto seeds = parse_int_list(sw_seeds);
            fs::create_directories(sw_outdir);
            vgd::StyleConfig cfg;
            if (sw_style == "icon")
                cfg = vgd::StyleConfig::iconography();
            else if (sw_style == "pixel")
                cfg = vgd::StyleConfig::pixel_art();
            else if (sw_style == "sketch")
                cfg = vgd::StyleConfig::sketch();
            else
                throw CLI::ValidationError("--style", "want icon|pixel|sketch");
            cfg.render_res = sw_res;
            if (sw_paths > 0) {
                cfg.path_count = sw_paths;
                if (cfg.style == vgd::Style::PixelArt) cfg.pixel_grid = sw_paths;
            }
            vgd::RunMode mode = sw_mode == "sample-init" ? vgd::RunMode::SampleInit
                                                         : vgd::RunMode::FromScratch;
            int labels = 1;
            if (auto* gmm = dynamic_cast<vgd::GaussianMixturePrior*>(prior.denoiser.get()))
                labels = gmm->label_count();
            else if (auto* net = dynamic_cast<vgd::TinyDenoiser*>(prior.denoiser.get()))
                labels = net->num_labels();

            std::ofstream summary(sw_outdir + "/summary.csv");
            summary << "prompt,label,seed,svg,final_sds_proxy\n";
            for (std::size_t pi = 0; pi < prompts.size(); ++pi) {
                int label = static_cast<int>(pi % labels); // prompts map to labels round-robin
                for (int seed : seeds) {
                    vgd::RunOptions opts;
                    opts.sds.sched = prior.sched;
                    opts.sds.steps = sw_steps;
                    opts.sds.t_min = std::min(50, prior.sched.T / 2);
                    opts.sds.t_max = std::min(950, prior.sched.T - prior.sched.T / 20);
                    opts.seed = static_cast<std::uint64_t>(seed);
                    opts.k_rejection = sw_k;
                    opts.render.cutoff = 14.0;
                    vgd::RunResult res = vgd::run_style(cfg, *prior.denoiser, label, mode, opts);
                    std::string name = "p" + std::to_string(pi) + "_s" + std::to_string(seed) + ".svg";
                    vgd::write_svg(sw_outdir + "/" + name, res.scene);
                    double last = res.trace.empty() ? 0.0 : res.trace.back().sds_proxy_norm;
                    summary << '"' << prompts[pi] << '"' << ',' << label << ',' << seed << ',' << name
                            << ',' << last << "\n";
                    std::cout << "[" << pi + 1 << "/" << prompts.size() << "] seed " << seed
                              << " -> " << name << "\n";
                }
            }
            std::cout << "sweep summary: " << sw_outdir << "/summary.csv\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
