#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgd/diffusion.hpp"
#include "vgd/optimizer.hpp"
#include "vgd/rng.hpp"

namespace vgd {

// Small residual MLP over flattened low-resolution images with sinusoidal
// timestep features and a learned label table (last row = unconditional).
// A learned scalar input skip carries the identity component of the noise
// prediction, which bounded tanh units cannot express at high t.
//   h1  = tanh(W1 x + b1 + Wt f(t) + E[y])
//   h2  = h1 + tanh(W2 h1 + b2)
//   eps = W3 h2 + b3 + g * x
class TinyDenoiser : public Denoiser {
public:
    TinyDenoiser(ImageShape shape, int num_labels, int T, int hidden = 128,
                 std::uint64_t init_seed = 1)
        : shape_(shape), labels_(num_labels), T_(T), hidden_(hidden) {
        d_ = shape.h * shape.w * shape.c;
        off_w1_ = 0;
        off_b1_ = off_w1_ + static_cast<std::size_t>(hidden_) * d_;
        off_wt_ = off_b1_ + hidden_;
        off_emb_ = off_wt_ + static_cast<std::size_t>(hidden_) * kTimeFeat;
        off_w2_ = off_emb_ + static_cast<std::size_t>(labels_ + 1) * hidden_;
        off_b2_ = off_w2_ + static_cast<std::size_t>(hidden_) * hidden_;
        off_w3_ = off_b2_ + hidden_;
        off_b3_ = off_w3_ + static_cast<std::size_t>(d_) * hidden_;
        off_skip_ = off_b3_ + d_;
        params_.assign(off_skip_ + 1, 0.0);
        Rng rng(init_seed);
        auto init_mat = [&](std::size_t off, std::size_t rows, std::size_t cols) {
            double a = 1.0 / std::sqrt(static_cast<double>(cols));
            for (std::size_t i = 0; i < rows * cols; ++i) params_[off + i] = rng.uniform(-a, a);
        };
        init_mat(off_w1_, hidden_, d_);
        init_mat(off_wt_, hidden_, kTimeFeat);
        init_mat(off_emb_, labels_ + 1, hidden_);
        init_mat(off_w2_, hidden_, hidden_);
        init_mat(off_w3_, d_, hidden_);
    }

    ImageShape shape() const override { return shape_; }
    int num_labels() const { return labels_; }
    int T() const { return T_; }
    int hidden() const { return hidden_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    Image predict(const Image& x_t, int t, std::optional<int> cond) const override {
        Cache c;
        forward(x_t, t, cond, c);
        Image out(x_t.h, x_t.w, x_t.c);
        out.data = std::move(c.out);
        return out;
    }

    // mean((eps_hat - eps)^2) with parameter gradients accumulated into grad.
    double loss_and_grad(const Image& x0, int t, const Image& eps, std::optional<int> cond,
                         const NoiseSchedule& sched, std::vector<double>& grad, double w = 1.0) const {
        Image x_t = q_sample(x0, t, eps, sched);
        Cache c;
        int y = forward(x_t, t, cond, c);
        double invn = 1.0 / static_cast<double>(d_);
        double loss = 0.0;
        std::vector<double> dout(d_);
        for (int i = 0; i < d_; ++i) {
            double diff = c.out[i] - eps.data[i];
            loss += diff * diff;
            dout[i] = 2.0 * w * diff * invn;
        }
        backward(c, y, dout, grad);
        return w * loss * invn;
    }

    struct TrainConfig {
        int steps = 2000;
        double lr = 2e-3;
        double label_dropout = 0.1;
        std::uint64_t seed = 7;
    };

    struct LabeledImage {
        Image image;
        int label = 0;
    };

    // Single-sample DDPM training loop; returns the running-average loss at
    // the start and over the final 10% of steps.
    std::pair<double, double> train_ddpm(const std::vector<LabeledImage>& dataset,
                                         const NoiseSchedule& sched, const TrainConfig& cfg) {
        if (dataset.empty()) throw std::invalid_argument("train_ddpm: empty dataset");
        Rng rng(cfg.seed);
        AdamState adam(params_.size());
        adam.beta2 = 0.999;
        adam.eps = 1e-8;
        std::vector<double> grad(params_.size());
        double head = 0.0, tail = 0.0;
        int head_n = std::max(1, cfg.steps / 10), tail_n = 0;
        for (int step = 0; step < cfg.steps; ++step) {
            const LabeledImage& ex = dataset[rng.uniform_int(0, static_cast<int>(dataset.size()) - 1)];
            std::optional<int> cond = ex.label;
            if (rng.uniform() < cfg.label_dropout) cond = std::nullopt;
            int t = rng.uniform_int(1, sched.T);
            Image eps(shape_.h, shape_.w, shape_.c);
            for (auto& v : eps.data) v = rng.normal();
            std::fill(grad.begin(), grad.end(), 0.0);
            double loss = loss_and_grad(ex.image, t, eps, cond, sched, grad);
            double u = static_cast<double>(step) / cfg.steps;
            double lr = cfg.lr * (0.55 + 0.45 * std::cos(3.14159265358979 * u));
            adam_step(adam, params_, grad, lr);
            if (step < head_n) head += loss / head_n;
            if (step >= cfg.steps - std::max(1, cfg.steps / 10)) {
                tail += loss;
                ++tail_n;
            }
        }
        return {head, tail / std::max(1, tail_n)};
    }

    void save(const std::string& path, const NoiseSchedule& sched) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for write: " + path);
        auto u32 = [&](std::uint32_t v) {
            unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
            f.write(reinterpret_cast<char*>(b), 4);
        };
        auto f64 = [&](double d) {
            std::uint64_t v = std::bit_cast<std::uint64_t>(d);
            unsigned char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
            f.write(reinterpret_cast<char*>(b), 8);
        };
        u32(kMagic);
        u32(1); // version
        u32(shape_.h);
        u32(shape_.w);
        u32(shape_.c);
        u32(hidden_);
        u32(labels_);
        u32(T_);
        u32(sched.kind == ScheduleKind::Cosine ? 1 : 0);
        u32(static_cast<std::uint32_t>(params_.size()));
        for (double p : params_) f64(p);
        if (!f) throw std::runtime_error("write failed: " + path);
    }

    static std::pair<TinyDenoiser, NoiseSchedule> load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open: " + path);
        auto u32 = [&]() {
            unsigned char b[4];
            f.read(reinterpret_cast<char*>(b), 4);
            return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                   (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
        };
        auto f64 = [&]() {
            unsigned char b[8];
            f.read(reinterpret_cast<char*>(b), 8);
            std::uint64_t v = 0;
            for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
            return std::bit_cast<double>(v);
        };
        if (u32() != kMagic) throw std::runtime_error("not a denoiser checkpoint: " + path);
        if (u32() != 1) throw std::runtime_error("unsupported checkpoint version");
        int h = u32(), w = u32(), c = u32(), hidden = u32(), labels = u32(), T = u32();
        ScheduleKind kind = u32() == 1 ? ScheduleKind::Cosine : ScheduleKind::Linear;
        std::uint32_t n = u32();
        TinyDenoiser net({h, w, c}, labels, T, hidden);
        if (n != net.params_.size()) throw std::runtime_error("checkpoint parameter count mismatch");
        for (auto& p : net.params_) p = f64();
        if (!f) throw std::runtime_error("truncated checkpoint: " + path);
        return {std::move(net), make_schedule(T, kind)};
    }

private:
    static constexpr int kTimeFeat = 16;
    static constexpr std::uint32_t kMagic = 0x4E444756; // "VGDN"

    struct Cache {
        std::vector<double> x, f, a1h, h1, t2, h2, out;
    };

    void time_features(int t, std::vector<double>& f) const {
        f.resize(kTimeFeat);
        double u = static_cast<double>(t) / T_;
        for (int k = 0; k < kTimeFeat / 2; ++k) {
            double ang = 3.14159265358979323846 * std::ldexp(1.0, k) * u;
            f[2 * k] = std::sin(ang);
            f[2 * k + 1] = std::cos(ang);
        }
    }

    int forward(const Image& x_t, int t, std::optional<int> cond, Cache& c) const {
        if (x_t.h != shape_.h || x_t.w != shape_.w || x_t.c != shape_.c)
            throw std::invalid_argument("TinyDenoiser: input shape mismatch");
        if (cond.has_value() && (*cond < 0 || *cond >= labels_))
            throw std::invalid_argument("TinyDenoiser: unknown label");
        int y = cond.has_value() ? *cond : labels_;
        c.x = x_t.data;
        time_features(t, c.f);
        c.h1.assign(hidden_, 0.0);
        for (int i = 0; i < hidden_; ++i) {
            double a = params_[off_b1_ + i];
            const double* w1 = &params_[off_w1_ + static_cast<std::size_t>(i) * d_];
            for (int j = 0; j < d_; ++j) a += w1[j] * c.x[j];
            const double* wt = &params_[off_wt_ + static_cast<std::size_t>(i) * kTimeFeat];
            for (int j = 0; j < kTimeFeat; ++j) a += wt[j] * c.f[j];
            a += params_[off_emb_ + static_cast<std::size_t>(y) * hidden_ + i];
            c.h1[i] = std::tanh(a);
        }
        c.t2.assign(hidden_, 0.0);
        c.h2.assign(hidden_, 0.0);
        for (int i = 0; i < hidden_; ++i) {
            double a = params_[off_b2_ + i];
            const double* w2 = &params_[off_w2_ + static_cast<std::size_t>(i) * hidden_];
            for (int j = 0; j < hidden_; ++j) a += w2[j] * c.h1[j];
            c.t2[i] = std::tanh(a);
            c.h2[i] = c.h1[i] + c.t2[i];
        }
        c.out.assign(d_, 0.0);
        double g = params_[off_skip_];
        for (int i = 0; i < d_; ++i) {
            double a = params_[off_b3_ + i] + g * c.x[i];
            const double* w3 = &params_[off_w3_ + static_cast<std::size_t>(i) * hidden_];
            for (int j = 0; j < hidden_; ++j) a += w3[j] * c.h2[j];
            c.out[i] = a;
        }
        return y;
    }

    void backward(const Cache& c, int y, const std::vector<double>& dout,
                  std::vector<double>& grad) const {
        std::vector<double> dh2(hidden_, 0.0);
        for (int i = 0; i < d_; ++i) {
            double g = dout[i];
            grad[off_b3_ + i] += g;
            grad[off_skip_] += g * c.x[i];
            double* gw3 = &grad[off_w3_ + static_cast<std::size_t>(i) * hidden_];
            const double* w3 = &params_[off_w3_ + static_cast<std::size_t>(i) * hidden_];
            for (int j = 0; j < hidden_; ++j) {
                gw3[j] += g * c.h2[j];
                dh2[j] += g * w3[j];
            }
        }
        std::vector<double> dh1 = dh2; // residual branch
        for (int i = 0; i < hidden_; ++i) {
            double da2 = dh2[i] * (1.0 - c.t2[i] * c.t2[i]);
            if (da2 == 0.0) continue;
            grad[off_b2_ + i] += da2;
            double* gw2 = &grad[off_w2_ + static_cast<std::size_t>(i) * hidden_];
            const double* w2 = &params_[off_w2_ + static_cast<std::size_t>(i) * hidden_];
            for (int j = 0; j < hidden_; ++j) {
                gw2[j] += da2 * c.h1[j];
                dh1[j] += da2 * w2[j];
            }
        }
        for (int i = 0; i < hidden_; ++i) {
            double da1 = dh1[i] * (1.0 - c.h1[i] * c.h1[i]);
            if (da1 == 0.0) continue;
            grad[off_b1_ + i] += da1;
            double* gw1 = &grad[off_w1_ + static_cast<std::size_t>(i) * d_];
            for (int j = 0; j < d_; ++j) gw1[j] += da1 * c.x[j];
            double* gwt = &grad[off_wt_ + static_cast<std::size_t>(i) * kTimeFeat];
            for (int j = 0; j < kTimeFeat; ++j) gwt[j] += da1 * c.f[j];
            grad[off_emb_ + static_cast<std::size_t>(y) * hidden_ + i] += da1;
        }
    }

    ImageShape shape_;
    int labels_;
    int T_;
    int hidden_;
    int d_;
    std::size_t off_w1_, off_b1_, off_wt_, off_emb_, off_w2_, off_b2_, off_w3_, off_b3_, off_skip_;
    std::vector<double> params_;
};

} // namespace vgd
