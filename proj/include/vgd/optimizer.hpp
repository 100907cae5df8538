#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "vgd/params.hpp"

namespace vgd {

// Adam with bias correction. Paper settings: beta1=0.9, beta2=0.9, eps=1e-6.
struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.9;
    double eps = 1e-6;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}

    void zero_block(std::size_t offset, std::size_t count) {
        for (std::size_t i = offset; i < offset + count; ++i) {
            m[i] = 0.0;
            v[i] = 0.0;
        }
    }
};

inline void adam_step(AdamState& st, std::vector<double>& params, const std::vector<double>& grads,
                      const std::vector<double>& rates) {
    if (params.size() != grads.size() || params.size() != st.m.size() ||
        rates.size() != params.size())
        throw std::invalid_argument("adam_step: size mismatch");
    for (double gv : grads)
        if (std::isnan(gv)) throw std::runtime_error("adam_step: NaN gradient");
    st.step += 1;
    double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
        double mhat = st.m[i] / bc1;
        double vhat = st.v[i] / bc2;
        params[i] -= rates[i] * mhat / (std::sqrt(vhat) + st.eps);
    }
}

inline void adam_step(AdamState& st, std::vector<double>& params, const std::vector<double>& grads,
                      double rate) {
    adam_step(st, params, grads, std::vector<double>(params.size(), rate));
}

// Linear warmup followed by cosine decay to a floor, with per-group
// multipliers applied after the base schedule. Iconography/sketch default:
// 0.02 -> 0.2 over 500 steps, cosine to 0.05; fill colors 20x lower,
// background 200x lower. Pixel art: 1e-5 -> 1e-4 over 1000 steps, constant
// afterwards.
struct LrSchedule {
    double warm_start = 0.02;
    double warm_end = 0.2;
    int warm_steps = 500;
    bool cosine_decay = true;
    double decay_floor = 0.05;
    double mult_points = 1.0;
    double mult_fill = 1.0 / 20.0;
    double mult_background = 1.0 / 200.0;

    static LrSchedule iconography() { return {}; }

    static LrSchedule pixel_art() {
        LrSchedule s;
        s.warm_start = 1e-5;
        s.warm_end = 1e-4;
        s.warm_steps = 1000;
        s.cosine_decay = false;
        s.mult_points = s.mult_fill = s.mult_background = 1.0;
        return s;
    }

    // LIVE vectorization phase; constant-then-cosine, our calibration (the
    // paper gives no LIVE optimizer settings).
    static LrSchedule live() {
        LrSchedule s;
        s.warm_start = 1.0;
        s.warm_end = 1.0;
        s.warm_steps = 0;
        s.cosine_decay = true;
        s.decay_floor = 0.05;
        s.mult_points = 1.0;
        s.mult_fill = 1.0 / 20.0;
        s.mult_background = 1.0 / 50.0;
        return s;
    }
};

inline double lr_at(const LrSchedule& s, int step, int total_steps, ParamGroup group) {
    if (step > total_steps) throw std::invalid_argument("lr_at: step beyond total_steps");
    double base;
    int warm = std::min(s.warm_steps, total_steps);
    if (step <= warm && warm > 0) {
        base = s.warm_start + (s.warm_end - s.warm_start) * static_cast<double>(step) / s.warm_steps;
    } else if (!s.cosine_decay || total_steps <= warm) {
        base = s.warm_end;
    } else {
        double u = static_cast<double>(step - warm) / (total_steps - warm);
        base = s.decay_floor + (s.warm_end - s.decay_floor) * 0.5 * (1.0 + std::cos(3.14159265358979323846 * u));
    }
    switch (group) {
        case ParamGroup::ControlPoint: return base * s.mult_points;
        case ParamGroup::FillColor: return base * s.mult_fill;
        case ParamGroup::Background: return base * s.mult_background;
    }
    return base;
}

inline std::vector<double> rates_for(const LrSchedule& s, const ParamLayout& layout, int step,
                                     int total_steps) {
    std::vector<double> r(layout.total);
    double rp = lr_at(s, step, total_steps, ParamGroup::ControlPoint);
    double rf = lr_at(s, step, total_steps, ParamGroup::FillColor);
    double rb = lr_at(s, step, total_steps, ParamGroup::Background);
    for (std::size_t i = 0; i < layout.total; ++i) {
        switch (layout.groups[i]) {
            case ParamGroup::ControlPoint: r[i] = rp; break;
            case ParamGroup::FillColor: r[i] = rf; break;
            case ParamGroup::Background: r[i] = rb; break;
        }
    }
    return r;
}

} // namespace vgd
