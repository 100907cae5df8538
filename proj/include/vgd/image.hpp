#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vgd {

// Dense row-major image / field of doubles. Rasters are the 3-channel case
// with values in [0,1]; diffusion state and gradients reuse the same type
// without the range constraint.
struct Image {
    int h = 0, w = 0, c = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h_, int w_, int c_, double fill = 0.0)
        : h(h_), w(w_), c(c_), data(static_cast<std::size_t>(h_) * w_ * c_, fill) {}

    double& at(int y, int x, int ch) { return data[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
    double at(int y, int x, int ch) const { return data[(static_cast<std::size_t>(y) * w + x) * c + ch]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Image& o) const { return h == o.h && w == o.w && c == o.c; }
};

using Raster = Image;

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline Image clamped01(Image img) {
    for (double& v : img.data) v = clamp01(v);
    return img;
}

inline double l2_norm(const Image& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

inline double mean_sq_diff(const Image& a, const Image& b) {
    require_same_shape(a, b, "mean_sq_diff");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.data.size());
}

} // namespace vgd
