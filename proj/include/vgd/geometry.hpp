#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vgd {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }

// RGBA, each channel in [0,1]. Callers clamp after optimizer updates.
struct Color {
    double r = 0.0, g = 0.0, b = 0.0, a = 1.0;
};

inline Color clamped(Color c) {
    auto cl = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
    return {cl(c.r), cl(c.g), cl(c.b), cl(c.a)};
}

struct CubicSegment {
    Vec2 p0, p1, p2, p3;
};

enum class PathKind { ClosedFilled, OpenStroked, FixedSquare };

// control_points layout: ClosedFilled with k segments stores 3k points
// (segment i = points 3i,3i+1,3i+2,3(i+1) mod 3k); OpenStroked stores 3k+1;
// FixedSquare stores its 4 immutable corners.
struct VectorPath {
    PathKind kind = PathKind::ClosedFilled;
    std::vector<Vec2> points;
    Color fill;
    double stroke_width = 0.0;
    Color stroke{0.0, 0.0, 0.0, 1.0};
    int z_index = 0;

    int segment_count() const {
        switch (kind) {
            case PathKind::ClosedFilled: return static_cast<int>(points.size()) / 3;
            case PathKind::OpenStroked: return static_cast<int>(points.size() - 1) / 3;
            case PathKind::FixedSquare: return 0;
        }
        return 0;
    }

    CubicSegment segment(int i) const {
        int k = segment_count();
        if (i < 0 || i >= k) throw std::out_of_range("VectorPath::segment");
        if (kind == PathKind::ClosedFilled) {
            return {points[3 * i], points[3 * i + 1], points[3 * i + 2],
                    points[(3 * i + 3) % points.size()]};
        }
        return {points[3 * i], points[3 * i + 1], points[3 * i + 2], points[3 * i + 3]};
    }

    bool points_optimizable() const { return kind != PathKind::FixedSquare; }
    bool fill_optimizable() const { return kind != PathKind::OpenStroked; }
};

struct Scene {
    int width = 0, height = 0;
    Color background{1.0, 1.0, 1.0, 1.0}; // alpha fixed at 1
    std::vector<VectorPath> paths;        // kept sorted by z_index

    void sort_by_z() {
        std::stable_sort(paths.begin(), paths.end(),
                         [](const VectorPath& a, const VectorPath& b) { return a.z_index < b.z_index; });
    }

    int max_z() const {
        int z = 0;
        for (const auto& p : paths) z = std::max(z, p.z_index);
        return z;
    }
};

inline void clamp_colors(Scene& scene) {
    scene.background = clamped(scene.background);
    scene.background.a = 1.0;
    for (auto& p : scene.paths)
        if (p.fill_optimizable()) p.fill = clamped(p.fill);
}

inline Vec2 cubic_point(const CubicSegment& s, double t) {
    double u = 1.0 - t;
    double b0 = u * u * u, b1 = 3.0 * t * u * u, b2 = 3.0 * t * t * u, b3 = t * t * t;
    return {b0 * s.p0.x + b1 * s.p1.x + b2 * s.p2.x + b3 * s.p3.x,
            b0 * s.p0.y + b1 * s.p1.y + b2 * s.p2.y + b3 * s.p3.y};
}

inline void bernstein_weights(double t, double w[4]) {
    double u = 1.0 - t;
    w[0] = u * u * u;
    w[1] = 3.0 * t * u * u;
    w[2] = 3.0 * t * t * u;
    w[3] = t * t * t;
}

// Polyline of n+1 points at t = i/n. Endpoints are the control endpoints
// bit-exactly.
inline std::vector<Vec2> flatten_segment(const CubicSegment& seg, int n) {
    if (n < 1) throw std::invalid_argument("flatten_segment: n >= 1 required");
    std::vector<Vec2> pts(static_cast<std::size_t>(n) + 1);
    pts[0] = seg.p0;
    for (int i = 1; i < n; ++i) pts[i] = cubic_point(seg, static_cast<double>(i) / n);
    pts[n] = seg.p3;
    return pts;
}

// Flattened path boundary. Each vertex remembers the segment and Bezier
// parameter it came from so gradients can be routed back to control points.
struct Flattened {
    std::vector<Vec2> pts;
    std::vector<int> seg;
    std::vector<double> t;
    bool closed = false;
    // boundary edge count: pts.size()-1 for open, pts.size() for closed (wrap edge)
    std::size_t edge_count() const { return closed ? pts.size() : pts.size() - 1; }
    Vec2 edge_a(std::size_t e) const { return pts[e]; }
    Vec2 edge_b(std::size_t e) const { return pts[(e + 1) % pts.size()]; }
};

inline Flattened flatten_path(const VectorPath& path, int n) {
    Flattened f;
    if (path.kind == PathKind::FixedSquare) {
        if (path.points.size() != 4) throw std::invalid_argument("FixedSquare needs 4 corners");
        f.pts = path.points;
        f.seg.assign(4, -1);
        f.t.assign(4, 0.0);
        f.closed = true;
        return f;
    }
    int k = path.segment_count();
    if (k < 1) throw std::invalid_argument("path has no segments");
    bool closed = path.kind == PathKind::ClosedFilled;
    f.closed = closed;
    std::size_t count = closed ? static_cast<std::size_t>(k) * n : static_cast<std::size_t>(k) * n + 1;
    f.pts.reserve(count);
    f.seg.reserve(count);
    f.t.reserve(count);
    for (int s = 0; s < k; ++s) {
        CubicSegment cs = path.segment(s);
        auto poly = flatten_segment(cs, n);
        int last = (closed || s + 1 < k) ? n : n + 1; // skip duplicated joint, keep final open endpoint
        for (int i = 0; i < last; ++i) {
            f.pts.push_back(poly[i]);
            f.seg.push_back(s);
            f.t.push_back(static_cast<double>(i) / n);
        }
    }
    if (!closed) { // final vertex is t=1 on the last segment
        f.seg.back() = k - 1;
        f.t.back() = 1.0;
    }
    return f;
}

struct Bbox {
    double xmin = std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    void grow(Vec2 p) {
        xmin = std::min(xmin, p.x);
        ymin = std::min(ymin, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
    void expand(double m) { xmin -= m; ymin -= m; xmax += m; ymax += m; }
    double distance(Vec2 p) const {
        double dx = std::max({xmin - p.x, 0.0, p.x - xmax});
        double dy = std::max({ymin - p.y, 0.0, p.y - ymax});
        return std::sqrt(dx * dx + dy * dy);
    }
};

inline Bbox bbox_of(const Flattened& f) {
    Bbox b;
    for (const auto& p : f.pts) b.grow(p);
    return b;
}

// Winding number of the closed boundary around p (crossing count of an
// upward ray; zero-length edges contribute nothing).
inline int winding_number(const Flattened& f, Vec2 p) {
    int w = 0;
    std::size_t ec = f.edge_count();
    for (std::size_t e = 0; e < ec; ++e) {
        Vec2 a = f.edge_a(e), b = f.edge_b(e);
        if (a.y <= p.y) {
            if (b.y > p.y && cross(b - a, p - a) > 0.0) ++w;
        } else {
            if (b.y <= p.y && cross(b - a, p - a) < 0.0) --w;
        }
    }
    return w;
}

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    double d1 = cross(b - a, c - a);
    double d2 = cross(b - a, d - a);
    double d3 = cross(d - c, a - c);
    double d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

// Proper crossings between non-adjacent boundary edges.
inline bool self_intersects(const Flattened& f) {
    std::size_t ec = f.edge_count();
    std::size_t n = f.pts.size();
    for (std::size_t i = 0; i + 1 < ec; ++i) {
        Vec2 a = f.edge_a(i), b = f.edge_b(i);
        if (a.x == b.x && a.y == b.y) continue;
        for (std::size_t j = i + 1; j < ec; ++j) {
            // skip edges sharing a vertex
            if (j == i + 1 || (f.closed && i == 0 && j == ec - 1)) continue;
            Vec2 c = f.edge_a(j), d = f.edge_b(j);
            if (c.x == d.x && c.y == d.y) continue;
            if (segments_intersect(a, b, c, d)) return true;
        }
        (void)n;
    }
    return false;
}

struct NearestEdge {
    double dist = std::numeric_limits<double>::infinity(); // unsigned distance to boundary
    std::size_t edge = 0;                                  // edge index into Flattened
    double tstar = 0.0;                                    // clamp parameter along the edge
};

inline NearestEdge nearest_edge(const Flattened& f, Vec2 p) {
    NearestEdge best;
    std::size_t ec = f.edge_count();
    for (std::size_t e = 0; e < ec; ++e) {
        Vec2 a = f.edge_a(e), b = f.edge_b(e);
        Vec2 ab = b - a;
        double len2 = norm2(ab);
        if (len2 == 0.0) continue; // degenerate edge: no boundary
        double t = dot(p - a, ab) / len2;
        t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
        Vec2 q = a + t * ab;
        double d2 = norm2(p - q);
        if (d2 < best.dist * best.dist) {
            best.dist = std::sqrt(d2);
            best.edge = e;
            best.tstar = t;
        }
    }
    return best;
}

// Signed distance query result with enough context to backpropagate.
struct SignedDistance {
    double value = std::numeric_limits<double>::infinity();
    NearestEdge nearest;
    double sign = 1.0; // sign applied to the boundary distance (strokes: +1)
};

// Sign is negative inside; inside-ness uses nonzero winding, or even-odd when
// the flattened boundary self-intersects (caller passes the cached flag).
inline SignedDistance signed_distance_flat(const Flattened& f, Vec2 p, bool even_odd) {
    SignedDistance sd;
    sd.nearest = nearest_edge(f, p);
    if (!std::isfinite(sd.nearest.dist)) return sd; // fully degenerate path: +inf
    if (f.closed) {
        int w = winding_number(f, p);
        bool inside = even_odd ? (w % 2 != 0) : (w != 0);
        sd.sign = inside ? -1.0 : 1.0;
        sd.value = sd.sign * sd.nearest.dist;
    } else {
        sd.sign = 1.0;
        sd.value = sd.nearest.dist;
    }
    return sd;
}

inline double signed_distance(Vec2 point, const VectorPath& path, int n) {
    if (n < 4) throw std::invalid_argument("signed_distance: n >= 4 required");
    Flattened f = flatten_path(path, n);
    bool eo = f.closed && self_intersects(f);
    SignedDistance sd = signed_distance_flat(f, point, eo);
    if (path.kind == PathKind::OpenStroked) return sd.value - 0.5 * path.stroke_width;
    return sd.value;
}

// |shoelace| over the flattened boundary. Strokes have no area.
inline double path_area(const VectorPath& path, int n) {
    if (path.kind == PathKind::OpenStroked)
        throw std::invalid_argument("path_area: area undefined for OpenStroked paths");
    Flattened f = flatten_path(path, n);
    double acc = 0.0;
    std::size_t m = f.pts.size();
    for (std::size_t i = 0; i < m; ++i) {
        Vec2 a = f.pts[i], b = f.pts[(i + 1) % m];
        acc += cross(a, b);
    }
    return std::abs(0.5 * acc);
}

// 4-segment cubic approximation of a circle; shared by LIVE init, icon init
// and path reinitialization.
inline VectorPath circle_path(Vec2 center, double radius, Color fill, int z_index = 0) {
    constexpr double kKappa = 0.5522847498307936;
    double r = radius, k = kKappa * radius;
    double cx = center.x, cy = center.y;
    VectorPath p;
    p.kind = PathKind::ClosedFilled;
    p.fill = fill;
    p.z_index = z_index;
    p.points = {
        {cx + r, cy},     {cx + r, cy + k}, {cx + k, cy + r},
        {cx, cy + r},     {cx - k, cy + r}, {cx - r, cy + k},
        {cx - r, cy},     {cx - r, cy - k}, {cx - k, cy - r},
        {cx, cy - r},     {cx + k, cy - r}, {cx + r, cy - k},
    };
    return p;
}

inline VectorPath square_path(Vec2 top_left, double size, Color fill, int z_index = 0) {
    VectorPath p;
    p.kind = PathKind::FixedSquare;
    p.fill = fill;
    p.z_index = z_index;
    p.points = {top_left,
                {top_left.x + size, top_left.y},
                {top_left.x + size, top_left.y + size},
                {top_left.x, top_left.y + size}};
    return p;
}

} // namespace vgd
