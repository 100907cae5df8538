#include <catch2/catch_amalgamated.hpp>

#include "vgd/live.hpp"
#include "test_util.hpp"

using namespace vgd;

namespace {

Raster disk_on_white(int size, Vec2 c, double r, Color color) {
    Raster img(size, size, 3, 1.0);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double dx = x + 0.5 - c.x, dy = y + 0.5 - c.y;
            if (dx * dx + dy * dy <= r * r) {
                img.at(y, x, 0) = color.r;
                img.at(y, x, 1) = color.g;
                img.at(y, x, 2) = color.b;
            }
        }
    return img;
}

} // namespace

TEST_CASE("loss map is zero for identical images and peaks at a wrong pixel") {
    Raster a(16, 16, 3, 0.4), b(16, 16, 3, 0.4);
    Image m = loss_map(a, b);
    for (double v : m.data) CHECK(v == 0.0);

    b.at(5, 9, 0) = 1.0;
    Image m2 = loss_map(a, b);
    int best_x = 0, best_y = 0;
    double best = -1;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            if (m2.at(y, x, 0) > best) {
                best = m2.at(y, x, 0);
                best_x = x;
                best_y = y;
            }
    CHECK(best_x == 9);
    CHECK(best_y == 5);
}

TEST_CASE("box blur preserves total mass for interior errors") {
    Raster a(20, 20, 3, 0.0), b(20, 20, 3, 0.0);
    b.at(10, 10, 0) = 0.7; // single interior error
    b.at(9, 12, 1) = 0.4;
    Image m = loss_map(a, b);
    double mass = 0.0;
    for (double v : m.data) mass += v;
    CHECK(mass == Catch::Approx(0.7 * 0.7 + 0.4 * 0.4).margin(1e-9));
}

TEST_CASE("init_paths places one center in each error blob") {
    Raster target(64, 64, 3, 1.0);
    Raster current(64, 64, 3, 1.0);
    // two separated blobs of error
    for (int y = 8; y < 16; ++y)
        for (int x = 8; x < 16; ++x) current.at(y, x, 0) = 0.0;
    for (int y = 48; y < 56; ++y)
        for (int x = 40; x < 48; ++x) current.at(y, x, 2) = 0.0;
    Image map = loss_map(current, target);
    Rng rng(3);
    auto paths = init_paths(2, map, target, rng, 8.0);
    REQUIRE(paths.size() == 2);
    auto center_of = [](const VectorPath& p) {
        return Vec2{p.points[0].x - 8.0, p.points[0].y}; // circle anchor is (cx + r, cy)
    };
    Vec2 c0 = center_of(paths[0]), c1 = center_of(paths[1]);
    bool blob_a = (c0.x > 7 && c0.x < 17 && c0.y > 7 && c0.y < 17);
    bool blob_b = (c1.x > 39 && c1.x < 49 && c1.y > 47 && c1.y < 57);
    bool blob_a_swapped = (c1.x > 7 && c1.x < 17 && c1.y > 7 && c1.y < 17);
    bool blob_b_swapped = (c0.x > 39 && c0.x < 49 && c0.y > 47 && c0.y < 57);
    CHECK(((blob_a && blob_b) || (blob_a_swapped && blob_b_swapped)));
    for (const auto& p : paths) {
        CHECK(p.kind == PathKind::ClosedFilled);
        CHECK(p.segment_count() == 4);
        CHECK(p.fill.a >= 0.7);
        CHECK(p.fill.a <= 1.0);
    }
}

TEST_CASE("uniform loss map yields suppression-disjoint centers") {
    Raster target(32, 32, 3, 0.5);
    Image map(32, 32, 1, 1.0);
    Rng rng(5);
    double radius = 6.0;
    auto paths = init_paths(3, map, target, rng, radius);
    std::vector<Vec2> centers;
    for (const auto& p : paths) centers.push_back({p.points[0].x - radius, p.points[0].y});
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            CHECK(norm(centers[i] - centers[j]) > radius); // outside the suppressed disk
}

TEST_CASE("paper path-count schedules") {
    CHECK(PathSchedule::for_paths(16).stage_counts == std::vector<int>{2, 4, 10});
    CHECK(PathSchedule::for_paths(64).stage_counts == std::vector<int>{8, 8, 16, 16, 16});
    CHECK(PathSchedule::for_paths(128).stage_counts == std::vector<int>{8, 16, 32, 72});
    for (int c : PathSchedule::for_paths(64).stage_counts) {
        CHECK(c >= 8);
        CHECK(c <= 16);
    }
    CHECK(PathSchedule::for_paths(40).total() == 40);
}

TEST_CASE("uniform-color target is absorbed by the background") {
    Raster target(32, 32, 3, 0.0);
    for (auto& v : target.data) v = 0.35;
    RenderConfig rc;
    rc.cutoff = 14.0;
    VectorizeOptions opt;
    opt.iters_per_stage = 220;
    opt.seed = 11;
    Scene scene = vectorize(target, PathSchedule{{1}}, rc, opt);
    double err = l2(render(scene, rc), target).value;
    INFO("l2=" << err);
    CHECK(err < 1e-4);
}

TEST_CASE("solid disk on white vectorizes to low error with one path") {
    const int size = 64;
    Raster target = disk_on_white(size, {30, 33}, 15, {0.1, 0.2, 0.7, 1.0});
    RenderConfig rc;
    rc.cutoff = 14.0;
    VectorizeOptions opt;
    opt.iters_per_stage = 500;
    opt.seed = 13;
    Scene scene = vectorize(target, PathSchedule{{1}}, rc, opt);
    double err = l2(render(scene, rc), target).value;
    INFO("l2=" << err);
    CHECK(err < 5e-3);
    CHECK(scene.paths.size() == 1);
}

TEST_CASE("stagewise additions never regress and keep the z-prefix") {
    const int size = 48;
    Raster target = disk_on_white(size, {16, 16}, 8, {0.8, 0.2, 0.1, 1.0});
    // second feature so later stages have something to explain
    for (int y = 30; y < 44; ++y)
        for (int x = 26; x < 40; ++x) {
            target.at(y, x, 0) = 0.1;
            target.at(y, x, 1) = 0.6;
            target.at(y, x, 2) = 0.2;
        }
    RenderConfig rc;
    rc.cutoff = 14.0;
    VectorizeOptions opt;
    opt.iters_per_stage = 160;
    opt.seed = 17;

    std::vector<double> stage_l2;
    std::vector<std::vector<int>> stage_zs;
    opt.stage_snapshot = [&](int, const Scene& s) {
        stage_l2.push_back(l2(render(s, rc), target).value);
        std::vector<int> zs;
        for (const auto& p : s.paths) zs.push_back(p.z_index);
        stage_zs.push_back(zs);
    };
    Scene scene = vectorize(target, PathSchedule{{2, 4, 10}}, rc, opt);
    REQUIRE(stage_l2.size() == 3);
    CHECK(stage_l2[1] <= stage_l2[0] + 1e-6);
    CHECK(stage_l2[2] <= stage_l2[1] + 1e-6);
    // earlier stages remain as a prefix in draw order
    for (std::size_t s = 1; s < stage_zs.size(); ++s)
        for (std::size_t i = 0; i < stage_zs[s - 1].size(); ++i)
            CHECK(stage_zs[s][i] == stage_zs[s - 1][i]);
    CHECK(scene.paths.size() == 16);
}
