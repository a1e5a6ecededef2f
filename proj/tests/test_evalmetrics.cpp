#include "doctest.h"

#include <sstream>

#include "anystar/evalmetrics.hpp"
#include "oracles.hpp"

using namespace anystar;

namespace {

IouMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    IouMatrix m;
    for (std::size_t r = 0; r < rows.size(); ++r) m.pred_ids.push_back(Label(r + 1));
    if (!rows.empty())
        for (std::size_t c = 0; c < rows[0].size(); ++c) m.gt_ids.push_back(Label(c + 1));
    for (const auto& row : rows) m.iou.insert(m.iou.end(), row.begin(), row.end());
    return m;
}

std::vector<std::vector<double>> to_rows(const IouMatrix& m) {
    std::vector<std::vector<double>> rows(std::size_t(m.rows()), std::vector<double>(std::size_t(m.cols())));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) rows[std::size_t(r)][std::size_t(c)] = m.at(r, c);
    return rows;
}

void fill_box(LabelVolume& v, std::array<int, 3> lo, std::array<int, 3> hi, Label id) {
    for (int z = lo[2]; z < hi[2]; ++z)
        for (int y = lo[1]; y < hi[1]; ++y)
            for (int x = lo[0]; x < hi[0]; ++x) v(x, y, z) = id;
}

}  // namespace

TEST_CASE("iou matrix") {
    LabelVolume gt({16, 8, 8}, 0);
    fill_box(gt, {0, 0, 0}, {4, 4, 4}, 3);
    fill_box(gt, {8, 0, 0}, {12, 4, 4}, 9);

    SUBCASE("identical maps") {
        const auto m = instance_iou_matrix(gt, gt);
        REQUIRE(m.rows() == 2);
        REQUIRE(m.cols() == 2);
        CHECK(m.pred_ids == std::vector<Label>{3, 9});
        CHECK(m.at(0, 0) == 1.0);
        CHECK(m.at(1, 1) == 1.0);
        CHECK(m.at(0, 1) == 0.0);
        CHECK(m.at(1, 0) == 0.0);
    }
    SUBCASE("disjoint") {
        LabelVolume pred({16, 8, 8}, 0);
        fill_box(pred, {0, 4, 4}, {4, 8, 8}, 1);
        const auto m = instance_iou_matrix(pred, gt);
        for (double v : m.iou) CHECK(v == 0.0);
    }
    SUBCASE("half overlap") {
        LabelVolume pred({16, 8, 8}, 0);
        fill_box(pred, {2, 0, 0}, {6, 4, 4}, 1);
        const auto m = instance_iou_matrix(pred, gt);
        CHECK(m.at(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("random maps against per-pair counting") {
        Rng rng(11);
        for (int t = 0; t < 50; ++t) {
            const auto a = oracle::random_instance_map(rng, {8, 7, 6}, 4);
            const auto b = oracle::random_instance_map(rng, {8, 7, 6}, 4);
            const auto rows = to_rows(instance_iou_matrix(a, b));
            const auto ref = oracle::brute_iou(a, b);
            REQUIRE(rows.size() == ref.size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < rows[r].size(); ++c) CHECK(rows[r][c] == doctest::Approx(ref[r][c]).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(instance_iou_matrix(LabelVolume({4, 4, 4}), LabelVolume({4, 4, 5})), std::invalid_argument);
}

TEST_CASE("matching") {
    SUBCASE("perfect") {
        const auto m = from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
        for (double tau : default_thresholds()) CHECK(match_at_threshold(m, tau) == MatchCounts{3, 0, 0});
    }
    SUBCASE("empty prediction") {
        IouMatrix m;
        m.gt_ids = {1, 2, 3, 4};
        CHECK(match_at_threshold(m, 0.5) == MatchCounts{0, 0, 4});
    }
    SUBCASE("greedy is suboptimal") {
        const std::vector<std::vector<double>> rows{{0.9, 0.8, 0.0}, {0.7, 0.0, 0.0}, {0.0, 0.0, 0.0}};
        CHECK(oracle::greedy_matching(rows, 0.5) == 1);
        CHECK(oracle::brute_max_matching(rows, 0.5) == 2);
        CHECK(match_at_threshold(from_rows(rows), 0.5) == MatchCounts{2, 1, 1});
    }
    SUBCASE("strict threshold") {
        const auto m = from_rows({{0.5}});
        CHECK(match_at_threshold(m, 0.5).tp == 0);
        CHECK(match_at_threshold(m, 0.49).tp == 1);
    }
    SUBCASE("random tiny maps against enumeration") {
        Rng rng(2024);
        for (int t = 0; t < 100; ++t) {
            const Dims d{int(rng.uniform_int(2, 8)), int(rng.uniform_int(2, 8)), int(rng.uniform_int(2, 8))};
            const auto gt = oracle::random_instance_map(rng, d, 4);
            const auto pred = oracle::random_instance_map(rng, d, 4);
            const auto m = instance_iou_matrix(pred, gt);
            REQUIRE(m.rows() <= 4);
            REQUIRE(m.cols() <= 4);
            const auto rows = to_rows(m);
            for (double tau : {0.01, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
                const auto k = match_at_threshold(m, tau);
                CHECK(k.tp == oracle::brute_max_matching(rows, tau));
                CHECK(k.tp >= oracle::greedy_matching(rows, tau));
                CHECK(k.tp + k.fn == m.cols());
                CHECK(k.tp + k.fp == m.rows());
            }
        }
    }
    SUBCASE("dense random matrices") {
        Rng rng(5);
        for (int t = 0; t < 200; ++t) {
            const auto R = std::size_t(rng.uniform_int(0, 6)), C = std::size_t(rng.uniform_int(0, 6));
            std::vector<std::vector<double>> rows(R, std::vector<double>(C));
            for (auto& row : rows)
                for (auto& v : row) v = rng.uniform();
            const double tau = rng.uniform();
            if (R == 0 || C == 0) continue;
            const auto k = match_at_threshold(from_rows(rows), tau);
            CHECK(k.tp == oracle::brute_max_matching(rows, tau));
            CHECK(k.tp >= oracle::greedy_matching(rows, tau));
        }
    }
}

TEST_CASE("score curve") {
    LabelVolume gt({24, 24, 24}, 0);
    fill_box(gt, {1, 1, 1}, {7, 7, 7}, 1);
    fill_box(gt, {10, 2, 3}, {18, 9, 9}, 2);
    fill_box(gt, {3, 14, 12}, {9, 22, 20}, 5);

    SUBCASE("perfect prediction") {
        const auto r = score_curve(gt, gt);
        REQUIRE(r.per_threshold.size() == 9);
        for (const auto& s : r.per_threshold) {
            CHECK(s.accuracy == 1.0);
            CHECK(s.f1 == 1.0);
        }
        CHECK(r.mean_ap == 1.0);
        CHECK(r.mean_accuracy == 1.0);
    }
    SUBCASE("empty prediction") {
        const auto r = score_curve(LabelVolume(gt.dims(), 0), gt);
        for (const auto& s : r.per_threshold) {
            CHECK(s.accuracy == 0.0);
            CHECK(s.fn == 3);
        }
    }
    SUBCASE("iou 0.55 flips between 0.5 and 0.6") {
        // 20-voxel rod against its first 11 voxels: 11 / 20
        LabelVolume g({24, 4, 4}, 0), p({24, 4, 4}, 0);
        fill_box(g, {2, 1, 1}, {22, 2, 2}, 1);
        fill_box(p, {2, 1, 1}, {13, 2, 2}, 1);
        CHECK(instance_iou_matrix(p, g).at(0, 0) == 0.55);
        const auto r = score_curve(p, g);
        for (const auto& s : r.per_threshold) CHECK(s.accuracy == (s.tau < 0.55 ? 1.0 : 0.0));
        CHECK(r.per_threshold[4].accuracy == 1.0);
        CHECK(r.per_threshold[5].accuracy == 0.0);
    }
    SUBCASE("iou 0.55 between two balls") {
        // closed-form lens IoU reaches 0.55 near d = 0.3 r; search the voxel
        // offset on r = 12 balls whose measured IoU straddles it
        const auto g = oracle::ball_phantom({48, 48, 48}, {{24, 24, 24, 12}});
        for (int off = 1; off < 12; ++off) {
            const auto p = oracle::ball_phantom({48, 48, 48}, {{24.0 + off, 24, 24, 12}});
            const double v = instance_iou_matrix(p, g).at(0, 0);
            const auto r = score_curve(p, g);
            for (const auto& s : r.per_threshold) CHECK(s.accuracy == (v > s.tau ? 1.0 : 0.0));
        }
    }
    SUBCASE("randomized pairs") {
        Rng rng(77);
        for (int t = 0; t < 100; ++t) {
            const auto a = oracle::random_instance_map(rng, {8, 8, 8}, 4);
            const auto b = oracle::random_instance_map(rng, {8, 8, 8}, 4);
            const auto r = score_curve(a, b);
            const auto s = score_curve(b, a);
            for (std::size_t i = 0; i < r.per_threshold.size(); ++i) {
                const auto& x = r.per_threshold[i];
                CHECK(x.accuracy >= 0.0);
                CHECK(x.accuracy <= 1.0);
                if (i) CHECK(x.accuracy <= r.per_threshold[i - 1].accuracy);
                CHECK(x.tp + x.fn == r.n_gt);
                CHECK(x.tp + x.fp == r.n_pred);
                CHECK(s.per_threshold[i].tp == x.tp);
                CHECK(s.per_threshold[i].precision == x.recall);
                CHECK(s.per_threshold[i].recall == x.precision);
            }
        }
    }
    SUBCASE("both empty") {
        const LabelVolume e({4, 4, 4}, 0);
        const auto r = score_curve(e, e);
        for (const auto& s : r.per_threshold) {
            CHECK(s.accuracy == 0.0);
            CHECK(s.precision == 0.0);
        }
    }
}

TEST_CASE("report round trip") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto a = oracle::random_instance_map(rng, {8, 8, 8}, 4);
        const auto b = oracle::random_instance_map(rng, {8, 8, 8}, 4);
        const auto r = score_curve(a, b);
        std::stringstream ss;
        write_report(ss, r);
        CHECK(read_report(ss) == r);
    }
    std::stringstream bad("tau\ttp\n0.1\t3\n");
    CHECK_THROWS(read_report(bad));
    std::stringstream none("# n_gt\t3\n");
    CHECK_THROWS(read_report(none));
}
