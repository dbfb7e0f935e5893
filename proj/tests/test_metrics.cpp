#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>
#include <vector>

#include "lecturelens/error.hpp"
#include "lecturelens/metrics.hpp"
#include "oracles.hpp"

using namespace lecturelens;

namespace {

ScoredDetection det(const std::string& img, double conf, Box b,
                    Category cat = Category::HeadUp) {
    return {img, cat, conf, b};
}

GroundTruthBox gt(const std::string& img, Box b, Category cat = Category::HeadUp) {
    return {img, cat, b};
}

}  // namespace

TEST_CASE("iou geometry") {
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == doctest::Approx(1.0));
    CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == 0.0);
    CHECK(iou({0, 0, 1, 1}, {0.5, 0, 1.5, 1}) == doctest::Approx(1.0 / 3.0));
    // shared edge only: zero-area intersection
    CHECK(iou({0, 0, 1, 1}, {1, 0, 2, 1}) == 0.0);
}

TEST_CASE("match_detections consumes ground truth greedily by confidence") {
    const Box b{0, 0, 10, 10};

    SUBCASE("one detection on one ground truth") {
        const auto flags = match_detections({det("a", 0.9, b)}, {gt("a", b)}, 0.5);
        REQUIRE(flags.size() == 1);
        CHECK(flags[0].is_tp);
    }
    SUBCASE("second identical detection is a duplicate") {
        const auto flags =
            match_detections({det("a", 0.9, b), det("a", 0.8, b)}, {gt("a", b)}, 0.5);
        REQUIRE(flags.size() == 2);
        CHECK(flags[0].is_tp);
        CHECK_FALSE(flags[1].is_tp);
    }
    SUBCASE("matching is per image") {
        const auto flags = match_detections({det("a", 0.9, b)}, {gt("b", b)}, 0.5);
        REQUIRE(flags.size() == 1);
        CHECK_FALSE(flags[0].is_tp);
    }
    SUBCASE("flags come back in descending confidence order") {
        const auto flags = match_detections(
            {det("a", 0.2, b), det("a", 0.9, b), det("a", 0.5, b)}, {gt("a", b)}, 0.5);
        REQUIRE(flags.size() == 3);
        CHECK(flags[0].confidence == doctest::Approx(0.9));
        CHECK(flags[1].confidence == doctest::Approx(0.5));
        CHECK(flags[2].confidence == doctest::Approx(0.2));
        CHECK(flags[0].is_tp);
    }
    SUBCASE("low-IoU match is a false positive") {
        const auto flags = match_detections({det("a", 0.9, {0, 0, 1, 1})},
                                            {gt("a", {0.9, 0, 1.9, 1})}, 0.5);
        CHECK_FALSE(flags[0].is_tp);
    }
}

TEST_CASE("pr_curve accumulates prefix precision and recall") {
    SUBCASE("single true positive") {
        const auto curve = pr_curve({{0.9, true}}, 1);
        REQUIRE(curve.size() == 1);
        CHECK(curve[0].precision == doctest::Approx(1.0));
        CHECK(*curve[0].recall == doctest::Approx(1.0));
        CHECK(curve[0].confidence_threshold == doctest::Approx(0.9));
    }
    SUBCASE("tp then fp at half recall") {
        const auto curve = pr_curve({{0.9, true}, {0.8, false}}, 2);
        REQUIRE(curve.size() == 2);
        CHECK(curve[0].precision == doctest::Approx(1.0));
        CHECK(*curve[0].recall == doctest::Approx(0.5));
        CHECK(curve[1].precision == doctest::Approx(0.5));
        CHECK(*curve[1].recall == doctest::Approx(0.5));
    }
    SUBCASE("empty flags give an empty curve") {
        CHECK(pr_curve({}, 3).empty());
    }
    SUBCASE("no ground truth leaves recall unset") {
        const auto curve = pr_curve({{0.9, false}}, 0);
        REQUIRE(curve.size() == 1);
        CHECK_FALSE(curve[0].recall.has_value());
    }
    SUBCASE("recall never decreases down the ranking") {
        std::mt19937 gen(3);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<ScoredFlag> flags;
            const int n = std::uniform_int_distribution<int>(1, 30)(gen);
            double conf = 1.0;
            for (int i = 0; i < n; ++i) {
                conf -= std::uniform_real_distribution<double>(0.0, 0.03)(gen);
                flags.push_back({conf, std::bernoulli_distribution(0.5)(gen)});
            }
            const auto curve = pr_curve(flags, 40);
            for (std::size_t i = 1; i < curve.size(); ++i)
                CHECK(*curve[i].recall >= *curve[i - 1].recall);
        }
    }
}

TEST_CASE("average_precision examples") {
    SUBCASE("perfect single detection") {
        CHECK(average_precision(pr_curve({{0.9, true}}, 1)) == doctest::Approx(1.0));
    }
    SUBCASE("no detections with ground truth present") {
        CHECK(average_precision(pr_curve({}, 5)) == doctest::Approx(0.0));
    }
    SUBCASE("documented three-flag case") {
        const auto curve = pr_curve({{0.9, true}, {0.8, false}, {0.7, true}}, 2);
        CHECK(average_precision(curve) == doctest::Approx(1.0 * 0.5 + (2.0 / 3.0) * 0.5));
        CHECK(average_precision(curve) == doctest::Approx(0.8333).epsilon(1e-4));
    }
    SUBCASE("sampled variants bracket the exact value on this shape") {
        const auto curve = pr_curve({{0.9, true}, {0.8, false}, {0.7, true}}, 2);
        const double eleven = average_precision(curve, ApVariant::ElevenPoint);
        // recall 0 .. 0.5 -> envelope 1.0 (6 samples), 0.6 .. 1.0 -> 2/3 (5 samples)
        CHECK(eleven == doctest::Approx((6.0 + 5.0 * 2.0 / 3.0) / 11.0));
        const double hundred = average_precision(curve, ApVariant::HundredOnePoint);
        CHECK(hundred == doctest::Approx((51.0 + 50.0 * 2.0 / 3.0) / 101.0));
    }
}

TEST_CASE("mean_average_precision end-to-end") {
    const Box b1{0, 0, 10, 10}, b2{20, 20, 30, 30};

    SUBCASE("perfect detector scores 1.0") {
        const std::vector<GroundTruthBox> gts{gt("a", b1), gt("a", b2, Category::HeadDown),
                                              gt("b", b1, Category::HeadDown)};
        const std::vector<ScoredDetection> dets{
            det("a", 0.9, b1), det("a", 0.95, b2, Category::HeadDown),
            det("b", 0.8, b1, Category::HeadDown)};
        const auto summary = mean_average_precision(dets, gts);
        CHECK(summary.map == doctest::Approx(1.0));
        CHECK(summary.per_category_ap.at(Category::HeadUp) == doctest::Approx(1.0));
        CHECK(summary.per_category_ap.at(Category::HeadDown) == doctest::Approx(1.0));
        CHECK(summary.n_gt.at(Category::HeadUp) == 1);
        CHECK(summary.n_gt.at(Category::HeadDown) == 2);
    }
    SUBCASE("empty detector scores 0.0") {
        const auto summary = mean_average_precision({}, {gt("a", b1)});
        CHECK(summary.map == doctest::Approx(0.0));
    }
    SUBCASE("no ground truth at all is an error") {
        CHECK_THROWS_AS(mean_average_precision({det("a", 0.9, b1)}, {}), Error);
    }
    SUBCASE("categories without ground truth are excluded from the mean") {
        const std::vector<GroundTruthBox> gts{gt("a", b1)};  // HeadUp only
        const std::vector<ScoredDetection> dets{det("a", 0.9, b1),
                                                det("a", 0.8, b2, Category::HeadDown)};
        const auto summary = mean_average_precision(dets, gts);
        CHECK(summary.map == doctest::Approx(1.0));
        CHECK(summary.per_category_ap.count(Category::HeadDown) == 0);
        CHECK(summary.n_gt.at(Category::HeadDown) == 0);
    }
}

TEST_CASE("AP properties") {
    std::mt19937 gen(17);
    const auto random_box = [&] {
        const double x = std::uniform_real_distribution<double>(0.0, 50.0)(gen);
        const double y = std::uniform_real_distribution<double>(0.0, 50.0)(gen);
        const double w = std::uniform_real_distribution<double>(2.0, 20.0)(gen);
        const double h = std::uniform_real_distribution<double>(2.0, 20.0)(gen);
        return Box{x, y, x + w, y + h};
    };
    const auto random_image = [&] {
        return std::string(1, static_cast<char>('a' + std::uniform_int_distribution<int>(0, 2)(gen)));
    };

    SUBCASE("trailing low-confidence noise never raises AP") {
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<GroundTruthBox> gts;
            std::vector<ScoredDetection> dets;
            const int ng = std::uniform_int_distribution<int>(1, 8)(gen);
            const int nd = std::uniform_int_distribution<int>(1, 12)(gen);
            for (int i = 0; i < ng; ++i) gts.push_back(gt(random_image(), random_box()));
            for (int i = 0; i < nd; ++i)
                dets.push_back(det(random_image(),
                                   std::uniform_real_distribution<double>(0.2, 1.0)(gen),
                                   random_box()));
            const double base =
                average_precision(pr_curve(match_detections(dets, gts, 0.5), ng));
            auto noisy = dets;
            // far outside every generated ground truth, so always FP
            noisy.push_back(det(random_image(), 0.01, {1000, 1000, 1001, 1001}));
            const double with_noise =
                average_precision(pr_curve(match_detections(noisy, gts, 0.5), ng));
            CHECK(with_noise <= base + 1e-12);
        }
    }

    SUBCASE("confidences matter only through their ranking") {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<GroundTruthBox> gts;
            std::vector<ScoredDetection> dets;
            const int ng = std::uniform_int_distribution<int>(1, 6)(gen);
            for (int i = 0; i < ng; ++i) gts.push_back(gt(random_image(), random_box()));
            const int nd = std::uniform_int_distribution<int>(1, 10)(gen);
            double conf = 1.0;
            for (int i = 0; i < nd; ++i) {
                conf -= std::uniform_real_distribution<double>(0.01, 0.05)(gen);
                dets.push_back(det(random_image(), conf, random_box()));
            }
            auto squashed = dets;
            for (auto& d : squashed) d.confidence *= 0.37;  // keeps order
            const double a = average_precision(pr_curve(match_detections(dets, gts, 0.5), ng));
            const double b =
                average_precision(pr_curve(match_detections(squashed, gts, 0.5), ng));
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
        }
    }
}

TEST_CASE("AP matches the prefix-enumeration oracle on random toy sets") {
    std::mt19937 gen(29);
    const auto random_box = [&] {
        const double x = std::uniform_real_distribution<double>(0.0, 40.0)(gen);
        const double y = std::uniform_real_distribution<double>(0.0, 40.0)(gen);
        const double w = std::uniform_real_distribution<double>(2.0, 15.0)(gen);
        const double h = std::uniform_real_distribution<double>(2.0, 15.0)(gen);
        return Box{x, y, x + w, y + h};
    };

    int nontrivial = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<GroundTruthBox> gts;
        std::vector<ScoredDetection> dets;
        const int ng = std::uniform_int_distribution<int>(1, 8)(gen);
        const int nd = std::uniform_int_distribution<int>(0, 12)(gen);
        const auto img = [&] {
            return std::string(1, static_cast<char>(
                                      'a' + std::uniform_int_distribution<int>(0, 2)(gen)));
        };
        for (int i = 0; i < ng; ++i)
            gts.push_back(gt(img(), random_box(),
                             std::bernoulli_distribution(0.5)(gen) ? Category::HeadUp
                                                                   : Category::HeadDown));
        // distinct confidences so prefix cuts equal threshold cuts
        double conf = 1.0;
        for (int i = 0; i < nd; ++i) {
            conf -= std::uniform_real_distribution<double>(0.005, 0.05)(gen);
            // half the detections shadow a true box to get plenty of TPs
            Box b = random_box();
            if (!gts.empty() && std::bernoulli_distribution(0.5)(gen)) {
                const auto& target = gts[std::uniform_int_distribution<std::size_t>(
                    0, gts.size() - 1)(gen)];
                b = target.bbox;
                b.x1 += std::uniform_real_distribution<double>(-0.8, 0.8)(gen);
                b.x2 += std::uniform_real_distribution<double>(-0.8, 0.8)(gen);
                dets.push_back(det(target.image_id, conf, b, target.category));
                continue;
            }
            dets.push_back(det(img(), conf, b,
                               std::bernoulli_distribution(0.5)(gen) ? Category::HeadUp
                                                                     : Category::HeadDown));
        }

        const auto summary = mean_average_precision(dets, gts, 0.5);
        const double want = oracles::mean_average_precision(dets, gts, 0.5);
        CHECK(summary.map == doctest::Approx(want).epsilon(1e-9));
        if (summary.map > 0.0 && summary.map < 1.0) ++nontrivial;
    }
    CHECK(nontrivial > 40);  // the comparison exercises non-degenerate curves
}

TEST_CASE("ground-truth and prediction parsers") {
    SUBCASE("ground truth lines") {
        std::istringstream in(
            "{\"image\":\"img1\",\"cls\":\"up\",\"xyxy\":[0,0,10,10]}\n"
            "{\"image\":\"img1\",\"cls\":\"down\",\"xyxy\":[5,5,15,15]}\n");
        const auto gts = parse_ground_truth(in);
        REQUIRE(gts.size() == 2);
        CHECK(gts[0].category == Category::HeadUp);
        CHECK(gts[1].bbox == Box{5, 5, 15, 15});
    }
    SUBCASE("prediction lines expand per box") {
        std::istringstream in(
            R"({"image":"img1","t":0,"boxes":[{"cls":"up","conf":0.9,"xyxy":[0,0,10,10]},{"cls":"down","conf":0.4,"xyxy":[1,1,2,2]}]})"
            "\n");
        const auto dets = parse_predictions(in);
        REQUIRE(dets.size() == 2);
        CHECK(dets[0].image_id == "img1");
        CHECK(dets[1].confidence == doctest::Approx(0.4));
    }
    SUBCASE("errors carry line numbers") {
        std::istringstream gt_bad("{\"image\":\"i\",\"cls\":\"up\",\"xyxy\":[10,0,0,10]}\n");
        CHECK_THROWS_AS(parse_ground_truth(gt_bad), ParseError);

        std::istringstream pred_bad(
            "{\"image\":\"i\",\"boxes\":[]}\n"
            "{\"boxes\":[]}\n");
        try {
            parse_predictions(pred_bad);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
}

TEST_CASE("AP variant names round-trip") {
    for (const auto v :
         {ApVariant::AllPoint, ApVariant::ElevenPoint, ApVariant::HundredOnePoint})
        CHECK(ap_variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(ap_variant_from_string("7-point"), Error);
}
