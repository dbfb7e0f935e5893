#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lecturelens/types.hpp"

namespace lecturelens {

struct GroundTruthBox {
    std::string image_id;
    Category category = Category::HeadUp;
    Box bbox;
};

struct ScoredDetection {
    std::string image_id;
    Category category = Category::HeadUp;
    double confidence = 0.0;
    Box bbox;
};

/// One prefix of the confidence-ranked detection list.
struct PrPoint {
    double confidence_threshold = 0.0;
    double precision = 0.0;
    std::optional<double> recall;  // empty when there is no ground truth
};

/// Detection flag in descending-confidence order.
struct ScoredFlag {
    double confidence = 0.0;
    bool is_tp = false;
};

enum class ApVariant { AllPoint, ElevenPoint, HundredOnePoint };
ApVariant ap_variant_from_string(const std::string& s);
const char* to_string(ApVariant v);

struct MetricsSummary {
    std::map<Category, double> per_category_ap;
    std::map<Category, int> n_gt;
    double map = 0.0;  // mean AP over categories with ground truth
};

/// Intersection area over union area; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

/// Greedy confidence-ranked matching within one category. A detection is
/// a TP when its best-IoU *unmatched* ground truth in the same image
/// reaches the threshold; that ground truth is then consumed. Confidence
/// ties keep input order.
std::vector<ScoredFlag> match_detections(const std::vector<ScoredDetection>& dets,
                                         const std::vector<GroundTruthBox>& gts,
                                         double iou_threshold);

/// Cumulative precision/recall at every prefix of the ranked flags.
std::vector<PrPoint> pr_curve(const std::vector<ScoredFlag>& flags, int n_gt);

/// Area under the right-max precision envelope. AllPoint integrates over
/// exact recall increments; the sampled variants average envelope
/// precision at 11 or 101 evenly spaced recall points.
double average_precision(const std::vector<PrPoint>& curve,
                         ApVariant variant = ApVariant::AllPoint);

/// Splits by category, runs match -> curve -> AP per category, and
/// averages over categories that have ground truth.
MetricsSummary mean_average_precision(const std::vector<ScoredDetection>& dets,
                                      const std::vector<GroundTruthBox>& gts,
                                      double iou_threshold = 0.5,
                                      ApVariant variant = ApVariant::AllPoint);

// JSONL loaders for the `metrics` subcommand.
//   ground truth: {"image": <id>, "cls": "up"|"down", "xyxy": [x1,y1,x2,y2]}
//   predictions:  {"image": <id>, "boxes": [{"cls","conf","xyxy"}], ...}
std::vector<GroundTruthBox> parse_ground_truth(std::istream& raw);
std::vector<ScoredDetection> parse_predictions(std::istream& raw);

}  // namespace lecturelens
