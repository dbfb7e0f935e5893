#include "lecturelens/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <future>
#include <istream>
#include <map>
#include <numeric>

#include "lecturelens/error.hpp"

using nlohmann::json;

namespace lecturelens {

ApVariant ap_variant_from_string(const std::string& s) {
    if (s == "all-point" || s == "all") return ApVariant::AllPoint;
    if (s == "11-point" || s == "11") return ApVariant::ElevenPoint;
    if (s == "101-point" || s == "101") return ApVariant::HundredOnePoint;
    throw Error(ErrorCategory::Config, "unknown AP variant \"" + s + "\"");
}

const char* to_string(ApVariant v) {
    switch (v) {
        case ApVariant::AllPoint: return "all-point";
        case ApVariant::ElevenPoint: return "11-point";
        case ApVariant::HundredOnePoint: return "101-point";
    }
    return "?";
}

double iou(const Box& a, const Box& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

std::vector<ScoredFlag> match_detections(const std::vector<ScoredDetection>& dets,
                                         const std::vector<GroundTruthBox>& gts,
                                         double iou_threshold) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });

    std::map<std::string, std::vector<std::size_t>> gt_by_image;
    for (std::size_t i = 0; i < gts.size(); ++i) gt_by_image[gts[i].image_id].push_back(i);
    std::vector<bool> consumed(gts.size(), false);

    std::vector<ScoredFlag> flags;
    flags.reserve(dets.size());
    for (const auto idx : order) {
        const auto& det = dets[idx];
        double best_iou = 0.0;
        std::size_t best = gts.size();
        if (const auto it = gt_by_image.find(det.image_id); it != gt_by_image.end()) {
            for (const auto gi : it->second) {
                if (consumed[gi]) continue;
                const double v = iou(det.bbox, gts[gi].bbox);
                if (v > best_iou) {
                    best_iou = v;
                    best = gi;
                }
            }
        }
        const bool tp = best < gts.size() && best_iou >= iou_threshold;
        if (tp) consumed[best] = true;
        flags.push_back({det.confidence, tp});
    }
    return flags;
}

std::vector<PrPoint> pr_curve(const std::vector<ScoredFlag>& flags, int n_gt) {
    std::vector<PrPoint> curve;
    curve.reserve(flags.size());
    int tp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i].is_tp) ++tp;
        PrPoint p;
        p.confidence_threshold = flags[i].confidence;
        p.precision = static_cast<double>(tp) / static_cast<double>(i + 1);
        if (n_gt > 0) p.recall = static_cast<double>(tp) / n_gt;
        curve.push_back(p);
    }
    return curve;
}

double average_precision(const std::vector<PrPoint>& curve, ApVariant variant) {
    std::vector<std::pair<double, double>> pts;  // (recall, precision)
    for (const auto& p : curve)
        if (p.recall) pts.emplace_back(*p.recall, p.precision);
    if (pts.empty()) return 0.0;

    // Right-max precision envelope: env[i] is the best precision achievable
    // at recall >= pts[i].recall.
    std::vector<double> env(pts.size());
    double running = 0.0;
    for (std::size_t i = pts.size(); i-- > 0;) {
        running = std::max(running, pts[i].second);
        env[i] = running;
    }

    if (variant == ApVariant::AllPoint) {
        double ap = 0.0;
        double prev_recall = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].first > prev_recall) {
                ap += (pts[i].first - prev_recall) * env[i];
                prev_recall = pts[i].first;
            }
        }
        return ap;
    }

    const int samples = variant == ApVariant::ElevenPoint ? 11 : 101;
    double sum = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double r = static_cast<double>(k) / (samples - 1);
        double best = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].first >= r - 1e-12) {
                best = env[i];
                break;
            }
        }
        sum += best;
    }
    return sum / samples;
}

MetricsSummary mean_average_precision(const std::vector<ScoredDetection>& dets,
                                      const std::vector<GroundTruthBox>& gts,
                                      double iou_threshold, ApVariant variant) {
    if (gts.empty())
        throw Error(ErrorCategory::Validation, "no ground truth boxes to evaluate against");

    MetricsSummary summary;
    std::map<Category, std::future<double>> pending;
    for (const Category cat : {Category::HeadUp, Category::HeadDown}) {
        std::vector<ScoredDetection> d;
        std::vector<GroundTruthBox> g;
        for (const auto& det : dets)
            if (det.category == cat) d.push_back(det);
        for (const auto& gt : gts)
            if (gt.category == cat) g.push_back(gt);
        summary.n_gt[cat] = static_cast<int>(g.size());
        if (g.empty()) continue;
        pending.emplace(cat, std::async(std::launch::async,
                                        [d = std::move(d), g = std::move(g), iou_threshold,
                                         variant] {
                                            const auto flags =
                                                match_detections(d, g, iou_threshold);
                                            return average_precision(
                                                pr_curve(flags, static_cast<int>(g.size())),
                                                variant);
                                        }));
    }
    double sum = 0.0;
    for (auto& [cat, fut] : pending) {
        const double ap = fut.get();
        summary.per_category_ap[cat] = ap;
        sum += ap;
    }
    summary.map = sum / static_cast<double>(pending.size());
    return summary;
}

namespace {

json parse_line(const std::string& line, std::size_t lineno) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(lineno, std::string("invalid JSON (") + e.what() + ")");
    }
}

Box parse_xyxy(const json& j, std::size_t lineno) {
    if (!j.is_array() || j.size() != 4 ||
        !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); }))
        throw ParseError(lineno, "\"xyxy\" must be an array of 4 numbers");
    Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!b.valid()) throw ParseError(lineno, "degenerate box: need x1 < x2 and y1 < y2");
    return b;
}

std::string parse_image_id(const json& j, std::size_t lineno) {
    if (!j.contains("image") || !j["image"].is_string() ||
        j["image"].get<std::string>().empty())
        throw ParseError(lineno, "missing \"image\" id");
    return j["image"].get<std::string>();
}

Category parse_cls(const json& j, std::size_t lineno) {
    if (!j.contains("cls") || !j["cls"].is_string())
        throw ParseError(lineno, "missing \"cls\"");
    try {
        return category_from_string(j["cls"].get<std::string>());
    } catch (const Error& e) {
        throw ParseError(lineno, e.what());
    }
}

}  // namespace

std::vector<GroundTruthBox> parse_ground_truth(std::istream& raw) {
    std::vector<GroundTruthBox> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(raw, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json j = parse_line(line, lineno);
        GroundTruthBox gt;
        gt.image_id = parse_image_id(j, lineno);
        gt.category = parse_cls(j, lineno);
        if (!j.contains("xyxy")) throw ParseError(lineno, "missing \"xyxy\"");
        gt.bbox = parse_xyxy(j["xyxy"], lineno);
        out.push_back(std::move(gt));
    }
    return out;
}

std::vector<ScoredDetection> parse_predictions(std::istream& raw) {
    std::vector<ScoredDetection> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(raw, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json j = parse_line(line, lineno);
        const std::string image_id = parse_image_id(j, lineno);
        if (!j.contains("boxes") || !j["boxes"].is_array())
            throw ParseError(lineno, "missing \"boxes\" array");
        for (const auto& bj : j["boxes"]) {
            ScoredDetection det;
            det.image_id = image_id;
            det.category = parse_cls(bj, lineno);
            if (!bj.contains("conf") || !bj["conf"].is_number())
                throw ParseError(lineno, "missing \"conf\"");
            det.confidence = bj["conf"].get<double>();
            if (det.confidence < 0.0 || det.confidence > 1.0)
                throw ParseError(lineno, "\"conf\" out of [0,1]");
            if (!bj.contains("xyxy")) throw ParseError(lineno, "missing \"xyxy\"");
            det.bbox = parse_xyxy(bj["xyxy"], lineno);
            out.push_back(std::move(det));
        }
    }
    return out;
}

}  // namespace lecturelens
