#pragma once

#include <iosfwd>
#include <vector>

#include "anystar/volume.hpp"

namespace anystar {

/// Rows are predicted instances, columns ground-truth instances, both in
/// ascending id order. Ids need not be consecutive.
struct IouMatrix {
    std::vector<Label> pred_ids;
    std::vector<Label> gt_ids;
    std::vector<double> iou;  // row-major

    int rows() const { return static_cast<int>(pred_ids.size()); }
    int cols() const { return static_cast<int>(gt_ids.size()); }
    double at(int r, int c) const { return iou[static_cast<std::size_t>(r) * gt_ids.size() + static_cast<std::size_t>(c)]; }
};

IouMatrix instance_iou_matrix(const LabelVolume& pred, const LabelVolume& gt);

struct MatchCounts {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

/// Largest one-to-one matching among pairs with IoU strictly above tau.
MatchCounts match_at_threshold(const IouMatrix& m, double tau);

struct ThresholdScore {
    double tau = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double accuracy = 0.0;  // tp / (tp + fp + fn), also the AP at tau
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    friend bool operator==(const ThresholdScore&, const ThresholdScore&) = default;
};

struct MatchReport {
    int n_pred = 0;
    int n_gt = 0;
    std::vector<ThresholdScore> per_threshold;
    double mean_accuracy = 0.0;
    double mean_ap = 0.0;
    friend bool operator==(const MatchReport&, const MatchReport&) = default;
};

/// 0.1, 0.2, ..., 0.9
std::vector<double> default_thresholds();

/// Ratios with a zero denominator are 0.
MatchReport score_curve(const IouMatrix& m, const std::vector<double>& thresholds = default_thresholds());
MatchReport score_curve(const LabelVolume& pred, const LabelVolume& gt,
                        const std::vector<double>& thresholds = default_thresholds());

/// Tab-separated table, one row per threshold, with '#' header lines.
void write_report(std::ostream& out, const MatchReport& r);
MatchReport read_report(std::istream& in);

}  // namespace anystar
