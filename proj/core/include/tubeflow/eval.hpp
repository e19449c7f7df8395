#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tubeflow/field.hpp"
#include "tubeflow/synth.hpp"

namespace tubeflow {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

struct EvalReport {
  double auc = 0.0;
  double accuracy = 0.0;
  double local_accuracy = 0.0;
  double dice = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double threshold = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::optional<double> bb_dice;
};

// Ratios with an empty denominator (e.g. sensitivity with no positives)
// evaluate to 1: there is nothing to get wrong.
double dice_of(const Confusion& c);
double accuracy_of(const Confusion& c);
double sensitivity_of(const Confusion& c);
double specificity_of(const Confusion& c);

/// Confusion counts over fov pixels (all pixels when fov is null).
Confusion confusion(const BinaryMask& seg, const BinaryMask& gt, const BinaryMask* fov = nullptr);

/// Rank-statistic AUC: P(score(pos) > score(neg)) with ties counted 1/2.
/// Throws std::invalid_argument unless gt has a positive and a negative
/// inside the fov.
double roc_auc(const ScalarField2D& scores, const BinaryMask& gt, const BinaryMask* fov = nullptr);

struct ThresholdChoice {
  double threshold = 0.0;
  double dice = 0.0;
};

/// Sweeps every distinct score as a threshold (score >= t is vessel) and
/// returns the Dice maximizer; ties go to the smallest threshold.
ThresholdChoice best_threshold(const ScalarField2D& scores, const BinaryMask& gt,
                               const BinaryMask* fov = nullptr);
/// Same over several images pooled into one confusion matrix.
ThresholdChoice best_threshold(std::span<const ScalarField2D> scores, std::span<const BinaryMask> gt);

BinaryMask threshold_mask(const ScalarField2D& scores, double threshold);

/// Report fields derived from one confusion matrix (auc, local_accuracy and
/// threshold are left at 0). Throws if the fov is empty.
EvalReport confusion_metrics(const BinaryMask& seg, const BinaryMask& gt, const BinaryMask* fov = nullptr);

/// Disk dilation: pixels within Euclidean distance `radius` of a foreground pixel.
BinaryMask dilate(const BinaryMask& m, int radius);

/// Accuracy on the dilation of gt by a disk of the given radius.
double local_accuracy(const BinaryMask& seg, const BinaryMask& gt, int dilation_radius = 2);

/// Pixels (x, y) with cx - half <= x < cx + half and likewise for y.
BinaryMask box_region(const BifurcationBox& box, int width, int height);

/// Dice over the union of box interiors (clipped to the image).
double bifurcation_bb_dice(const BinaryMask& seg, const BinaryMask& gt, std::span<const BifurcationBox> boxes);

/// Full report at a fixed threshold.
EvalReport evaluate(const ScalarField2D& scores, const BinaryMask& gt, double threshold,
                    const BinaryMask* fov = nullptr, int dilation_radius = 2,
                    std::span<const BifurcationBox> boxes = {});

std::string to_json(const EvalReport& report);

struct CsvRow {
  std::string method;
  double sigma = 0.0;
  std::string seed;
  EvalReport report;
};

/// Shortest round-trip decimal form.
std::string format_number(double v);

std::string csv_header();
std::string to_csv(const CsvRow& row);

}  // namespace tubeflow
