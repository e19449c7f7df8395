#include "tubeflow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <charconv>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tubeflow {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

void require_shape(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

bool in_fov(const BinaryMask* fov, std::size_t i) { return fov == nullptr || (*fov)[i]; }

struct ScoredPixel {
  double score;
  bool positive;
};

std::vector<ScoredPixel> collect(const ScalarField2D& scores, const BinaryMask& gt, const BinaryMask* fov,
                                 const char* what) {
  if (!gt.same_shape(scores)) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  if (fov != nullptr) require_shape(*fov, gt, what);
  std::vector<ScoredPixel> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (in_fov(fov, i)) out.push_back({scores[i], gt[i]});
  }
  return out;
}

void require_both_classes(std::size_t pos, std::size_t neg, const char* what) {
  if (pos == 0 || neg == 0) {
    throw std::invalid_argument(std::string(what) + ": ground truth needs a positive and a negative pixel");
  }
}

ThresholdChoice sweep(std::vector<ScoredPixel> px) {
  std::size_t pos = 0;
  for (const auto& p : px) pos += p.positive ? 1 : 0;
  require_both_classes(pos, px.size() - pos, "best_threshold");
  std::sort(px.begin(), px.end(), [](const ScoredPixel& a, const ScoredPixel& b) { return a.score > b.score; });
  ThresholdChoice best{px.front().score, -1.0};
  std::size_t tp = 0;
  std::size_t selected = 0;
  for (std::size_t i = 0; i < px.size();) {
    const double t = px[i].score;
    while (i < px.size() && px[i].score == t) {
      tp += px[i].positive ? 1 : 0;
      ++selected;
      ++i;
    }
    const double dice = 2.0 * static_cast<double>(tp) / static_cast<double>(selected + pos);
    if (dice >= best.dice) best = {t, dice};
  }
  return best;
}

}  // namespace

double dice_of(const Confusion& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }
double accuracy_of(const Confusion& c) { return ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn); }
double sensitivity_of(const Confusion& c) { return ratio(c.tp, c.tp + c.fn); }
double specificity_of(const Confusion& c) { return ratio(c.tn, c.tn + c.fp); }

Confusion confusion(const BinaryMask& seg, const BinaryMask& gt, const BinaryMask* fov) {
  require_shape(seg, gt, "confusion");
  if (fov != nullptr) require_shape(*fov, gt, "confusion");
  Confusion c;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!in_fov(fov, i)) continue;
    const bool s = seg[i];
    const bool g = gt[i];
    if (s && g) ++c.tp;
    else if (s) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double roc_auc(const ScalarField2D& scores, const BinaryMask& gt, const BinaryMask* fov) {
  std::vector<ScoredPixel> px = collect(scores, gt, fov, "roc_auc");
  std::size_t pos = 0;
  for (const auto& p : px) pos += p.positive ? 1 : 0;
  const std::size_t neg = px.size() - pos;
  require_both_classes(pos, neg, "roc_auc");
  std::sort(px.begin(), px.end(), [](const ScoredPixel& a, const ScoredPixel& b) { return a.score < b.score; });

  // Sum of positive midranks (1-based), doubled to stay in integers.
  unsigned long long twice_rank_sum = 0;
  for (std::size_t i = 0; i < px.size();) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < px.size() && px[j].score == px[i].score) {
      pos_in_group += px[j].positive ? 1 : 0;
      ++j;
    }
    twice_rank_sum += pos_in_group * (i + 1 + j);  // midrank = (i + 1 + j) / 2
    i = j;
  }
  const double u = static_cast<double>(twice_rank_sum - pos * (pos + 1)) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

ThresholdChoice best_threshold(const ScalarField2D& scores, const BinaryMask& gt, const BinaryMask* fov) {
  return sweep(collect(scores, gt, fov, "best_threshold"));
}

ThresholdChoice best_threshold(std::span<const ScalarField2D> scores, std::span<const BinaryMask> gt) {
  if (scores.size() != gt.size() || scores.empty()) {
    throw std::invalid_argument("best_threshold: need matching, non-empty score and ground-truth lists");
  }
  std::vector<ScoredPixel> px;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    auto part = collect(scores[k], gt[k], nullptr, "best_threshold");
    px.insert(px.end(), part.begin(), part.end());
  }
  return sweep(std::move(px));
}

BinaryMask threshold_mask(const ScalarField2D& scores, double threshold) {
  BinaryMask m(scores.width(), scores.height());
  for (std::size_t i = 0; i < scores.size(); ++i) m.set(i, scores[i] >= threshold);
  return m;
}

EvalReport confusion_metrics(const BinaryMask& seg, const BinaryMask& gt, const BinaryMask* fov) {
  const Confusion c = confusion(seg, gt, fov);
  if (c.tp + c.fp + c.fn + c.tn == 0) throw std::invalid_argument("confusion_metrics: empty field of view");
  EvalReport r;
  r.accuracy = accuracy_of(c);
  r.dice = dice_of(c);
  r.sensitivity = sensitivity_of(c);
  r.specificity = specificity_of(c);
  r.n_pos = c.tp + c.fn;
  r.n_neg = c.tn + c.fp;
  return r;
}

BinaryMask dilate(const BinaryMask& m, int radius) {
  BinaryMask out(m.width(), m.height());
  const int w = m.width();
  const int h = m.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m(x, y)) continue;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          if (dx * dx + dy * dy > radius * radius) continue;
          const int xx = x + dx;
          const int yy = y + dy;
          if (xx >= 0 && yy >= 0 && xx < w && yy < h) out.set(xx, yy, true);
        }
      }
    }
  }
  return out;
}

double local_accuracy(const BinaryMask& seg, const BinaryMask& gt, int dilation_radius) {
  if (dilation_radius < 1) throw std::invalid_argument("local_accuracy: dilation radius must be >= 1");
  require_shape(seg, gt, "local_accuracy");
  const BinaryMask band = dilate(gt, dilation_radius);
  const Confusion c = confusion(seg, gt, &band);
  if (c.tp + c.fp + c.fn + c.tn == 0) throw std::invalid_argument("local_accuracy: empty dilated region");
  return accuracy_of(c);
}

BinaryMask box_region(const BifurcationBox& box, int width, int height) {
  BinaryMask m(width, height);
  const int x0 = std::max(0, static_cast<int>(std::ceil(box.cx - box.half)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(box.cy - box.half)));
  for (int y = y0; y < height && y < box.cy + box.half; ++y) {
    for (int x = x0; x < width && x < box.cx + box.half; ++x) m.set(x, y, true);
  }
  return m;
}

double bifurcation_bb_dice(const BinaryMask& seg, const BinaryMask& gt, std::span<const BifurcationBox> boxes) {
  require_shape(seg, gt, "bifurcation_bb_dice");
  if (boxes.empty()) throw std::invalid_argument("bifurcation_bb_dice: empty box list");
  BinaryMask region(gt.width(), gt.height());
  for (const auto& b : boxes) {
    const BinaryMask m = box_region(b, gt.width(), gt.height());
    if (m.count() == 0) throw std::invalid_argument("bifurcation_bb_dice: box does not intersect the image");
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i]) region.set(i, true);
    }
  }
  return dice_of(confusion(seg, gt, &region));
}

EvalReport evaluate(const ScalarField2D& scores, const BinaryMask& gt, double threshold, const BinaryMask* fov,
                    int dilation_radius, std::span<const BifurcationBox> boxes) {
  const BinaryMask seg = threshold_mask(scores, threshold);
  EvalReport r = confusion_metrics(seg, gt, fov);
  r.auc = roc_auc(scores, gt, fov);
  r.local_accuracy = local_accuracy(seg, gt, dilation_radius);
  r.threshold = threshold;
  if (!boxes.empty()) r.bb_dice = bifurcation_bb_dice(seg, gt, boxes);
  return r;
}

std::string to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["auc"] = r.auc;
  j["accuracy"] = r.accuracy;
  j["local_accuracy"] = r.local_accuracy;
  j["dice"] = r.dice;
  j["sensitivity"] = r.sensitivity;
  j["specificity"] = r.specificity;
  j["threshold"] = r.threshold;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  if (r.bb_dice) j["bb_dice"] = *r.bb_dice;
  return j.dump(2);
}

std::string csv_header() {
  return "method,sigma,seed,auc,accuracy,local_accuracy,dice,sensitivity,specificity,threshold,n_pos,n_neg";
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const CsvRow& row) {
  const EvalReport& r = row.report;
  std::string out = row.method + ',' + format_number(row.sigma) + ',' + row.seed;
  for (double v : {r.auc, r.accuracy, r.local_accuracy, r.dice, r.sensitivity, r.specificity, r.threshold}) {
    out += ',' + format_number(v);
  }
  out += ',' + std::to_string(r.n_pos) + ',' + std::to_string(r.n_neg);
  return out;
}

}  // namespace tubeflow
