#include "tubeflow/protocol.hpp"

#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

namespace tubeflow {

namespace {

constexpr int kMaxScenes = 10000;
constexpr int kBenchIters = 5;

struct Split {
  std::vector<ScalarField2D> scores;
  std::vector<BinaryMask> gt;
  std::vector<std::vector<BifurcationBox>> boxes;
};

SyntheticScene noisy_scene(SceneConfig sc, std::uint64_t seed, double sigma, int sigma_index) {
  sc.seed = seed;
  SyntheticScene scene = generate_tree(sc);
  scene.image = add_gaussian_noise(scene.image, sigma, noise_seed(seed, sigma_index));
  return scene;
}

std::vector<EvalReport> evaluate_split(const Split& s, double threshold, int dilation, bool boxes) {
  std::vector<EvalReport> out;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    out.push_back(evaluate(s.scores[i], s.gt[i], threshold, nullptr, dilation,
                           boxes ? std::span<const BifurcationBox>(s.boxes[i]) : std::span<const BifurcationBox>{}));
  }
  return out;
}

}  // namespace

std::uint64_t train_seed(std::uint64_t base, int i) { return base + static_cast<std::uint64_t>(i); }
std::uint64_t test_seed(std::uint64_t base, int i) { return base + kMaxScenes + static_cast<std::uint64_t>(i); }
std::uint64_t noise_seed(std::uint64_t scene_seed, int sigma_index) {
  return scene_seed * 1000003ULL + static_cast<std::uint64_t>(sigma_index) + 1;
}

NoiseBenchConfig NoiseBenchConfig::defaults() {
  NoiseBenchConfig cfg;
  cfg.enhance = EnhanceConfig::defaults(cfg.scene.width, cfg.scene.height);
  cfg.enhance.robust = true;
  cfg.enhance.optim.iters = kBenchIters;
  return cfg;
}

void NoiseBenchConfig::validate() const {
  if (sigmas.empty()) throw std::invalid_argument("noise bench: no sigma values");
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw std::invalid_argument("noise bench: sigma must be non-negative");
  }
  if (scenes < 1 || scenes > kMaxScenes) throw std::invalid_argument("noise bench: scenes out of range");
  scene.validate();
  enhance.validate();
  frangi.validate();
}

EvalReport mean_report(std::span<const EvalReport> reports) {
  if (reports.empty()) throw std::invalid_argument("mean_report: no reports");
  EvalReport m;
  bool all_bb = true;
  double bb = 0.0;
  for (const EvalReport& r : reports) {
    m.auc += r.auc;
    m.accuracy += r.accuracy;
    m.local_accuracy += r.local_accuracy;
    m.dice += r.dice;
    m.sensitivity += r.sensitivity;
    m.specificity += r.specificity;
    m.threshold += r.threshold;
    m.n_pos += r.n_pos;
    m.n_neg += r.n_neg;
    if (r.bb_dice) {
      bb += *r.bb_dice;
    } else {
      all_bb = false;
    }
  }
  const double n = static_cast<double>(reports.size());
  m.auc /= n;
  m.accuracy /= n;
  m.local_accuracy /= n;
  m.dice /= n;
  m.sensitivity /= n;
  m.specificity /= n;
  m.threshold /= n;
  if (all_bb) m.bb_dice = bb / n;
  return m;
}

std::vector<CsvRow> run_noise_bench(const NoiseBenchConfig& cfg_in, const TubeTemplate& t) {
  cfg_in.validate();
  const EnhanceConfig& ecfg = cfg_in.enhance;
  std::vector<CsvRow> rows;
  for (std::size_t k = 0; k < cfg_in.sigmas.size(); ++k) {
    const double sigma = cfg_in.sigmas[k];
    Split ours[2], frangi[2];
    for (int split = 0; split < 2; ++split) {
      for (int i = 0; i < cfg_in.scenes; ++i) {
        const std::uint64_t seed = split == 0 ? train_seed(cfg_in.seed, i) : test_seed(cfg_in.seed, i);
        const SyntheticScene scene = noisy_scene(cfg_in.scene, seed, sigma, static_cast<int>(k));
        ours[split].scores.push_back(enhance(scene.image, t, ecfg).augmented);
        ours[split].gt.push_back(scene.mask);
        frangi[split].scores.push_back(frangi2d(scene.image, cfg_in.frangi));
        frangi[split].gt.push_back(scene.mask);
      }
    }
    for (auto [name, s] : {std::pair<const char*, Split*>{"ours", ours}, {"frangi", frangi}}) {
      const double thr = best_threshold(s[0].scores, s[0].gt).threshold;
      const auto reports = evaluate_split(s[1], thr, cfg_in.dilation_radius, false);
      CsvRow row;
      row.method = name;
      row.sigma = sigma;
      row.seed = std::to_string(cfg_in.seed);
      row.report = mean_report(reports);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

AblationConfig AblationConfig::defaults() {
  AblationConfig cfg;
  cfg.enhance = EnhanceConfig::defaults(cfg.scene.width, cfg.scene.height);
  cfg.enhance.robust = true;
  cfg.enhance.optim.iters = kBenchIters;
  return cfg;
}

void AblationConfig::validate() const {
  if (train_scenes < 1 || train_scenes > kMaxScenes || test_scenes < 1 || test_scenes > kMaxScenes) {
    throw std::invalid_argument("ablation: scene counts out of range");
  }
  if (!(sigma >= 0.0)) throw std::invalid_argument("ablation: sigma must be non-negative");
  if (scene.max_depth < 1) throw std::invalid_argument("ablation: trees need at least one bifurcation");
  scene.validate();
  enhance.validate();
}

AblationResult run_bifurcation_ablation(const AblationConfig& cfg, const TubeTemplate& t) {
  cfg.validate();
  EnhanceConfig with = cfg.enhance;
  with.bifurcation = true;
  EnhanceConfig without = with;
  without.bifurcation = false;

  Split s_with[2], s_without[2];
  for (int split = 0; split < 2; ++split) {
    const int n = split == 0 ? cfg.train_scenes : cfg.test_scenes;
    // Trees without a branch point have no boxes and are skipped.
    for (int i = 0, used = 0; used < n; ++i) {
      if (i >= kMaxScenes) throw std::runtime_error("ablation: too few trees with branch points");
      const std::uint64_t seed = split == 0 ? train_seed(cfg.seed, i) : test_seed(cfg.seed, i);
      const SyntheticScene scene = noisy_scene(cfg.scene, seed, cfg.sigma, 0);
      if (scene.bifurcation_boxes.empty()) continue;
      ++used;
      for (auto [s, ec] : {std::pair<Split*, const EnhanceConfig*>{s_with, &with}, {s_without, &without}}) {
        s[split].scores.push_back(enhance(scene.image, t, *ec).augmented);
        s[split].gt.push_back(scene.mask);
        s[split].boxes.push_back(scene.bifurcation_boxes);
      }
    }
  }

  AblationResult res;
  for (auto [s, report, per] : {std::tuple{s_with, &res.with_bifurcation, &res.bb_with},
                                std::tuple{s_without, &res.without_bifurcation, &res.bb_without}}) {
    const double thr = best_threshold(s[0].scores, s[0].gt).threshold;
    const auto reports = evaluate_split(s[1], thr, 2, true);
    for (const EvalReport& r : reports) per->push_back(*r.bb_dice);
    *report = mean_report(reports);
  }
  return res;
}

}  // namespace tubeflow
