#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tubeflow/baseline.hpp"
#include "tubeflow/eval.hpp"
#include "tubeflow/pipeline.hpp"
#include "tubeflow/synth.hpp"

namespace tubeflow {

/// Train/test noise sweep: for each sigma, `scenes` training and `scenes`
/// test trees; each method picks its threshold on the training split.
struct NoiseBenchConfig {
  std::vector<double> sigmas{0.0, 0.1, 0.2, 0.3, 0.4};
  int scenes = 5;
  std::uint64_t seed = 1;
  SceneConfig scene;
  EnhanceConfig enhance;
  FrangiConfig frangi;
  int dilation_radius = 2;

  /// Robust scoring and tracking on, 5 refinement iterations, enhancement
  /// sized for `scene`. Change
  /// `enhance` along with the scene size.
  static NoiseBenchConfig defaults();
  void validate() const;
};

/// Seeds of the i-th training / test scene.
std::uint64_t train_seed(std::uint64_t base, int i);
std::uint64_t test_seed(std::uint64_t base, int i);
/// Noise seed for a scene at the k-th sigma.
std::uint64_t noise_seed(std::uint64_t scene_seed, int sigma_index);

/// Field-wise mean of reports; counts are summed. bb_dice is averaged when
/// every report has it.
EvalReport mean_report(std::span<const EvalReport> reports);

/// Rows in sigma order, "ours" then "frangi" for each sigma. Metrics are
/// test-split means.
std::vector<CsvRow> run_noise_bench(const NoiseBenchConfig& cfg, const TubeTemplate& t);

/// Same trees scored with and without the bifurcation fields.
struct AblationConfig {
  int train_scenes = 5;
  int test_scenes = 10;
  std::uint64_t seed = 1;
  double sigma = 0.0;
  SceneConfig scene;
  EnhanceConfig enhance;

  static AblationConfig defaults();
  void validate() const;
};

struct AblationResult {
  EvalReport with_bifurcation;     // test means, bb_dice set
  EvalReport without_bifurcation;  // lambda2 = 0, theta frozen
  std::vector<double> bb_with;     // per test scene
  std::vector<double> bb_without;
  double gap() const { return *with_bifurcation.bb_dice - *without_bifurcation.bb_dice; }
};

AblationResult run_bifurcation_ablation(const AblationConfig& cfg, const TubeTemplate& t);

}  // namespace tubeflow
