#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tubeflow/baseline.hpp"
#include "tubeflow/error.hpp"
#include "tubeflow/eval.hpp"
#include "tubeflow/parallel.hpp"
#include "tubeflow/pipeline.hpp"
#include "tubeflow/protocol.hpp"
#include "tubeflow/synth.hpp"

#ifndef TUBEFLOW_VERSION
#define TUBEFLOW_VERSION "unknown"
#endif

namespace tubeflow::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validation failures in user-supplied configuration are usage errors.
template <class Fn>
void as_usage(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// Every option is recorded so the manifest holds the resolved values.
class Recorder {
 public:
  template <class T>
  CLI::Option* option(CLI::App* app, const std::string& name, T& var, const std::string& desc) {
    items_.emplace_back(name, [&var] { return json(var); });
    return app->add_option("--" + name, var, desc)->capture_default_str();
  }

  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& desc) {
    items_.emplace_back(name, [&var] { return json(var); });
    return app->add_flag("--" + name, var, desc);
  }

  json resolved() const {
    json j = json::object();
    for (const auto& [name, get] : items_) j[name] = get();
    return j;
  }

 private:
  std::vector<std::pair<std::string, std::function<json()>>> items_;
};

struct Manifest {
  std::string command;
  json flags;
  json seeds = json::array();
  json inputs = json::array();
  json outputs = json::array();
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

void write_manifest(const fs::path& dir, const Manifest& m) {
  json j;
  j["tool"] = "tubeflow";
  j["version"] = TUBEFLOW_VERSION;
  j["command"] = m.command;
  j["flags"] = m.flags;
  j["seeds"] = m.seeds;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

void make_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError(what + ": not a number: '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text == "none") return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    out.push_back(parse_double(text.substr(start, comma - start), what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_auto(const std::string& s, const std::string& what) {
  if (s == "auto") return std::nullopt;
  return parse_double(s, what);
}

ScalarField2D read_image(const fs::path& path) {
  if (path.extension() == ".pgm") return read_pgm(path);
  auto channels = read_f32(path);
  return channels.at(0);
}

ScalarField2D inverted(ScalarField2D f) {
  for (double& v : f.values()) v = 1.0 - v;
  return f;
}

// ---- shared flag groups --------------------------------------------------

struct SceneFlags {
  SceneConfig cfg;

  void add(CLI::App* app, Recorder& rec) {
    rec.option(app, "width", cfg.width, "image width");
    rec.option(app, "height", cfg.height, "image height");
    rec.option(app, "root-radius", cfg.root_radius, "root vessel radius (px)");
    rec.option(app, "radius-decay", cfg.radius_decay, "child radius factor");
    rec.option(app, "branch-angle-min", cfg.branch_angle_min, "minimum branch deflection (deg)");
    rec.option(app, "branch-angle-max", cfg.branch_angle_max, "maximum branch deflection (deg)");
    rec.option(app, "min-radius", cfg.min_radius, "stop branching below this radius");
    rec.option(app, "max-depth", cfg.max_depth, "maximum branching depth");
    rec.option(app, "contrast", cfg.contrast, "vessel intensity");
    rec.option(app, "scene-ramp-width", cfg.ramp_width, "profile ramp (fraction of radius)");
  }
};

struct EnhanceFlags {
  int iters = 200;
  double lambda1 = 1.0, lambda2 = 1.0, lambda3 = 1.0;
  int path_steps = 8, track_steps = 16;
  double step_r = 2.0, step_angle = 0.5;
  double fd_h_r = 1e-3, fd_h_angle = 1e-3;
  int max_halvings = 10;
  double r_min = 0.8;
  std::string r_max = "auto";
  int n_radii = 8, n_angles = 12;
  std::string theta_grid = "10,20,30,40,50,60,70,80";
  int grid_size = 9;
  double extent = 1.5, ramp_width = 0.25;
  int slices = 2;
  bool robust = false, no_bifurc = false, no_track = false;

  void add(CLI::App* app, Recorder& rec) {
    rec.option(app, "iters", iters, "refinement iterations")->check(CLI::NonNegativeNumber);
    rec.option(app, "lambda1", lambda1, "flow continuity weight");
    rec.option(app, "lambda2", lambda2, "bifurcation weight");
    rec.option(app, "lambda3", lambda3, "regularizer weight");
    rec.option(app, "path-steps", path_steps, "trapezoid intervals on the 2r ray");
    rec.option(app, "track-steps", track_steps, "trapezoid intervals on the 4r tracking ray");
    rec.option(app, "step-r", step_r, "radius step");
    rec.option(app, "step-angle", step_angle, "angle step");
    rec.option(app, "fd-h-r", fd_h_r, "finite-difference step for r");
    rec.option(app, "fd-h-angle", fd_h_angle, "finite-difference step for angles");
    rec.option(app, "max-halvings", max_halvings, "backtracking halvings");
    rec.option(app, "r-min", r_min, "minimum radius (px)");
    rec.option(app, "r-max", r_max, "maximum radius (px) or auto = min(w,h)/8");
    rec.option(app, "n-radii", n_radii, "log-spaced init radii");
    rec.option(app, "n-angles", n_angles, "init angles in [0, pi)");
    rec.option(app, "theta-grid", theta_grid, "init half-angle magnitudes (deg), or none");
    rec.option(app, "grid-size", grid_size, "template samples per side");
    rec.option(app, "extent", extent, "template half-extent (radii)");
    rec.option(app, "ramp-width", ramp_width, "template ramp width");
    rec.option(app, "slices", slices, "robust vesselness slices");
    rec.flag(app, "robust", robust, "minimum over slices");
    rec.flag(app, "no-bifurc", no_bifurc, "lambda2 = 0, half-angles frozen at 0");
    rec.flag(app, "no-track", no_track, "skip the tracking score (U = V)");
  }

  EnhanceConfig build(int width, int height) const {
    EnhanceConfig cfg;
    as_usage([&] {
      ParamBounds b = ParamBounds::for_image(width, height);
      b.r_min = r_min;
      if (auto v = parse_auto(r_max, "r-max")) b.r_max = *v;
      if (!(b.r_min > 0.0) || !(b.r_max >= b.r_min)) throw std::invalid_argument("need 0 < r-min <= r-max");
      cfg.bounds = b;
      cfg.optim.radii_grid = OptimConfig::log_spaced(b.r_min, b.r_max, n_radii);
      cfg.optim.angle_grid = OptimConfig::uniform_angles(n_angles);
      for (double deg : parse_list(theta_grid, "theta-grid")) {
        cfg.optim.theta_grid.push_back(deg * std::numbers::pi / 180.0);
      }
      cfg.optim.iters = iters;
      cfg.optim.step_r = step_r;
      cfg.optim.step_angle = step_angle;
      cfg.optim.fd_h_r = fd_h_r;
      cfg.optim.fd_h_angle = fd_h_angle;
      cfg.optim.max_halvings = max_halvings;
      cfg.loss.lambda1 = lambda1;
      cfg.loss.lambda2 = lambda2;
      cfg.loss.lambda3 = lambda3;
      cfg.loss.path_steps = path_steps;
      cfg.loss.track_steps = track_steps;
      cfg.robust = robust;
      cfg.bifurcation = !no_bifurc;
      cfg.track = !no_track;
      cfg.validate();
    });
    return cfg;
  }

  TubeTemplate make() const {
    TubeTemplate t;
    as_usage([&] { t = make_slices(make_template(grid_size, extent, ramp_width), slices); });
    return t;
  }
};

struct FrangiFlags {
  std::string sigmas = "1,2,3,4";
  double beta = 0.5;
  std::string c = "auto";
  std::string polarity = "bright";

  void add(CLI::App* app, Recorder& rec) {
    rec.option(app, "sigmas", sigmas, "comma-separated scales");
    rec.option(app, "beta", beta, "blob sensitivity");
    rec.option(app, "c", c, "structureness sensitivity, or auto");
    rec.option(app, "polarity", polarity, "bright or dark vessels")->check(CLI::IsMember({"bright", "dark"}));
  }

  FrangiConfig build() const {
    FrangiConfig cfg;
    as_usage([&] {
      cfg.sigmas = parse_list(sigmas, "sigmas");
      cfg.beta = beta;
      cfg.c = parse_auto(c, "c");
      cfg.polarity = polarity == "dark" ? Polarity::dark : Polarity::bright;
      cfg.validate();
    });
    return cfg;
  }
};

std::string loss_lines(const std::vector<LossReport>& history) {
  std::string s;
  for (const LossReport& r : history) s += to_json(r) + "\n";
  return s;
}

// ---- commands --------------------------------------------------------------

struct Command {
  CLI::App* app = nullptr;
  Recorder rec;
  std::function<void(Manifest&)> run;
};

void add_synth(CLI::App& root, Command& cmd) {
  auto* app = root.add_subcommand("synth", "generate a synthetic vessel tree");
  cmd.app = app;
  auto st = std::make_shared<std::tuple<std::string, SceneFlags, double, std::string>>();
  auto& [out, scene, sigma, noise] = *st;
  noise = "auto";
  cmd.rec.option(app, "out", out, "output directory")->required();
  cmd.rec.option(app, "seed", scene.cfg.seed, "tree seed");
  cmd.rec.option(app, "sigma", sigma, "Gaussian noise std")->check(CLI::NonNegativeNumber);
  cmd.rec.option(app, "noise-seed", noise, "noise seed, or auto");
  scene.add(app, cmd.rec);
  cmd.run = [st](Manifest& m) {
    auto& [out, scene, sigma, noise] = *st;
    as_usage([&] { scene.cfg.validate(); });
    std::uint64_t nseed = noise_seed(scene.cfg.seed, 0);
    if (noise != "auto") {
      const auto [p, ec] = std::from_chars(noise.data(), noise.data() + noise.size(), nseed);
      if (ec != std::errc() || p != noise.data() + noise.size()) throw UsageError("noise-seed: bad value");
    }
    SyntheticScene s = generate_tree(scene.cfg);
    s.image = add_gaussian_noise(s.image, sigma, nseed);
    make_output_dir(out);
    write_scene(s, out);
    m.seeds = {scene.cfg.seed, nseed};
    m.outputs = {"image.pgm", "mask.pgm", "segments.json", "bifurc_boxes.json"};
  };
}

void add_enhance(CLI::App& root, Command& cmd, std::ostream& log) {
  auto* app = root.add_subcommand("enhance", "estimate vessel fields and vesselness maps");
  cmd.app = app;
  auto st = std::make_shared<std::tuple<std::string, std::string, bool, EnhanceFlags>>();
  auto& [image, out, invert, flags] = *st;
  cmd.rec.option(app, "image", image, "input image (PGM or TFF1)")->required();
  cmd.rec.option(app, "out", out, "output directory")->required();
  cmd.rec.flag(app, "invert", invert, "dark vessels: use 1 - image");
  flags.add(app, cmd.rec);
  cmd.run = [st, &log](Manifest& m) {
    auto& [image, out, invert, flags] = *st;
    const TubeTemplate t = flags.make();
    ScalarField2D img = read_image(image);
    if (invert) img = inverted(std::move(img));
    const EnhanceConfig cfg = flags.build(img.width(), img.height());
    const EnhanceResult res = enhance(img, t, cfg);
    make_output_dir(out);
    const fs::path dir(out);
    write_f32(res.params.channels(), dir / "params.tff");
    write_f32(res.vesselness, dir / "vesselness.tff");
    write_f32(res.augmented, dir / "augmented.tff");
    write_text(dir / "loss.jsonl", loss_lines(res.history));
    if (!res.history.empty()) log << "final loss " << format_number(res.history.back().total) << "\n";
    m.inputs = {image};
    m.outputs = {"params.tff", "vesselness.tff", "augmented.tff", "loss.jsonl"};
  };
}

void add_frangi(CLI::App& root, Command& cmd) {
  auto* app = root.add_subcommand("frangi", "multi-scale Frangi vesselness");
  cmd.app = app;
  auto st = std::make_shared<std::tuple<std::string, std::string, bool, FrangiFlags>>();
  auto& [image, out, invert, flags] = *st;
  cmd.rec.option(app, "image", image, "input image (PGM or TFF1)")->required();
  cmd.rec.option(app, "out", out, "output directory")->required();
  cmd.rec.flag(app, "invert", invert, "use 1 - image");
  flags.add(app, cmd.rec);
  cmd.run = [st](Manifest& m) {
    auto& [image, out, invert, flags] = *st;
    const FrangiConfig cfg = flags.build();
    ScalarField2D img = read_image(image);
    if (invert) img = inverted(std::move(img));
    const ScalarField2D v = frangi2d(img, cfg);
    make_output_dir(out);
    write_f32(v, fs::path(out) / "frangi.tff");
    m.inputs = {image};
    m.outputs = {"frangi.tff"};
  };
}

struct EvalFlags {
  std::string scores, gt, fov, boxes, out, threshold_from;
  std::string threshold = "auto";
  std::string scores_name = "augmented.tff", gt_name = "mask.pgm";
  int dilation = 2;
};

// Pooled best threshold over the subdirectories of `dir`.
double threshold_from_dir(const fs::path& dir, const std::string& scores_name, const std::string& gt_name,
                          std::vector<std::string>& inputs) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / scores_name) && fs::exists(e.path() / gt_name)) {
      subdirs.push_back(e.path());
    }
  }
  if (subdirs.empty()) throw IoError("no training pairs under " + dir.string());
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<ScalarField2D> s;
  std::vector<BinaryMask> g;
  for (const auto& d : subdirs) {
    s.push_back(read_image(d / scores_name));
    g.push_back(read_mask_pgm(d / gt_name));
    inputs.push_back((d / scores_name).string());
    inputs.push_back((d / gt_name).string());
  }
  return best_threshold(s, g).threshold;
}

void add_eval(CLI::App& root, Command& cmd, std::ostream& stdout_) {
  auto* app = root.add_subcommand("eval", "score a vesselness map against ground truth");
  cmd.app = app;
  auto st = std::make_shared<EvalFlags>();
  EvalFlags& f = *st;
  cmd.rec.option(app, "scores", f.scores, "score map (TFF1 or PGM)")->required();
  cmd.rec.option(app, "gt", f.gt, "ground-truth mask PGM")->required();
  cmd.rec.option(app, "out", f.out, "output directory")->required();
  cmd.rec.option(app, "fov", f.fov, "field-of-view mask PGM");
  cmd.rec.option(app, "boxes", f.boxes, "bifurcation boxes JSON");
  cmd.rec.option(app, "threshold", f.threshold, "fixed threshold, or auto");
  cmd.rec.option(app, "threshold-from", f.threshold_from,
                              "training directory: best pooled Dice over its subdirectories");
  cmd.rec.option(app, "scores-name", f.scores_name, "score file name inside training subdirectories");
  cmd.rec.option(app, "gt-name", f.gt_name, "mask file name inside training subdirectories");
  cmd.rec.option(app, "dilation", f.dilation, "local-accuracy dilation radius")->check(CLI::PositiveNumber);
  cmd.run = [st, &stdout_](Manifest& m) {
    EvalFlags& f = *st;
    const std::optional<double> fixed = parse_auto(f.threshold, "threshold");
    if (fixed && !f.threshold_from.empty()) throw UsageError("--threshold and --threshold-from are exclusive");
    const ScalarField2D scores = read_image(f.scores);
    const BinaryMask gt = read_mask_pgm(f.gt);
    std::vector<std::string> inputs{f.scores, f.gt};
    std::optional<BinaryMask> fov;
    if (!f.fov.empty()) {
      fov = read_mask_pgm(f.fov);
      inputs.push_back(f.fov);
    }
    std::vector<BifurcationBox> boxes;
    if (!f.boxes.empty()) {
      boxes = read_boxes(f.boxes);
      inputs.push_back(f.boxes);
    }
    if (!scores.same_shape(gt.to_field()) || (fov && !fov->same_shape(gt))) {
      throw std::runtime_error("eval: input sizes differ");
    }
    const BinaryMask* fov_ptr = fov ? &*fov : nullptr;
    double threshold = 0.0;
    if (fixed) {
      threshold = *fixed;
    } else if (!f.threshold_from.empty()) {
      threshold = threshold_from_dir(f.threshold_from, f.scores_name, f.gt_name, inputs);
    } else {
      threshold = best_threshold(scores, gt, fov_ptr).threshold;
    }
    const EvalReport report = evaluate(scores, gt, threshold, fov_ptr, f.dilation, boxes);
    const std::string text = to_json(report);
    make_output_dir(f.out);
    write_text(fs::path(f.out) / "report.json", text + "\n");
    stdout_ << text << "\n";
    m.inputs = inputs;
    m.outputs = {"report.json"};
  };
}

void add_bench_noise(CLI::App& root, Command& cmd, std::ostream& stdout_) {
  auto* app = root.add_subcommand("bench-noise", "noise sweep: ours vs Frangi on synthetic trees");
  cmd.app = app;
  struct State {
    std::string out;
    int scenes = 5;
    std::uint64_t seed = 1;
    std::string sigmas = "0,0.1,0.2,0.3,0.4";
    int dilation = 2;
    SceneFlags scene;
    EnhanceFlags enhance;
    FrangiFlags frangi;
  };
  auto st = std::make_shared<State>();
  st->enhance.iters = 5;
  st->enhance.robust = true;
  cmd.rec.option(app, "out", st->out, "output directory")->required();
  cmd.rec.option(app, "scenes", st->scenes, "training and test scenes per sigma")->check(CLI::PositiveNumber);
  cmd.rec.option(app, "seed", st->seed, "base seed");
  cmd.rec.option(app, "noise-sigmas", st->sigmas, "comma-separated noise levels");
  cmd.rec.option(app, "dilation", st->dilation, "local-accuracy dilation radius")->check(CLI::PositiveNumber);
  st->scene.add(app, cmd.rec);
  st->enhance.add(app, cmd.rec);
  st->frangi.add(app, cmd.rec);
  cmd.run = [st, &stdout_](Manifest& m) {
    NoiseBenchConfig cfg;
    cfg.scenes = st->scenes;
    cfg.seed = st->seed;
    cfg.dilation_radius = st->dilation;
    cfg.scene = st->scene.cfg;
    cfg.sigmas = parse_list(st->sigmas, "noise-sigmas");
    cfg.enhance = st->enhance.build(cfg.scene.width, cfg.scene.height);
    cfg.frangi = st->frangi.build();
    as_usage([&] { cfg.validate(); });
    const TubeTemplate t = st->enhance.make();
    const auto rows = run_noise_bench(cfg, t);
    std::string csv = csv_header() + "\n";
    for (const CsvRow& r : rows) csv += to_csv(r) + "\n";
    make_output_dir(st->out);
    write_text(fs::path(st->out) / "bench_noise.csv", csv);
    stdout_ << csv;
    m.seeds = {cfg.seed};
    m.outputs = {"bench_noise.csv"};
  };
}

void add_bench_bifurc(CLI::App& root, Command& cmd, std::ostream& stdout_) {
  auto* app = root.add_subcommand("bench-bifurc", "bifurcation ablation: box Dice with and without L_b");
  cmd.app = app;
  struct State {
    std::string out;
    int train_scenes = 5, test_scenes = 10;
    std::uint64_t seed = 1;
    double sigma = 0.0;
    SceneFlags scene;
    EnhanceFlags enhance;
  };
  auto st = std::make_shared<State>();
  st->enhance.iters = 5;
  st->enhance.robust = true;
  cmd.rec.option(app, "out", st->out, "output directory")->required();
  cmd.rec.option(app, "train-scenes", st->train_scenes, "threshold-selection trees")->check(CLI::PositiveNumber);
  cmd.rec.option(app, "test-scenes", st->test_scenes, "evaluation trees")->check(CLI::PositiveNumber);
  cmd.rec.option(app, "seed", st->seed, "base seed");
  cmd.rec.option(app, "sigma", st->sigma, "Gaussian noise std")->check(CLI::NonNegativeNumber);
  st->scene.add(app, cmd.rec);
  st->enhance.add(app, cmd.rec);
  cmd.run = [st, &stdout_](Manifest& m) {
    AblationConfig cfg;
    cfg.train_scenes = st->train_scenes;
    cfg.test_scenes = st->test_scenes;
    cfg.seed = st->seed;
    cfg.sigma = st->sigma;
    cfg.scene = st->scene.cfg;
    cfg.enhance = st->enhance.build(cfg.scene.width, cfg.scene.height);
    as_usage([&] { cfg.validate(); });
    const AblationResult res = run_bifurcation_ablation(cfg, st->enhance.make());
    json j;
    j["with"] = json::parse(to_json(res.with_bifurcation));
    j["without"] = json::parse(to_json(res.without_bifurcation));
    j["gap"] = res.gap();
    j["bb_with"] = res.bb_with;
    j["bb_without"] = res.bb_without;
    make_output_dir(st->out);
    write_text(fs::path(st->out) / "bench_bifurc.json", j.dump(2) + "\n");
    stdout_ << "bb_dice with " << format_number(*res.with_bifurcation.bb_dice) << " without "
            << format_number(*res.without_bifurcation.bb_dice) << " gap " << format_number(res.gap()) << "\n";
    m.seeds = {cfg.seed};
    m.outputs = {"bench_bifurc.json"};
  };
}

// Turns a manifest back into a command line.
std::vector<std::string> manifest_args(const json& m, const std::string& out_override) {
  if (!m.contains("command") || !m.contains("flags") || !m["flags"].is_object()) {
    throw FormatError("manifest: missing command or flags");
  }
  std::vector<std::string> args{"tubeflow", m["command"].get<std::string>()};
  for (const auto& [name, value] : m["flags"].items()) {
    std::string v;
    if (name == "out" && !out_override.empty()) {
      v = out_override;
    } else if (value.is_boolean()) {
      args.push_back("--" + name + "=" + (value.get<bool>() ? "true" : "false"));
      continue;
    } else if (value.is_string()) {
      v = value.get<std::string>();
      if (v.empty()) continue;
    } else if (value.is_number_float()) {
      v = format_number(value.get<double>());
    } else if (value.is_number()) {
      v = value.dump();
    } else {
      throw FormatError("manifest: unsupported value for " + name);
    }
    args.push_back("--" + name);
    args.push_back(v);
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tubeflow: self-supervised vessel enhancement"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);

  std::vector<std::unique_ptr<Command>> commands;
  auto next = [&] { return commands.emplace_back(std::make_unique<Command>()).get(); };
  add_synth(app, *next());
  add_enhance(app, *next(), err);
  add_frangi(app, *next());
  add_eval(app, *next(), out);
  add_bench_noise(app, *next(), out);
  add_bench_bifurc(app, *next(), out);

  auto* replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  std::string manifest_path, replay_out;
  replay->add_option("--manifest", manifest_path, "manifest.json to replay")->required();
  replay->add_option("--out", replay_out, "write to this directory instead");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  if (threads > 0) set_worker_count(threads);

  try {
    if (replay->parsed()) {
      const json m = json::parse(read_text(manifest_path), nullptr, true);
      return run(manifest_args(m, replay_out), out, err);
    }
    for (auto& cmd : commands) {
      if (!cmd->app->parsed()) continue;
      Manifest m;
      m.command = cmd->app->get_name();
      m.flags = cmd->rec.resolved();
      cmd->run(m);
      write_manifest(m.flags["out"].get<std::string>(), m);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace tubeflow::cli
