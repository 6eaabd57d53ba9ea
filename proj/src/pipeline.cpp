#include "deid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "deid/embedding.hpp"
#include "deid/error.hpp"
#include "deid/formats.hpp"
#include "deid/raster.hpp"
#include "deid/rng.hpp"
#include "deid/swap_model.hpp"
#include "deid/synth.hpp"
#include "deid/transforms.hpp"

namespace deid {

using nlohmann::json;

namespace {

bool is_raster_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

// Regular files in dir accepted by `keep`, sorted by file name.
template <typename Pred>
std::vector<fs::path> list_files(const fs::path& dir, Pred keep) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && keep(entry.path())) out.push_back(entry.path());
  if (ec) throw DataError(dir.string() + ": cannot list directory: " + ec.message());
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

void require_dir(const fs::path& p, const std::string& what) {
  if (!fs::is_directory(p)) throw ConfigError(what + " '" + p.string() + "' is not a directory");
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw ConfigError(what + " '" + p.string() + "' does not exist");
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(dir.string() + ": cannot create directory: " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

std::map<std::string, KeypointInstance> load_pose_dir(const fs::path& dir,
                                                      const PoseParseOptions& options) {
  std::map<std::string, KeypointInstance> out;
  for (const fs::path& p :
       list_files(dir, [](const fs::path& f) { return f.extension() == ".json"; })) {
    KeypointInstance kp = parse_pose_json(p, options);
    if (kp.skeleton == Skeleton::body25) kp = map_body25_to_coco17(kp);
    out.emplace(kp.frame_id, std::move(kp));
  }
  return out;
}

RasterImage face_to_raster(const Eigen::VectorXd& pixels) {
  RasterImage img(kFaceSide, kFaceSide, 1);
  for (int i = 0; i < kFacePixels; ++i)
    img.data()[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(std::lround(std::clamp(pixels(i), 0.0, 1.0) * 255.0));
  return img;
}

TinyFaceSample raster_to_face(const RasterImage& img, const std::string& name) {
  if (img.width() != kFaceSide || img.height() != kFaceSide || img.channels() != 1)
    throw DataError(name + ": swap inputs must be 16x16 single-channel images");
  TinyFaceSample s;
  for (int i = 0; i < kFacePixels; ++i)
    s.pixels(i) = img.data()[static_cast<std::size_t>(i)] / 255.0;
  return s;
}

Eigen::VectorXd pixel_centroid(std::span<const TinyFaceSample> samples, Identity id) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(kFacePixels);
  std::size_t n = 0;
  for (const auto& s : samples)
    if (s.identity == id) {
      c += s.pixels;
      ++n;
    }
  return n ? Eigen::VectorXd(c / static_cast<double>(n)) : c;
}

std::string deid_dir_name(DeidMethod m) { return m == DeidMethod::mask ? "masked" : "blurred"; }

json deid_log_json(const DeidLog& log) {
  return {{"method", log.method},
          {"inputs", log.inputs},
          {"processed", log.processed},
          {"skipped", log.skipped},
          {"skipped_frames", log.skipped_frames}};
}

}  // namespace

DeidLog run_deid(const DeidSection& section, DeidMethod method, const fs::path& out_dir) {
  const FaceBoxManifest manifest = parse_facebox_manifest(section.manifest);
  const auto frames = list_files(section.frames, is_raster_file);
  make_dirs(out_dir);

  DeidLog log;
  log.method = method == DeidMethod::mask ? "mask" : "blur";
  log.inputs = frames.size();
  for (const fs::path& frame : frames) {
    const std::string id = frame.stem().string();
    auto box = manifest.find(id);
    if (box == manifest.end()) {
      ++log.skipped;
      log.skipped_frames.push_back(id);
      continue;
    }
    const RasterImage img = read_raster(frame);
    const RasterImage out =
        method == DeidMethod::mask ? apply_mask(img, box->second) : apply_blur(img, box->second);
    write_raster(out, out_dir / frame.filename());
    ++log.processed;
  }
  return log;
}

std::vector<MethodEval> evaluate_keypoints(const KeypointSection& section) {
  const PoseParseOptions options{section.select_largest};
  const auto original = load_pose_dir(section.original, options);
  if (original.empty())
    throw DataError(section.original.string() + ": no pose JSON files");

  std::vector<MethodEval> out;
  for (const auto& [name, dir] : section.methods) {
    const auto predicted = load_pose_dir(dir, options);
    MethodEval eval;
    eval.method = name;
    std::vector<KeypointPair> pairs;
    for (const auto& [id, gt] : original) {
      auto p = predicted.find(id);
      if (p == predicted.end()) {
        eval.unmatched_frames.push_back(id);
        continue;
      }
      pairs.push_back({gt, p->second});
    }
    for (const auto& [id, pred] : predicted)
      if (!original.count(id)) eval.unmatched_frames.push_back(id);
    std::sort(eval.unmatched_frames.begin(), eval.unmatched_frames.end());
    if (pairs.empty())
      throw DataError("method '" + name + "': no frames in common with the original poses");
    eval.summary = evaluate_set(pairs, section.oks, section.mode);
    out.push_back(std::move(eval));
  }
  return out;
}

IdentityEval evaluate_identity(const IdentitySection& section) {
  const auto descriptors = read_descriptor_csv(section.descriptors);
  if (descriptors.empty())
    throw DataError(section.descriptors.string() + ": no descriptors");

  DistanceTableRequest req;
  req.subsets = group_by_subset(descriptors);
  req.target_subset = section.target;
  req.pairing_mode = section.pairing_mode;
  if (section.pairing) req.pairing = read_pairing_csv(*section.pairing);
  if (!req.subsets.count(section.target))
    throw DataError("target subset '" + section.target + "' not present in " +
                    section.descriptors.string());
  const std::string prefix = "swapped_";
  for (const auto& [label, members] : req.subsets) {
    if (label.rfind(prefix, 0) != 0) continue;
    const std::string original = "original_" + label.substr(prefix.size());
    if (!req.subsets.count(original))
      throw DataError("swapped subset '" + label + "' has no matching '" + original + "'");
    req.swaps.push_back({label, original});
  }
  if (req.swaps.empty()) throw DataError("no 'swapped_*' subsets in " + section.descriptors.string());

  IdentityEval eval;
  eval.threshold = section.threshold;
  eval.table = distance_table(req);
  const RocInputs roc_in = swap_roc_inputs(req);
  eval.roc = roc(roc_in.genuine, roc_in.impostor);

  const Vector target_centroid = centroid(req.subsets.at(req.target_subset));
  for (const SwapRole& role : req.swaps) {
    const Vector original_centroid = centroid(req.subsets.at(role.original));
    SubsetVerification v;
    v.subset = role.swapped;
    for (const FaceDescriptor& d : req.subsets.at(role.swapped)) {
      ++v.count;
      v.matches_target += verify_identity(d.vector, target_centroid, section.threshold);
      v.matches_original += verify_identity(d.vector, original_centroid, section.threshold);
    }
    eval.verification.push_back(v);
  }

  std::vector<std::vector<FaceDescriptor>> groups;
  std::vector<FaceDescriptor> ordered;
  for (const auto& [label, members] : req.subsets) {
    groups.push_back(members);
    ordered.insert(ordered.end(), members.begin(), members.end());
  }
  eval.separation = cluster_separation(groups);
  const auto points = pca_embed_2d(ordered);
  for (std::size_t i = 0; i < ordered.size(); ++i)
    eval.embedding.push_back({ordered[i].id, ordered[i].subset, points[i]});
  return eval;
}

// ---- synthetic dataset -----------------------------------------------------

namespace {

constexpr std::size_t kSynthFrames = 12;
constexpr std::size_t kSynthPoses = 150;
constexpr std::size_t kSynthDescriptorsPerSubset = 200;

RasterImage synth_frame(Rng& rng, FaceBox& box) {
  constexpr int kW = 96, kH = 72;
  RasterImage img(kW, kH, 3);
  const double base[3] = {rng.uniform(40, 120), rng.uniform(60, 140), rng.uniform(80, 160)};
  const double cx = rng.uniform(14, kW - 14), cy = rng.uniform(16, kH - 20);
  const double rx = rng.uniform(7, 11), ry = rng.uniform(9, 13);
  const double skin[3] = {rng.uniform(170, 230), rng.uniform(120, 180), rng.uniform(100, 150)};
  for (int y = 0; y < kH; ++y) {
    for (int x = 0; x < kW; ++x) {
      const double u = (x - cx) / rx, v = (y - cy) / ry;
      const bool face = u * u + v * v <= 1.0;
      const bool torso = std::abs(x - cx) < 1.6 * rx && y > cy + ry + 1;
      const bool eye = std::abs(std::abs(x - cx) - rx * 0.4) < 1.2 && std::abs(y - (cy - ry * 0.2)) < 1.2;
      for (int c = 0; c < 3; ++c) {
        double value = base[c] + 40.0 * y / kH + rng.uniform(-8, 8);
        if (torso) value = 60 + 30 * c;
        if (face) value = eye ? 30 : skin[c] + rng.uniform(-5, 5);
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
      }
    }
  }
  box.x = static_cast<int>(std::floor(cx - rx));
  box.y = static_cast<int>(std::floor(cy - ry));
  box.w = static_cast<int>(std::ceil(2 * rx)) + 1;
  box.h = static_cast<int>(std::ceil(2 * ry)) + 1;
  return img;
}

}  // namespace

void write_synthetic_dataset(const fs::path& dir, std::uint64_t seed) {
  make_dirs(dir / "frames");
  Rng rng(seed);

  FaceBoxManifest manifest;
  for (std::size_t i = 0; i < kSynthFrames; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "frame_%05zu", i);
    FaceBox box;
    box.frame_id = id;
    const RasterImage img = synth_frame(rng, box);
    write_raster(img, dir / "frames" / (std::string(id) + ".ppm"));
    // A few frames carry no detection, as if the face detector missed them.
    if (i % 5 != 3) manifest.emplace(box.frame_id, box);
  }
  write_facebox_manifest(manifest, dir / "manifest.csv");

  const FrameSize frame{640, 480};
  const auto original = gen_keypoint_instances(kSynthPoses, frame, seed + 11);
  const std::vector<std::pair<std::string, PerturbationModel>> methods = {
      {"swapped", {0.5, 0.5, 0.0, 0.0}},
      {"masked", {25.0, 0.5, 0.05, 0.0}},
      {"blurred", {25.0, 0.6, 0.08, 0.0}}};
  auto write_poses = [&](const std::string& name, const std::vector<KeypointInstance>& set) {
    const fs::path pose_dir = dir / "poses" / name;
    make_dirs(pose_dir);
    for (const KeypointInstance& kp : set)
      write_pose_json(lift_coco17_to_body25(kp), pose_dir / (kp.frame_id + ".json"));
  };
  write_poses("original", original);
  std::uint64_t method_seed = seed + 12;
  for (const auto& [name, model] : methods)
    write_poses(name, perturb_keypoints(original, model, method_seed++));

  SwapGeometry geometry;
  geometry.count = kSynthDescriptorsPerSubset;
  const auto descriptors = gen_descriptor_clusters(swap_cluster_spec(geometry), seed + 20);
  write_descriptor_csv(descriptors, dir / "descriptors.csv");
  std::map<std::string, std::string> pairing;
  const std::string swapped = "swapped_", original_prefix = "original_";
  for (const FaceDescriptor& d : descriptors)
    if (d.subset == "swapped_F") pairing[d.id] = "original_F" + d.id.substr(d.subset.size());
  write_pairing_csv(pairing, dir / "pairing.csv");

  write_text(dir / "pipeline.ini",
             "[run]\n"
             "seed = " + std::to_string(seed) + "\n"
             "\n[deid]\n"
             "frames = frames\n"
             "manifest = manifest.csv\n"
             "\n[swap]\n"
             "steps = 300\n"
             "batch_size = 64\n"
             "samples_per_identity = 256\n"
             "held_out = 64\n"
             "\n[keypoints]\n"
             "original = poses/original\n"
             "mode = fraction\n"
             "\n[methods]\n"
             "swapped = poses/swapped\n"
             "masked = poses/masked\n"
             "blurred = poses/blurred\n"
             "\n[identity]\n"
             "descriptors = descriptors.csv\n"
             "pairing = pairing.csv\n"
             "target = original_A\n");
}

// ---- Pipeline --------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config, const RunOptions& options)
    : config_(std::move(config)) {
  if (options.seed) config_.seed = *options.seed;
  if (config_.keypoints) {
    if (options.mode) config_.keypoints->mode = *options.mode;
    if (options.select_largest) config_.keypoints->select_largest = *options.select_largest;
  }
  out_ = options.out ? *options.out : config_.out ? *config_.out : fs::path("deid-out");
  report_.provenance.tool_version = DEID_VERSION;
  report_.provenance.config_sha256 = config_.sha256;
  report_.provenance.seed = config_.seed;
}

const std::vector<std::string>& Pipeline::commands() {
  static const std::vector<std::string> kCommands = {
      "deid-mask",     "deid-blur", "swap-train", "swap-apply", "eval-keypoints",
      "eval-identity", "synth",     "report",     "run-all"};
  return kCommands;
}

void Pipeline::note(const std::string& line) { summary_ += line + "\n"; }

void Pipeline::require_deid() const {
  if (!config_.deid) throw ConfigError("this command needs a [deid] section");
  require_dir(config_.deid->frames, "[deid] frames");
  require_file(config_.deid->manifest, "[deid] manifest");
}

void Pipeline::require_keypoints() const {
  if (!config_.keypoints) throw ConfigError("this command needs a [keypoints] section");
  require_dir(config_.keypoints->original, "[keypoints] original");
  for (const auto& [name, dir] : config_.keypoints->methods)
    require_dir(dir, "[methods] " + name);
}

void Pipeline::require_identity() const {
  if (!config_.identity) throw ConfigError("this command needs an [identity] section");
  require_file(config_.identity->descriptors, "[identity] descriptors");
  if (config_.identity->pairing) require_file(*config_.identity->pairing, "[identity] pairing");
}

fs::path Pipeline::model_path() const {
  if (config_.swap && config_.swap->model) return *config_.swap->model;
  return out_ / "swap" / "model.bin";
}

void Pipeline::require_swap_model() const {
  require_file(model_path(), "swap model checkpoint");
  if (config_.swap && config_.swap->inputs) require_dir(*config_.swap->inputs, "[swap] inputs");
}

SwapSection Pipeline::swap_section() const {
  SwapSection s = config_.swap ? *config_.swap : SwapSection{};
  s.train.seed = config_.seed + 1;
  return s;
}

void Pipeline::run(std::string_view command) {
  if (command == "deid-mask") {
    require_deid();
    deid(DeidMethod::mask);
  } else if (command == "deid-blur") {
    require_deid();
    deid(DeidMethod::blur);
  } else if (command == "swap-train") {
    swap_train();
  } else if (command == "swap-apply") {
    require_swap_model();
    swap_apply();
  } else if (command == "eval-keypoints") {
    require_keypoints();
    eval_keypoints();
    write_report();
  } else if (command == "eval-identity") {
    require_identity();
    eval_identity();
    write_report();
  } else if (command == "report") {
    if (!config_.keypoints && !config_.identity)
      throw ConfigError("report needs a [keypoints] or [identity] section");
    if (config_.keypoints) require_keypoints();
    if (config_.identity) require_identity();
    if (config_.keypoints) eval_keypoints();
    if (config_.identity) eval_identity();
    write_report();
  } else if (command == "synth") {
    write_synthetic_dataset(out_, config_.seed);
    note("synth: dataset written to " + out_.string());
  } else if (command == "run-all") {
    run_all();
  } else {
    throw ConfigError("unknown command '" + std::string(command) + "'");
  }
}

void Pipeline::run_all() {
  if (config_.deid) require_deid();
  if (config_.keypoints) require_keypoints();
  if (config_.identity) require_identity();
  if (config_.swap && config_.swap->inputs) require_dir(*config_.swap->inputs, "[swap] inputs");
  if (config_.swap && config_.swap->model)
    throw ConfigError("run-all trains its own model; remove [swap] model");

  if (config_.deid) {
    deid(DeidMethod::mask);
    deid(DeidMethod::blur);
  }
  swap_train();
  swap_apply();
  if (config_.keypoints) eval_keypoints();
  if (config_.identity) eval_identity();
  write_report();
}

void Pipeline::deid(DeidMethod method) {
  const fs::path dir = out_ / deid_dir_name(method);
  DeidLog log = run_deid(*config_.deid, method, dir);
  write_text(dir / "log.json", deid_log_json(log).dump(2) + "\n");
  report_.provenance.input_counts["frames"] = log.inputs;
  note(log.method + ": " + std::to_string(log.processed) + " processed, " +
       std::to_string(log.skipped) + " skipped of " + std::to_string(log.inputs) + " frames");
  report_.deid.push_back(std::move(log));
}

void Pipeline::swap_train() {
  const SwapSection section = swap_section();
  section.train.validate();
  const auto dataset = gen_identity_dataset(default_identity_x(), default_identity_y(),
                                            section.samples_per_identity, config_.seed + 2);
  SwapModel model = init_model(config_.seed);
  const auto history = train(model, dataset, section.train);

  const fs::path dir = out_ / "swap";
  make_dirs(dir);
  save_checkpoint(model, dir / "model.bin");
  std::string csv = "step,loss_x,loss_y\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    csv += std::to_string(i) + "," + format_double(history[i].loss_x) + "," +
           format_double(history[i].loss_y) + "\n";
  write_text(dir / "loss.csv", csv);

  SwapSummary s;
  s.steps = section.train.steps;
  s.batch_size = section.train.batch_size;
  s.learning_rate = section.train.learning_rate;
  s.momentum = section.train.momentum;
  s.model_seed = model.seed;
  s.train_seed = section.train.seed;
  if (!history.empty()) {
    s.initial_loss = history.front().loss_x + history.front().loss_y;
    s.final_loss = history.back().loss_x + history.back().loss_y;
  }
  report_.swap = s;
  report_.provenance.input_counts["swap_training_samples"] = dataset.size();
  note("swap-train: " + std::to_string(s.steps) + " steps" +
       (s.final_loss ? ", final loss " + format_double(*s.final_loss) : ""));
}

void Pipeline::swap_apply() {
  const SwapSection section = swap_section();
  const SwapModel model = load_checkpoint(model_path());
  const fs::path dir = out_ / "swap";
  make_dirs(dir / "swapped");

  SwapSummary s = report_.swap.value_or(SwapSummary{});
  s.model_seed = model.seed;
  double drift = 0.0;
  std::size_t count = 0;
  auto apply = [&](const TinyFaceSample& sample, const std::string& id) {
    const Eigen::VectorXd out = swap(model, sample);
    write_raster(face_to_raster(out), dir / "swapped" / (id + ".pgm"));
    drift += (encode(model, out) - encode(model, sample.pixels)).norm();
    ++count;
    return out;
  };

  if (section.inputs) {
    for (const fs::path& p : list_files(*section.inputs, is_raster_file)) {
      TinyFaceSample sample = raster_to_face(read_raster(p), p.string());
      apply(sample, p.stem().string());
    }
  } else {
    // Held-out synthetic faces of both identities; X is swapped, Y only
    // supplies the pixel centroid for the nearer-target measurement.
    make_dirs(dir / "inputs");
    const auto held = gen_identity_dataset(default_identity_x(), default_identity_y(),
                                           std::max<std::size_t>(section.held_out, 1),
                                           config_.seed + 3);
    const Eigen::VectorXd cx = pixel_centroid(held, Identity::x);
    const Eigen::VectorXd cy = pixel_centroid(held, Identity::y);
    std::size_t nearer = 0, k = 0;
    for (const TinyFaceSample& sample : held) {
      if (sample.identity != Identity::x) continue;
      char id[32];
      std::snprintf(id, sizeof id, "face_%05zu", k++);
      write_raster(face_to_raster(sample.pixels), dir / "inputs" / (std::string(id) + ".pgm"));
      const Eigen::VectorXd out = apply(sample, id);
      if ((out - cy).norm() < (out - cx).norm()) ++nearer;
    }
    s.nearer_target = nearer;
  }
  s.swapped = count;
  if (count) s.latent_drift = drift / static_cast<double>(count);
  report_.swap = s;
  write_text(dir / "apply.json",
             json{{"swapped", s.swapped},
                  {"nearer_target", s.nearer_target ? json(*s.nearer_target) : json(nullptr)},
                  {"latent_drift", s.latent_drift ? json(*s.latent_drift) : json(nullptr)}}
                     .dump(2) + "\n");
  note("swap-apply: " + std::to_string(count) + " faces swapped" +
       (s.nearer_target ? ", " + std::to_string(*s.nearer_target) + " nearer the target identity"
                        : ""));
}

void Pipeline::eval_keypoints() {
  report_.keypoints = evaluate_keypoints(*config_.keypoints);
  std::size_t frames = 0;
  for (const MethodEval& m : report_.keypoints) {
    frames = std::max(frames, m.summary.evaluable + m.summary.unevaluable.size());
    char line[160];
    std::snprintf(line, sizeof line, "eval-keypoints: %s AP(0.5:0.95)=%.4f AR(0.5:0.95)=%.4f",
                  m.method.c_str(), m.summary.ap_mean, m.summary.ar_mean);
    note(line);
  }
  report_.provenance.input_counts["pose_frames"] = frames;
}

void Pipeline::eval_identity() {
  report_.identity = evaluate_identity(*config_.identity);
  report_.provenance.input_counts["descriptors"] = report_.identity->embedding.size();
  char line[120];
  std::snprintf(line, sizeof line, "eval-identity: ROC AUC=%.6f", report_.identity->roc.auc);
  note(line);
}

void Pipeline::write_report() {
  make_dirs(out_ / "tables");
  make_dirs(out_ / "plots");
  emit_report(report_, ReportFormat::json, out_);
  emit_report(report_, ReportFormat::csv, out_ / "tables");
  emit_plots(report_, out_ / "plots");
  note("report: " + (out_ / "report.json").string());
}

}  // namespace deid
