#include "deid/report.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "deid/error.hpp"
#include "deid/formats.hpp"
#include "deid/svg.hpp"

namespace deid {

using nlohmann::json;

namespace {

json mean_std_json(const MeanStd& ms) { return {{"mean", ms.mean}, {"std", ms.std}}; }

json optional_mean_std(const std::optional<MeanStd>& ms) {
  return ms ? mean_std_json(*ms) : json(nullptr);
}

json histogram_json(const Histogram& h) {
  json edges = json::array();
  for (std::size_t i = 0; i <= Histogram::kBins; ++i) edges.push_back(Histogram::edge(i));
  return {{"edges", edges}, {"counts", h.counts}, {"total", h.total()}};
}

json method_json(const MethodEval& m) {
  const EvalSummary& s = m.summary;
  json by_threshold = json::array();
  for (std::size_t i = 0; i < s.thresholds.size(); ++i)
    by_threshold.push_back({{"threshold", s.thresholds[i]}, {"ap", s.ap[i]}, {"ar", s.ar[i]}});
  json keypoints = json::object();
  for (std::size_t i = 0; i < kCocoKeypoints; ++i)
    keypoints[std::string(kCocoKeypointNames[i])] = {{"counts", s.keypoint_histograms[i].counts},
                                                     {"total", s.keypoint_histograms[i].total()}};
  return {{"ap_mean", s.ap_mean},
          {"ar_mean", s.ar_mean},
          {"mode", s.mode == ApMode::fraction ? "fraction" : "ranked"},
          {"by_threshold", by_threshold},
          {"evaluable", s.evaluable},
          {"unevaluable_frames", s.unevaluable},
          {"unmatched_frames", m.unmatched_frames},
          {"oks_histogram", histogram_json(s.oks_histogram)},
          {"keypoint_histograms", keypoints}};
}

json identity_json(const IdentityEval& id) {
  json rows = json::array();
  for (const DistanceRow& r : id.table.rows)
    rows.push_back({{"subset", r.subset},
                    {"count", r.count},
                    {"intra_subset", mean_std_json(r.intra)},
                    {"to_original", optional_mean_std(r.to_original)},
                    {"to_average_original", optional_mean_std(r.to_average_original)},
                    {"to_average_target", optional_mean_std(r.to_average_target)}});
  json far = json::array(), tar = json::array();
  for (const RocPoint& p : id.roc.points) {
    far.push_back(p.far);
    tar.push_back(p.tar);
  }
  json verification = json::array();
  for (const auto& v : id.verification)
    verification.push_back({{"subset", v.subset},
                            {"count", v.count},
                            {"matches_target", v.matches_target},
                            {"matches_original", v.matches_original}});
  json embedding = json::array();
  for (const auto& e : id.embedding)
    embedding.push_back({{"id", e.id}, {"subset", e.subset}, {"x", e.point[0]}, {"y", e.point[1]}});
  const bool fully = std::isinf(id.separation);
  return {{"target_subset", id.table.target_subset},
          {"distance_table", rows},
          {"roc", {{"far", far}, {"tar", tar}, {"thresholds", id.roc.thresholds}, {"auc", id.roc.auc}}},
          {"threshold", id.threshold},
          {"verification", verification},
          {"cluster_separation", fully ? json(nullptr) : json(id.separation)},
          {"fully_separated", fully},
          {"embedding", embedding}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

std::string ms_cells(const std::optional<MeanStd>& ms) {
  return ms ? format_double(ms->mean) + "," + format_double(ms->std) : ",";
}

}  // namespace

std::string report_json(const Report& report) {
  json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["provenance"] = {{"tool_version", report.provenance.tool_version},
                       {"config_sha256", report.provenance.config_sha256},
                       {"seed", report.provenance.seed},
                       {"input_counts", report.provenance.input_counts}};
  json deid = json::object();
  for (const DeidLog& log : report.deid)
    deid[log.method] = {{"inputs", log.inputs},
                        {"processed", log.processed},
                        {"skipped", log.skipped},
                        {"skipped_frames", log.skipped_frames}};
  doc["deid"] = deid;
  if (report.swap) {
    const SwapSummary& s = *report.swap;
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    doc["swap"] = {{"steps", s.steps},
                   {"batch_size", s.batch_size},
                   {"learning_rate", s.learning_rate},
                   {"momentum", s.momentum},
                   {"model_seed", s.model_seed},
                   {"train_seed", s.train_seed},
                   {"initial_loss", opt(s.initial_loss)},
                   {"final_loss", opt(s.final_loss)},
                   {"swapped", s.swapped},
                   {"nearer_target", opt(s.nearer_target)},
                   {"latent_drift", opt(s.latent_drift)}};
  } else {
    doc["swap"] = nullptr;
  }
  json methods = json::object();
  for (const MethodEval& m : report.keypoints) methods[m.method] = method_json(m);
  doc["keypoints"] = methods;
  doc["identity"] = report.identity ? identity_json(*report.identity) : json(nullptr);
  return doc.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit_report(const Report& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    write_text(written.back(), text);
  };
  if (format == ReportFormat::json) {
    emit("report.json", report_json(report));
    return written;
  }

  if (!report.keypoints.empty()) {
    std::string eval = "method,threshold,ap,ar\n";
    std::string inst = "method,frame_id,oks,score\n";
    for (const MethodEval& m : report.keypoints) {
      const EvalSummary& s = m.summary;
      for (std::size_t i = 0; i < s.thresholds.size(); ++i)
        eval += m.method + "," + format_double(s.thresholds[i]) + "," + format_double(s.ap[i]) +
                "," + format_double(s.ar[i]) + "\n";
      eval += m.method + ",mean," + format_double(s.ap_mean) + "," + format_double(s.ar_mean) + "\n";
      for (const InstanceScore& is : s.instances)
        inst += m.method + "," + is.frame_id + "," + format_double(is.oks) + "," +
                format_double(is.score) + "\n";
    }
    emit("keypoint_eval.csv", eval);
    emit("instance_oks.csv", inst);
  }
  if (report.identity) {
    std::string table =
        "subset,count,intra_mean,intra_std,to_original_mean,to_original_std,"
        "to_average_original_mean,to_average_original_std,to_average_target_mean,"
        "to_average_target_std\n";
    for (const DistanceRow& r : report.identity->table.rows)
      table += r.subset + "," + std::to_string(r.count) + "," + ms_cells(r.intra) + "," +
               ms_cells(r.to_original) + "," + ms_cells(r.to_average_original) + "," +
               ms_cells(r.to_average_target) + "\n";
    emit("distance_table.csv", table);
    std::string roc = "threshold,far,tar\n";
    const RocCurve& curve = report.identity->roc;
    for (std::size_t i = 0; i < curve.points.size(); ++i)
      roc += format_double(curve.thresholds[i]) + "," + format_double(curve.points[i].far) + "," +
             format_double(curve.points[i].tar) + "\n";
    emit("roc.csv", roc);
  }
  return written;
}

std::vector<std::filesystem::path> emit_plots(const Report& report,
                                              const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    write_text(written.back(), text);
  };
  if (report.identity) {
    emit("roc.svg", svg::roc_curve(report.identity->roc));
    emit("embedding.svg", svg::embedding(report.identity->embedding));
  }
  if (!report.keypoints.empty()) {
    emit("oks_histogram.svg", svg::oks_histograms(report.keypoints));
    for (const MethodEval& m : report.keypoints)
      emit("keypoints_" + m.method + ".svg",
           svg::keypoint_histograms(m.method, m.summary.keypoint_histograms));
  }
  return written;
}

}  // namespace deid
