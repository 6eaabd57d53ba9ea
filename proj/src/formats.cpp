#include "deid/formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "deid/error.hpp"

namespace deid {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

// Line-oriented CSV reader with per-line byte offsets for diagnostics.
struct CsvLine {
  std::vector<std::string> fields;
  std::size_t line_number = 0;
  std::size_t offset = 0;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<CsvLine> read_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<CsvLine> lines;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++line_no;
    const std::string raw = trim(text.substr(pos, end - pos));
    if (!raw.empty()) {
      CsvLine line;
      line.line_number = line_no;
      line.offset = pos;
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = raw.find(',', start);
        line.fields.push_back(trim(raw.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      lines.push_back(std::move(line));
    }
    pos = end + 1;
  }
  // Strip a UTF-8 byte-order mark from the header.
  if (!lines.empty() && lines.front().fields.front().rfind("\xEF\xBB\xBF", 0) == 0)
    lines.front().fields.front().erase(0, 3);
  return lines;
}

[[noreturn]] void csv_fail(const std::filesystem::path& path, const CsvLine& line,
                           const std::string& what) {
  throw ParseError(path.string(), "line " + std::to_string(line.line_number) + ": " + what,
                   line.offset);
}

double parse_double(const std::filesystem::path& path, const CsvLine& line,
                    const std::string& field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    csv_fail(path, line, "invalid number '" + field + "'");
  return v;
}

int parse_int(const std::filesystem::path& path, const CsvLine& line, const std::string& field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    csv_fail(path, line, "invalid integer '" + field + "'");
  return v;
}

void expect_header(const std::filesystem::path& path, const std::vector<CsvLine>& lines,
                   const std::vector<std::string>& header) {
  if (lines.empty()) throw ParseError(path.string(), "missing header", 0);
  if (lines.front().fields != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    csv_fail(path, lines.front(), "expected header '" + want + "'");
  }
}

double bbox_area(const KeypointInstance& kp) {
  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  bool any = false;
  for (const Keypoint& p : kp.points) {
    if (p.confidence <= 0.0) continue;
    any = true;
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  return any ? (max_x - min_x) * (max_y - min_y) : 0.0;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorKind::internal, "float formatting failed");
  return std::string(buf, ptr);
}

KeypointInstance parse_pose_json_text(const std::string& text, const std::string& frame_id,
                                      const std::string& source_name,
                                      const PoseParseOptions& options) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name, std::string("malformed JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("people") || !doc["people"].is_array())
    throw ParseError(source_name, "expected an object with a 'people' array");
  const json& people = doc["people"];
  if (people.empty()) throw ParseError(source_name, "no people detected");
  if (people.size() > 1 && !options.select_largest)
    throw ParseError(source_name, std::to_string(people.size()) +
                                      " people detected; pass --select-largest to keep one");

  std::vector<KeypointInstance> parsed;
  for (std::size_t n = 0; n < people.size(); ++n) {
    const json& person = people[n];
    if (!person.is_object() || !person.contains("pose_keypoints_2d") ||
        !person["pose_keypoints_2d"].is_array())
      throw ParseError(source_name, "person " + std::to_string(n) + " lacks 'pose_keypoints_2d'");
    const json& flat = person["pose_keypoints_2d"];
    if (flat.size() % 3 != 0)
      throw ParseError(source_name, "pose_keypoints_2d length " + std::to_string(flat.size()) +
                                        " is not a multiple of 3");
    KeypointInstance inst;
    inst.frame_id = frame_id;
    const std::size_t triples = flat.size() / 3;
    if (triples == kBody25Keypoints)
      inst.skeleton = Skeleton::body25;
    else if (triples == kCocoKeypoints)
      inst.skeleton = Skeleton::coco17;
    else
      throw ParseError(source_name, "unexpected keypoint count " + std::to_string(triples) +
                                        " (expected 17 or 25)");
    for (std::size_t i = 0; i < triples; ++i) {
      for (std::size_t k = 0; k < 3; ++k)
        if (!flat[3 * i + k].is_number())
          throw ParseError(source_name, "non-numeric keypoint value at index " +
                                            std::to_string(3 * i + k));
      inst.points.push_back({flat[3 * i].get<double>(), flat[3 * i + 1].get<double>(),
                             flat[3 * i + 2].get<double>()});
    }
    try {
      inst.validate();
    } catch (const DataError& e) {
      throw ParseError(source_name, e.what());
    }
    parsed.push_back(std::move(inst));
  }

  std::size_t best = 0;
  for (std::size_t n = 1; n < parsed.size(); ++n)
    if (bbox_area(parsed[n]) > bbox_area(parsed[best])) best = n;
  return parsed[best];
}

KeypointInstance parse_pose_json(const std::filesystem::path& path,
                                 const PoseParseOptions& options) {
  return parse_pose_json_text(read_text(path), path.stem().string(), path.string(), options);
}

std::string pose_json_text(const std::vector<KeypointInstance>& people) {
  json doc;
  doc["version"] = 1.3;
  doc["people"] = json::array();
  for (const KeypointInstance& kp : people) {
    json flat = json::array();
    for (const Keypoint& p : kp.points) {
      flat.push_back(p.x);
      flat.push_back(p.y);
      flat.push_back(p.confidence);
    }
    doc["people"].push_back({{"pose_keypoints_2d", flat}});
  }
  return doc.dump() + "\n";
}

void write_pose_json(const KeypointInstance& instance, const std::filesystem::path& path) {
  write_text(path, pose_json_text({instance}));
}

FaceBoxManifest parse_facebox_manifest(const std::filesystem::path& path) {
  const auto lines = read_csv(path);
  expect_header(path, lines, {"frame_id", "x", "y", "w", "h"});
  FaceBoxManifest manifest;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const CsvLine& line = lines[i];
    if (line.fields.size() != 5) csv_fail(path, line, "expected 5 fields");
    FaceBox box;
    box.frame_id = line.fields[0];
    if (box.frame_id.empty()) csv_fail(path, line, "empty frame_id");
    box.x = parse_int(path, line, line.fields[1]);
    box.y = parse_int(path, line, line.fields[2]);
    box.w = parse_int(path, line, line.fields[3]);
    box.h = parse_int(path, line, line.fields[4]);
    if (box.w < 1 || box.h < 1) csv_fail(path, line, "box width and height must be >= 1");
    if (!manifest.emplace(box.frame_id, box).second)
      csv_fail(path, line, "duplicate frame_id '" + box.frame_id + "'");
  }
  return manifest;
}

void write_facebox_manifest(const FaceBoxManifest& manifest, const std::filesystem::path& path) {
  std::string out = "frame_id,x,y,w,h\n";
  for (const auto& [id, b] : manifest)
    out += id + "," + std::to_string(b.x) + "," + std::to_string(b.y) + "," +
           std::to_string(b.w) + "," + std::to_string(b.h) + "\n";
  write_text(path, out);
}

std::vector<FaceDescriptor> read_descriptor_csv(const std::filesystem::path& path) {
  const auto lines = read_csv(path);
  if (lines.empty()) throw ParseError(path.string(), "missing header", 0);
  const auto& header = lines.front().fields;
  if (header.size() < 3 || header[0] != "id" || header[1] != "subset")
    csv_fail(path, lines.front(), "expected header 'id,subset,d0,...'");
  const std::size_t dim = header.size() - 2;
  for (std::size_t k = 0; k < dim; ++k)
    if (header[k + 2] != "d" + std::to_string(k))
      csv_fail(path, lines.front(), "expected column 'd" + std::to_string(k) + "'");

  std::vector<FaceDescriptor> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const CsvLine& line = lines[i];
    if (line.fields.size() != header.size())
      csv_fail(path, line, "expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(line.fields.size()));
    FaceDescriptor d;
    d.id = line.fields[0];
    d.subset = line.fields[1];
    if (d.id.empty() || d.subset.empty()) csv_fail(path, line, "empty id or subset");
    d.vector.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) d.vector.push_back(parse_double(path, line, line.fields[k + 2]));
    out.push_back(std::move(d));
  }
  return out;
}

void write_descriptor_csv(const std::vector<FaceDescriptor>& descriptors,
                          const std::filesystem::path& path) {
  const std::size_t dim = descriptors.empty() ? 0 : descriptors.front().vector.size();
  std::string out = "id,subset";
  for (std::size_t k = 0; k < dim; ++k) out += ",d" + std::to_string(k);
  out += "\n";
  for (const FaceDescriptor& d : descriptors) {
    if (d.vector.size() != dim) throw DataError("descriptor dimensions differ");
    out += d.id + "," + d.subset;
    for (double v : d.vector) out += "," + format_double(v);
    out += "\n";
  }
  write_text(path, out);
}

std::map<std::string, std::vector<FaceDescriptor>> group_by_subset(
    const std::vector<FaceDescriptor>& descriptors) {
  std::map<std::string, std::vector<FaceDescriptor>> groups;
  for (const FaceDescriptor& d : descriptors) {
    if (d.vector.size() != descriptors.front().vector.size())
      throw DataError("descriptor '" + d.id + "' has dimension " +
                      std::to_string(d.vector.size()) + ", expected " +
                      std::to_string(descriptors.front().vector.size()));
    groups[d.subset].push_back(d);
  }
  return groups;
}

std::map<std::string, std::string> read_pairing_csv(const std::filesystem::path& path) {
  const auto lines = read_csv(path);
  expect_header(path, lines, {"swapped_id", "original_id"});
  std::map<std::string, std::string> pairing;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const CsvLine& line = lines[i];
    if (line.fields.size() != 2) csv_fail(path, line, "expected 2 fields");
    if (!pairing.emplace(line.fields[0], line.fields[1]).second)
      csv_fail(path, line, "duplicate swapped_id '" + line.fields[0] + "'");
  }
  return pairing;
}

void write_pairing_csv(const std::map<std::string, std::string>& pairing,
                       const std::filesystem::path& path) {
  std::string out = "swapped_id,original_id\n";
  for (const auto& [s, o] : pairing) out += s + "," + o + "\n";
  write_text(path, out);
}

}  // namespace deid
