#include "deid/config.hpp"

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "deid/error.hpp"

namespace deid {

namespace pt = boost::property_tree;

namespace {

class Section {
 public:
  Section(const std::string& name, const pt::ptree& tree, const fs::path& base,
          std::set<std::string> allowed)
      : name_(name), tree_(tree), base_(base) {
    for (const auto& [key, value] : tree) {
      if (!allowed.count(key))
        throw ConfigError("unknown key '" + key + "' in section [" + name + "]");
      if (!value.empty()) throw ConfigError("nested keys are not supported in [" + name + "]");
    }
  }

  bool has(const std::string& key) const { return tree_.find(key) != tree_.not_found(); }

  std::string text(const std::string& key) const {
    auto it = tree_.find(key);
    if (it == tree_.not_found()) throw ConfigError("[" + name_ + "] missing key '" + key + "'");
    return it->second.data();
  }

  fs::path path(const std::string& key) const {
    const std::string v = text(key);
    if (v.empty()) throw ConfigError("[" + name_ + "] " + key + " is empty");
    const fs::path p(v);
    return p.is_absolute() ? p : base_ / p;
  }

  std::optional<fs::path> optional_path(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return path(key);
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? parse_number(key, text(key)) : fallback;
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw ConfigError("[" + name_ + "] " + key + ": expected a non-negative integer, got '" +
                        v + "'");
    return out;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("[" + name_ + "] " + key + ": expected true/false, got '" + v + "'");
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw ConfigError("[" + name_ + "] " + key + ": empty list item");
      out.push_back(parse_number(key, item.substr(b, e - b + 1)));
    }
    return out;
  }

  const pt::ptree& tree() const { return tree_; }

 private:
  double parse_number(const std::string& key, const std::string& v) const {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw ConfigError("[" + name_ + "] " + key + ": expected a number, got '" + v + "'");
    return out;
  }

  std::string name_;
  const pt::ptree& tree_;
  fs::path base_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error(ErrorKind::internal, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path(), path.string());
}

PipelineConfig PipelineConfig::parse(const std::string& text, const fs::path& base_dir,
                                     const std::string& source_name) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source_name + ": line " + std::to_string(e.line()) + ": " + e.message());
  }

  PipelineConfig cfg;
  cfg.source = source_name;
  cfg.sha256 = sha256_hex(text);
  const std::set<std::string> sections = {"run",     "deid", "swap",    "keypoints",
                                          "methods", "oks",  "identity"};
  // The INI reader drops empty sections, so headers are checked on the raw text too.
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      const auto last = line.find_last_not_of(" \t\r");
      if (first == std::string::npos || line[first] != '[' || line[last] != ']') continue;
      const std::string name = line.substr(first + 1, last - first - 1);
      if (!sections.count(name)) throw ConfigError(source_name + ": unknown section [" + name + "]");
    }
  }
  for (const auto& [name, tree] : root) {
    if (!sections.count(name)) {
      if (tree.empty() && !tree.data().empty())
        throw ConfigError(source_name + ": key '" + name + "' outside any section");
      throw ConfigError(source_name + ": unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) -> const pt::ptree* {
    auto it = root.find(name);
    return it == root.not_found() ? nullptr : &it->second;
  };

  try {
    if (auto* t = section("run")) {
      Section s("run", *t, base_dir, {"seed", "out"});
      cfg.seed = s.unsigned_int("seed", cfg.seed);
      cfg.out = s.optional_path("out");
    }
    if (auto* t = section("deid")) {
      Section s("deid", *t, base_dir, {"frames", "manifest"});
      cfg.deid = DeidSection{s.path("frames"), s.path("manifest")};
    }
    if (auto* t = section("swap")) {
      Section s("swap", *t, base_dir,
                {"steps", "batch_size", "learning_rate", "momentum", "samples_per_identity",
                 "held_out", "model", "inputs"});
      SwapSection sw;
      sw.train.steps = s.unsigned_int("steps", sw.train.steps);
      sw.train.batch_size = s.unsigned_int("batch_size", sw.train.batch_size);
      sw.train.learning_rate = s.number("learning_rate", sw.train.learning_rate);
      sw.train.momentum = s.number("momentum", sw.train.momentum);
      sw.samples_per_identity = s.unsigned_int("samples_per_identity", sw.samples_per_identity);
      sw.held_out = s.unsigned_int("held_out", sw.held_out);
      sw.model = s.optional_path("model");
      sw.inputs = s.optional_path("inputs");
      sw.train.validate();
      if (sw.samples_per_identity < 1) throw ConfigError("[swap] samples_per_identity must be >= 1");
      cfg.swap = sw;
    }
    OksConfig oks;
    if (auto* t = section("oks")) {
      Section s("oks", *t, base_dir, {"scale_factor", "visibility_threshold", "thresholds", "kappas"});
      oks.scale_factor = s.number("scale_factor", oks.scale_factor);
      oks.visibility_threshold = s.number("visibility_threshold", oks.visibility_threshold);
      if (s.has("thresholds")) oks.thresholds = s.list("thresholds");
      if (s.has("kappas")) {
        const auto k = s.list("kappas");
        if (k.size() != kCocoKeypoints) throw ConfigError("[oks] kappas needs 17 values");
        std::copy(k.begin(), k.end(), oks.kappas.begin());
      }
      oks.validate();
    }
    if (auto* t = section("keypoints")) {
      Section s("keypoints", *t, base_dir, {"original", "mode", "select_largest"});
      KeypointSection kp;
      kp.original = s.path("original");
      if (s.has("mode")) {
        const std::string m = s.text("mode");
        if (m == "fraction") kp.mode = ApMode::fraction;
        else if (m == "ranked") kp.mode = ApMode::ranked;
        else throw ConfigError("[keypoints] mode must be 'fraction' or 'ranked'");
      }
      kp.select_largest = s.boolean("select_largest", false);
      kp.oks = oks;
      if (auto* mt = section("methods")) {
        std::set<std::string> names;
        for (const auto& entry : *mt) names.insert(entry.first);
        Section ms("methods", *mt, base_dir, names);
        for (const auto& name : names) {
          const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
          });
          if (!ok) throw ConfigError("[methods] name '" + name + "' must be alphanumeric, '_' or '-'");
          kp.methods[name] = ms.path(name);
        }
      }
      if (kp.methods.empty()) throw ConfigError("[methods] must name at least one pose directory");
      cfg.keypoints = kp;
    } else if (section("methods") || section("oks")) {
      throw ConfigError("[methods] and [oks] require a [keypoints] section");
    }
    if (auto* t = section("identity")) {
      Section s("identity", *t, base_dir,
                {"descriptors", "pairing", "target", "pairing_mode", "threshold"});
      IdentitySection id;
      id.descriptors = s.path("descriptors");
      id.pairing = s.optional_path("pairing");
      if (s.has("target")) id.target = s.text("target");
      if (s.has("pairing_mode")) {
        const std::string m = s.text("pairing_mode");
        if (m == "frame") id.pairing_mode = PairingMode::frame;
        else if (m == "all") id.pairing_mode = PairingMode::all_pairs;
        else throw ConfigError("[identity] pairing_mode must be 'frame' or 'all'");
      }
      id.threshold = s.number("threshold", id.threshold);
      if (!(id.threshold > 0.0)) throw ConfigError("[identity] threshold must be positive");
      cfg.identity = id;
    }
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return cfg;
}

}  // namespace deid
