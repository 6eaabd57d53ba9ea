#include <doctest.h>

#include <cmath>

#include "deid/config.hpp"
#include "deid/error.hpp"
#include "deid/formats.hpp"
#include "deid/synth.hpp"
#include "test_support.hpp"

using namespace deid;
using testing::TempDir;

namespace {

std::string person(int triples, double base) {
  std::string s = "{\"pose_keypoints_2d\":[";
  for (int i = 0; i < triples; ++i) {
    if (i) s += ",";
    s += std::to_string(base + i) + "," + std::to_string(2 * base + i) + ",0.5";
  }
  return s + "]}";
}

}  // namespace

TEST_SUITE("formats") {
  TEST_CASE("pose json parsing") {
    const std::string one = "{\"version\":1.3,\"people\":[" + person(25, 10) + "]}";
    const KeypointInstance k = parse_pose_json_text(one, "frame_1", "t.json");
    CHECK(k.skeleton == Skeleton::body25);
    CHECK(k.frame_id == "frame_1");
    CHECK(k.points[3] == Keypoint{13, 23, 0.5});
    CHECK(parse_pose_json_text("{\"people\":[" + person(17, 1) + "]}", "f", "t").skeleton ==
          Skeleton::coco17);

    try {
      parse_pose_json_text("{\"version\":1.3,\"people\":[]}", "f", "empty.json");
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("empty.json") != std::string::npos);
    }
    const std::string two = "{\"people\":[" + person(25, 0) + "," + person(25, 0) + "]}";
    CHECK_THROWS_AS(parse_pose_json_text(two, "f", "t"), DataError);
    CHECK_THROWS_AS(parse_pose_json_text("{\"people\":[" + person(18, 0) + "]}", "f", "t"), DataError);
    CHECK_THROWS_AS(parse_pose_json_text("{\"people\": [", "f", "t"), ParseError);
    CHECK_THROWS_AS(parse_pose_json_text("[1,2]", "f", "t"), DataError);

    // select_largest keeps the person with the bigger keypoint box
    std::string small = "{\"pose_keypoints_2d\":[";
    std::string large = small;
    for (int i = 0; i < 17; ++i) {
      small += (i ? "," : "") + std::to_string(100 + i) + "," + std::to_string(100 + i) + ",1";
      large += (i ? "," : "") + std::to_string(10 * i) + "," + std::to_string(20 * i) + ",1";
    }
    small += "]}";
    large += "]}";
    const std::string both = "{\"people\":[" + small + "," + large + "]}";
    CHECK_THROWS_AS(parse_pose_json_text(both, "f", "t"), DataError);
    const auto pick = parse_pose_json_text(both, "f", "t", {true});
    CHECK(pick.points[16].x == 160);
  }

  TEST_CASE("pose json round-trip") {
    TempDir dir("pose_rt");
    for (const auto& k : gen_keypoint_instances(20, {}, 3)) {
      const auto b = lift_coco17_to_body25(k);
      write_pose_json(b, dir / (k.frame_id + ".json"));
      const auto back = parse_pose_json(dir / (k.frame_id + ".json"));
      CHECK(back.frame_id == k.frame_id);
      REQUIRE(back.points.size() == 25);
      for (std::size_t i = 0; i < 25; ++i) {
        CHECK(std::abs(back.points[i].x - b.points[i].x) < 1e-9);
        CHECK(std::abs(back.points[i].y - b.points[i].y) < 1e-9);
        CHECK(std::abs(back.points[i].confidence - b.points[i].confidence) < 1e-9);
      }
    }
  }

  TEST_CASE("face-box manifest") {
    TempDir dir("manifest");
    testing::write_bytes(dir / "m.csv", "frame_id,x,y,w,h\na,1,2,3,4\nb,-5,0,10,12\n");
    const auto m = parse_facebox_manifest(dir / "m.csv");
    CHECK(m.size() == 2);
    CHECK(m.at("b") == FaceBox{"b", -5, 0, 10, 12});
    write_facebox_manifest(m, dir / "out.csv");
    CHECK(parse_facebox_manifest(dir / "out.csv") == m);

    testing::write_bytes(dir / "dup.csv", "frame_id,x,y,w,h\nz9,1,2,3,4\nz9,1,2,3,4\n");
    try {
      parse_facebox_manifest(dir / "dup.csv");
      FAIL("expected a duplicate error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("z9") != std::string::npos);
    }
    testing::write_bytes(dir / "nohead.csv", "a,1,2,3,4\n");
    CHECK_THROWS_AS(parse_facebox_manifest(dir / "nohead.csv"), DataError);
    testing::write_bytes(dir / "bad.csv", "frame_id,x,y,w,h\na,1,2,x,4\n");
    CHECK_THROWS_AS(parse_facebox_manifest(dir / "bad.csv"), DataError);
    testing::write_bytes(dir / "short.csv", "frame_id,x,y,w,h\na,1,2,3\n");
    CHECK_THROWS_AS(parse_facebox_manifest(dir / "short.csv"), DataError);
    testing::write_bytes(dir / "zero.csv", "frame_id,x,y,w,h\na,1,2,0,4\n");
    CHECK_THROWS_AS(parse_facebox_manifest(dir / "zero.csv"), DataError);
  }

  TEST_CASE("descriptor and pairing csv") {
    TempDir dir("desc");
    SwapGeometry g;
    g.count = 20;
    const auto d = gen_descriptor_clusters(swap_cluster_spec(g), 2);
    write_descriptor_csv(d, dir / "d.csv");
    CHECK(read_descriptor_csv(dir / "d.csv") == d);

    testing::write_bytes(dir / "ragged.csv", "id,subset,d0,d1\na,s,1,2\nb,s,1\n");
    CHECK_THROWS_AS(read_descriptor_csv(dir / "ragged.csv"), DataError);
    testing::write_bytes(dir / "nan.csv", "id,subset,d0,d1\na,s,1,zz\n");
    CHECK_THROWS_AS(read_descriptor_csv(dir / "nan.csv"), DataError);
    testing::write_bytes(dir / "head.csv", "name,subset,d0\na,s,1\n");
    CHECK_THROWS_AS(read_descriptor_csv(dir / "head.csv"), DataError);

    const std::map<std::string, std::string> pairing = {{"s1", "o1"}, {"s2", "o2"}};
    write_pairing_csv(pairing, dir / "p.csv");
    CHECK(read_pairing_csv(dir / "p.csv") == pairing);

    const auto groups = group_by_subset(d);
    CHECK(groups.size() == 3);
    CHECK(groups.at("original_A").size() == 20);
  }

  TEST_CASE("shortest round-trip float text") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(2.0 / 3.0) == "0.6666666666666666");
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
      const double v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
      CHECK(std::stod(format_double(v)) == v);
    }
  }
}

TEST_SUITE("config") {
  TEST_CASE("full config parses and resolves paths") {
    const std::string text =
        "[run]\nseed = 42\nout = results\n"
        "[deid]\nframes = frames\nmanifest = /abs/manifest.csv\n"
        "[swap]\nsteps = 10\nlearning_rate = 0.5\n"
        "[keypoints]\noriginal = poses/original\nmode = ranked\nselect_largest = true\n"
        "[methods]\nmasked = poses/masked\n"
        "[oks]\nthresholds = 0.5, 0.75\nvisibility_threshold = 0.1\n"
        "[identity]\ndescriptors = d.csv\npairing_mode = all\nthreshold = 0.5\n";
    const auto cfg = PipelineConfig::parse(text, "/base", "t.ini");
    CHECK(cfg.seed == 42);
    CHECK(*cfg.out == fs::path("/base/results"));
    CHECK(cfg.deid->frames == fs::path("/base/frames"));
    CHECK(cfg.deid->manifest == fs::path("/abs/manifest.csv"));
    CHECK(cfg.swap->train.steps == 10);
    CHECK(cfg.swap->train.learning_rate == 0.5);
    CHECK(cfg.keypoints->mode == ApMode::ranked);
    CHECK(cfg.keypoints->select_largest);
    CHECK(cfg.keypoints->methods.at("masked") == fs::path("/base/poses/masked"));
    CHECK(cfg.keypoints->oks.thresholds == std::vector<double>{0.5, 0.75});
    CHECK(cfg.keypoints->oks.visibility_threshold == 0.1);
    CHECK(cfg.identity->pairing_mode == PairingMode::all_pairs);
    CHECK(cfg.identity->threshold == 0.5);
    CHECK(cfg.sha256 == sha256_hex(text));
  }

  TEST_CASE("config errors") {
    auto bad = [](const std::string& text) {
      CHECK_THROWS_AS(PipelineConfig::parse(text, "/b", "t.ini"), ConfigError);
    };
    bad("[run]\nseeds = 1\n");
    bad("[nope]\na = b\n");
    bad("[run]\nseed = -1\n");
    bad("[run]\nseed = 1x\n");
    bad("[methods]\nm = x\n");
    bad("[keypoints]\nmode = fraction\n");
    bad("[keypoints]\noriginal = o\nmode = sometimes\n");
    bad("[keypoints]\noriginal = o\n[methods]\nbad name = x\n");
    bad("[oks]\nthresholds = 0.9, 0.5\n[keypoints]\noriginal = o\n");
    bad("[swap]\nlearning_rate = 0\n");
    bad("[identity]\ndescriptors = d.csv\npairing_mode = some\n");
    bad("seed = 3\n");
    bad("[run\nseed = 3\n");
  }

  TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }
}
