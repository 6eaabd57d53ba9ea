#include <doctest.h>

#include <cmath>
#include <limits>

#include "deid/embedding.hpp"
#include "deid/error.hpp"
#include "deid/identity.hpp"
#include "deid/rng.hpp"
#include "deid/synth.hpp"
#include "oracles.hpp"

using namespace deid;

namespace {

std::vector<FaceDescriptor> make_set(const std::string& subset,
                                     const std::vector<Vector>& vectors) {
  std::vector<FaceDescriptor> out;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    out.push_back({"f" + std::to_string(i), subset, vectors[i]});
  return out;
}

Vector random_vector(Rng& rng, std::size_t d) {
  Vector v(d);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("identity") {
  TEST_CASE("euclidean distance") {
    const Vector e1 = {1, 0}, e2 = {0, 1};
    CHECK(euclidean_distance(e1, e1) == 0.0);
    CHECK(euclidean_distance(e1, e2) == doctest::Approx(1.4142135623730951).epsilon(1e-15));
    CHECK_THROWS_AS(euclidean_distance(e1, Vector{1, 2, 3}), DataError);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const Vector a = random_vector(rng, 128), b = random_vector(rng, 128);
      double s = 0;
      for (std::size_t k = 0; k < 128; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
      CHECK(std::abs(euclidean_distance(a, b) - std::sqrt(s)) < 1e-12);
    }
  }

  TEST_CASE("centroid and intra stats") {
    const Vector c = centroid(make_set("s", {{0, 0}, {2, 0}, {1, 3}}));
    CHECK(c == Vector{1, 1});
    CHECK(centroid(make_set("s", {{3, -1}, {-3, 1}})) == Vector{0, 0});
    CHECK(centroid(make_set("s", {{4, 5}})) == Vector{4, 5});
    CHECK_THROWS_AS(centroid(std::vector<FaceDescriptor>{}), DataError);

    const SubsetStats same = intra_stats(make_set("s", {{1, 1}, {1, 1}, {1, 1}}));
    CHECK(same.intra_mean == 0.0);
    CHECK(same.intra_std == 0.0);
    const SubsetStats two = intra_stats(make_set("s", {{0, 0}, {2, 0}}));
    CHECK(two.intra_mean == 1.0);
    CHECK(two.intra_std == 0.0);

    const std::vector<double> v = {1, 2, 3, 4};
    const MeanStd ms = mean_std(v);
    CHECK(ms.mean == 2.5);
    CHECK(ms.std == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  }

  TEST_CASE("verify_identity is strict and rotation invariant") {
    const Vector c = {0, 0};
    CHECK(verify_identity(Vector{0, 0}, c));
    CHECK_FALSE(verify_identity(Vector{0.6, 0}, c));
    CHECK(verify_identity(Vector{0.5999999, 0}, c));
    CHECK_FALSE(verify_identity(Vector{0.756, 0}, c));
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      const Vector d = {rng.uniform(-1, 1), rng.uniform(-1, 1)}, m = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double th = rng.uniform(0, 2), a = rng.uniform(0, 6.283);
      auto rot = [&](const Vector& v) {
        return Vector{std::cos(a) * v[0] - std::sin(a) * v[1], std::sin(a) * v[0] + std::cos(a) * v[1]};
      };
      const double dist = euclidean_distance(d, m);
      if (std::abs(dist - th) < 1e-9) continue;
      CHECK(verify_identity(d, m, th) == verify_identity(rot(d), rot(m), th));
    }
  }

  TEST_CASE("distance table on a hand-computed toy") {
    DistanceTableRequest req;
    req.subsets["swapped_F"] = make_set("swapped_F", {{0, 0}, {2, 0}, {1, 3}});
    req.subsets["original_F"] = make_set("original_F", {{0, 4}, {2, 4}, {1, 7}});
    req.subsets["original_A"] = make_set("original_A", {{4, 0}, {6, 0}, {5, 3}});
    req.swaps = {{"swapped_F", "original_F"}};
    req.target_subset = "original_A";
    const DistanceReport t = distance_table(req);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].subset == "swapped_F");
    CHECK(t.rows[1].subset == "original_F");
    CHECK(t.rows[2].subset == "original_A");

    // swapped centroid (1,1): member distances sqrt2, sqrt2, 2
    const double intra = (2 * std::sqrt(2.0) + 2) / 3;
    CHECK(t.rows[0].intra.mean == doctest::Approx(intra).epsilon(1e-15));
    // frame-paired: every pair is a (0,4) translation
    REQUIRE(t.rows[0].to_original);
    CHECK(t.rows[0].to_original->mean == doctest::Approx(4).epsilon(1e-15));
    CHECK(t.rows[0].to_original->std == doctest::Approx(0).epsilon(1e-15));
    // original centroid (1,5): distances sqrt26, sqrt26, 2
    CHECK(t.rows[0].to_average_original->mean ==
          doctest::Approx((2 * std::sqrt(26.0) + 2) / 3).epsilon(1e-15));
    // target centroid (5,1): sqrt26, sqrt10, sqrt20
    CHECK(t.rows[0].to_average_target->mean ==
          doctest::Approx((std::sqrt(26.0) + std::sqrt(10.0) + std::sqrt(20.0)) / 3).epsilon(1e-15));
    // original_F to target centroid (5,1): sqrt(25+9), sqrt(9+9), sqrt(16+36)
    CHECK_FALSE(t.rows[1].to_original);
    CHECK(t.rows[1].to_average_target->mean ==
          doctest::Approx((std::sqrt(34.0) + std::sqrt(18.0) + std::sqrt(52.0)) / 3).epsilon(1e-15));
    CHECK_FALSE(t.rows[2].to_average_target);

    // intra column equals intra_stats per subset
    for (const auto& row : t.rows)
      CHECK(row.intra.mean == intra_stats(req.subsets.at(row.subset)).intra_mean);

    // all-pairs: mean over the 9 swapped/original pairs
    req.pairing_mode = PairingMode::all_pairs;
    double sum = 0;
    for (const auto& a : req.subsets["swapped_F"])
      for (const auto& b : req.subsets["original_F"]) sum += euclidean_distance(a.vector, b.vector);
    CHECK(distance_table(req).rows[0].to_original->mean == doctest::Approx(sum / 9).epsilon(1e-14));
  }

  TEST_CASE("distance table errors and identical subsets") {
    DistanceTableRequest req;
    req.subsets["swapped_F"] = make_set("swapped_F", {{0, 0}, {2, 0}});
    req.subsets["original_F"] = make_set("original_F", {{0, 0}, {2, 0}});
    req.subsets["original_A"] = make_set("original_A", {{4, 0}});
    req.swaps = {{"swapped_F", "original_F"}};
    req.target_subset = "original_A";
    CHECK(distance_table(req).rows[0].to_original->mean == 0.0);

    req.target_subset = "original_Z";
    CHECK_THROWS_AS(distance_table(req), DataError);
    req.target_subset = "original_A";
    req.pairing = {{"f0", "f0"}};
    try {
      distance_table(req);
      FAIL("expected an unmatched-pairing error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("f1") != std::string::npos);
    }
  }

  TEST_CASE("roc worked example against exhaustive enumeration") {
    const std::vector<double> gen = {0.1, 0.2}, imp = {0.15, 0.3};
    const RocCurve r = roc(gen, imp);
    CHECK(r.auc == 0.75);
    const auto pts = oracle::roc_points(gen, imp);
    REQUIRE(r.points.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(r.points[i].far == pts[i].far);
      CHECK(r.points[i].tar == pts[i].tar);
    }
    CHECK(oracle::trapezoid(pts) == 0.75);
    CHECK(oracle::pair_auc(gen, imp) == 0.75);
  }

  TEST_CASE("roc properties on random lists") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> gen(1 + rng.below(30)), imp(1 + rng.below(30));
      for (double& g : gen) g = std::round(rng.uniform(0, 1) * 50) / 50;
      for (double& i : imp) i = std::round(rng.uniform(0.2, 1.2) * 50) / 50;
      const RocCurve r = roc(gen, imp);
      CHECK(r.auc >= 0);
      CHECK(r.auc <= 1);
      CHECK(std::abs(r.auc - oracle::pair_auc(gen, imp)) < 1e-12);
      CHECK(std::abs(r.auc + roc(imp, gen).auc - 1) < 1e-12);
      CHECK(r.points.front().far == 0);
      CHECK(r.points.back().tar == 1);
      for (std::size_t i = 1; i < r.points.size(); ++i) {
        CHECK(r.points[i].far >= r.points[i - 1].far);
        CHECK(r.points[i].tar >= r.points[i - 1].tar);
      }
    }
    const std::vector<double> a = {0.1, 0.2}, b = {0.5, 0.9};
    CHECK(roc(a, b).auc == 1.0);
    CHECK(roc(a, a).auc == 0.5);
    CHECK_THROWS(roc(std::vector<double>{}, b));
  }

  TEST_CASE("cluster separation") {
    const auto s1 = make_set("a", {{0, 0}, {1, 0}});
    CHECK(cluster_separation({s1, s1}) == 0.0);
    const double inf = cluster_separation({make_set("a", {{0, 0}}), make_set("b", {{1, 0}})});
    CHECK(inf == std::numeric_limits<double>::infinity());
    CHECK_THROWS(cluster_separation({s1, {}}));
    const auto planted = gen_descriptor_clusters(swap_cluster_spec({}), 6);
    std::map<std::string, std::vector<FaceDescriptor>> by;
    for (const auto& d : planted) by[d.subset].push_back(d);
    std::vector<std::vector<FaceDescriptor>> groups;
    for (auto& [k, v] : by) groups.push_back(v);
    CHECK(cluster_separation(groups) > 1.0);
  }
}

TEST_SUITE("embedding") {
  TEST_CASE("planar points keep their pairwise distances") {
    Rng rng(12);
    const Vector u = [&] {
      Vector v(20, 0.0);
      v[3] = 0.6;
      v[7] = 0.8;
      return v;
    }();
    Vector w(20, 0.0);
    w[1] = 1;
    std::vector<Vector> pts;
    for (int i = 0; i < 30; ++i) {
      const double a = rng.uniform(-5, 5), b = rng.uniform(-2, 2);
      Vector p(20, 0.5);
      for (int k = 0; k < 20; ++k) p[k] += a * u[k] + b * w[k];
      pts.push_back(p);
    }
    const auto emb = pca_embed_2d(pts);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        CHECK(std::abs(std::hypot(emb[i][0] - emb[j][0], emb[i][1] - emb[j][1]) -
                       euclidean_distance(pts[i], pts[j])) < 1e-9);
    // translation leaves the embedding unchanged
    auto shifted = pts;
    for (auto& p : shifted)
      for (double& x : p) x += 3.25;
    const auto emb2 = pca_embed_2d(shifted);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(std::abs(emb[i][0] - emb2[i][0]) < 1e-9);
      CHECK(std::abs(emb[i][1] - emb2[i][1]) < 1e-9);
    }
    // sign convention
    for (int c = 0; c < 2; ++c) {
      double best = 0;
      for (const auto& e : emb)
        if (std::abs(e[c]) > std::abs(best)) best = e[c];
      CHECK(best > 0);
    }
  }

  TEST_CASE("degenerate inputs") {
    const std::vector<Vector> same(5, Vector{1, 2, 3});
    CHECK_THROWS_AS(pca_embed_2d(same), DataError);
    const std::vector<Vector> two = {{1, 2}, {3, 4}};
    CHECK_THROWS_AS(pca_embed_2d(two), DataError);
    const std::vector<Vector> narrow = {{1}, {2}, {3}};
    CHECK_THROWS_AS(pca_embed_2d(narrow), DataError);
  }

  TEST_CASE("planted clusters stay separated in the embedding") {
    Rng rng(14);
    DescriptorClusterSpec spec;
    for (int c = 0; c < 3; ++c) {
      Vector centre(128);
      for (double& x : centre) x = rng.normal(0, 0.1);
      spec.subsets.push_back({"s" + std::to_string(c), centre, 0.01, 60});
    }
    const auto desc = gen_descriptor_clusters(spec, 15);
    const auto emb = pca_embed_2d(desc);
    std::vector<std::array<double, 2>> pts(emb.begin(), emb.end());
    std::vector<int> labels;
    for (const auto& d : desc) labels.push_back(d.subset.back() - '0');
    CHECK(oracle::silhouette(pts, labels) > 0.8);
  }
}
