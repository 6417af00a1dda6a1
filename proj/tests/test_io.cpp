#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qlpairs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace qlpairs;

TEST_CASE("pair serialization round trip") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
  g(0, 1) = g(1, 0) = 1.0;
  g(2, 2) = 1.5;
  g(3, 3) = -0.75;
  Eigen::VectorXd l(4);
  l << 0.0, 0.25, 0.0, 1.0;
  FormPair pair(QuadraticForm(g), LinearForm(l));

  Json j = pair_to_json(pair);
  FormPair back = pair_from_json(j);
  CHECK((back.q.gram() - pair.q.gram()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.l.coeffs() - pair.l.coeffs()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.cls().kind == pair.cls().kind);
}

TEST_CASE("rational string entries") {
  Json j;
  j["n"] = 2;
  j["gram"] = Json::array({Json::array({"1/2", 0}), Json::array({0, "-3/4"})});
  j["linear"] = Json::array({"2/3", 1});
  FormPair pair = pair_from_json(j);
  CHECK(pair.q.gram()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pair.q.gram()(1, 1) == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK(pair.l.coeffs()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("report payloads re-parse") {
  CountReport r;
  r.N = 42;
  r.T = 10.0;
  r.I = {-1.0, 1.0};
  r.J = {-0.5, 0.5};
  r.shards = {{-10, 0, 20}, {0, 11, 22}};
  r.wall_seconds = 0.125;
  Json j = to_json(r);
  Json parsed = Json::parse(canonical_dump(j));
  CHECK(parsed.at("N").get<std::int64_t>() == 42);
  std::int64_t total = 0;
  for (const auto& s : parsed.at("shards")) total += s.at("count").get<std::int64_t>();
  CHECK(total == 42);
  // the volatile runtime block stays separate from the payload
  CHECK(parsed.contains("runtime"));
}

TEST_CASE("content hash is stable and sensitive") {
  std::string a = content_hash("flagship pair bytes");
  CHECK(a == content_hash("flagship pair bytes"));
  CHECK(a != content_hash("flagship pair bytes!"));
  CHECK(!a.empty());
}

TEST_CASE("bump round trip") {
  ProductBump f;
  f.windows = {{0.0, 0.5}, {0.25, 1.0}, {-0.5, 0.75}};
  ProductBump back = bump_from_json(bump_to_json(f));
  REQUIRE(back.windows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.windows[i].center == f.windows[i].center);
    CHECK(back.windows[i].half_width == f.windows[i].half_width);
  }
}

TEST_CASE("csv writer") {
  std::string path = "/tmp/qlpairs_test_csv.csv";
  write_csv(path, {"a", "b"}, {{"1", "2"}, {"3", "4"}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
  std::getline(in, line);
  CHECK(line == "1,2");
  std::remove(path.c_str());
}

TEST_CASE("file loading errors are reported") {
  CHECK_THROWS(load_pair("/nonexistent/path/pair.json"));
}
