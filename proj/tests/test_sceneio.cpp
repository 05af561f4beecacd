#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bendkit/fundsys.hpp"
#include "bendkit/sceneio.hpp"
#include "common.hpp"
#include "doctest.h"

using namespace bendkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / "bendkit_io_test";
    fs::create_directories(dir);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(dir, ec); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("scene round trip preserves every residual bit-for-bit") {
  TempDir tmp;
  ImmersionScene scene = scenes::make_scene("torus", {}, 16);
  FramedGeometry geom = build_geometry(scene);
  scenes::Params k2;
  k2.num["k"] = 2;
  BendingField T = scenes::make_bending(scene, "circle_fourier", k2);
  auto [derived, pair] = associated_pair(geom, T);
  SystemReport before = verify(geom, pair);

  io::write_scene(tmp.path("scene.json"), scene);
  io::write_bending(tmp.path("bending.json"), T);
  io::write_pair(tmp.path("pair.json"), scene.grid, pair);

  io::SceneInput sin = io::read_input(tmp.path("scene.json"));
  ImmersionScene scene2 = io::scene_from_input(sin);
  CHECK(tst::sup_diff(scene2.map, scene.map) == 0.0);

  io::SceneInput bin = io::read_input(tmp.path("bending.json"));
  BendingField T2 = io::bending_from_input(bin, scene2);
  CHECK(tst::sup_diff(T2.T, T.T) == 0.0);

  FramedGeometry geom2 = build_geometry(scene2);
  io::SceneInput pin = io::read_input(tmp.path("pair.json"));
  REQUIRE(pin.kind == "pair");
  AssociatedPair pair2 = make_pair_from_fields(geom2, *pin.beta, *pin.E);
  SystemReport after = verify(geom2, pair2);
  CHECK(std::abs(after.gauss - before.gauss) <= 1e-12);
  CHECK(std::abs(after.codazzi - before.codazzi) <= 1e-12);
  CHECK(std::abs(after.codazzi2 - before.codazzi2) <= 1e-12);
  CHECK(std::abs(after.ricci - before.ricci) <= 1e-12);
  CHECK(std::abs(after.anti - before.anti) <= 1e-12);
}

TEST_CASE("catalog references re-ingest through scene files") {
  TempDir tmp;
  std::ofstream out(tmp.path("cat.json"));
  out << R"({"kind":"scene","grid":{"dim":2,"bounds":[[0,6.283185307179586],[0,1]],)"
      << R"("resolution":[16,16],"periodic":[true,false]},)"
      << R"("catalog":{"id":"cylinder","params":{}}})";
  out.close();
  io::SceneInput in = io::read_input(tmp.path("cat.json"));
  CHECK(in.has_catalog);
  ImmersionScene scene = io::scene_from_input(in);
  CHECK(scene.ambient_dim == 3);
  CHECK(scene.grid.periodic(0));
}

TEST_CASE("malformed inputs are rejected") {
  TempDir tmp;
  SUBCASE("not json") {
    std::ofstream(tmp.path("bad.json")) << "this is not json";
    CHECK_THROWS_AS(io::read_input(tmp.path("bad.json")), io::IoError);
  }
  SUBCASE("missing kind") {
    std::ofstream(tmp.path("bad.json")) << R"({"grid":{}})";
    CHECK_THROWS_AS(io::read_input(tmp.path("bad.json")), io::IoError);
  }
  SUBCASE("wrong node count") {
    std::ofstream(tmp.path("bad.json"))
        << R"({"kind":"bending","grid":{"dim":1,"bounds":[[0,1]],"resolution":[8],)"
        << R"("periodic":[false]},"values":[[0,0],[0,0]]})";
    CHECK_THROWS_AS(io::read_input(tmp.path("bad.json")), io::IoError);
  }
  SUBCASE("dimension mismatch against the scene") {
    std::ofstream(tmp.path("b.json"))
        << R"({"kind":"bending","grid":{"dim":1,"bounds":[[0,1]],"resolution":[8],)"
        << R"("periodic":[false]},"values":[[0],[0],[0],[0],[0],[0],[0],[0]]})";
    io::SceneInput in = io::read_input(tmp.path("b.json"));
    ImmersionScene circle = scenes::make_scene("circle", {}, 8);
    CHECK_THROWS_AS(io::bending_from_input(in, circle), io::IoError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(io::read_input(tmp.path("nope.json")), io::IoError);
  }
}

TEST_CASE("reports carry checks, margins and verdict notes") {
  io::Report rep;
  rep.command = "verify";
  rep.check("gauss", 0.5, 1.0);
  rep.check("ricci", 2.0, 1.0);
  rep.info("scale", 3.0);
  rep.note("verdict", "nontrivial");
  CHECK(!rep.all_pass());
  std::string text = rep.text();
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(text.find("gauss") != std::string::npos);
  std::string j = rep.json_string();
  CHECK(j.find("\"margin\"") != std::string::npos);
  CHECK(j.find("\"verdict\"") != std::string::npos);
}

TEST_CASE("atomic write leaves no temp file behind") {
  TempDir tmp;
  io::atomic_write(tmp.path("out.txt"), "payload");
  CHECK(fs::exists(tmp.path("out.txt")));
  CHECK(!fs::exists(tmp.path("out.txt.tmp")));
  std::ifstream in(tmp.path("out.txt"));
  std::string content;
  std::getline(in, content);
  CHECK(content == "payload");
}

TEST_CASE("csv dumps have the stated header layout") {
  TempDir tmp;
  ImmersionScene scene = scenes::make_scene("circle", {}, 8);
  GridField f(scene.grid, {2});
  io::write_csv(tmp.path("dump.csv"), scene.grid, {{"value", &f}});
  std::ifstream in(tmp.path("dump.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "node_index,coord_0,value_0,value_1");
  std::string row;
  int rows = 0;
  while (std::getline(in, row)) ++rows;
  CHECK(rows == 8);
}
