#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bendkit/bending.hpp"
#include "bendkit/scenes.hpp"

namespace bendkit::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed scene file: grid plus either a catalog reference or raw values.
struct SceneInput {
  std::string kind;  // "scene" | "bending" | "pair"
  ChartGrid grid;
  bool has_catalog = false;
  std::string catalog_id;
  scenes::Params params;
  std::optional<GridField> values;  // scene / bending payload
  std::optional<GridField> beta;    // pair payload
  std::optional<GridField> E;
};

SceneInput read_input(const std::string& path);

void write_scene(const std::string& path, const ImmersionScene& scene);
void write_bending(const std::string& path, const BendingField& T);
void write_pair(const std::string& path, const ChartGrid& grid, const AssociatedPair& pair);

ImmersionScene scene_from_input(const SceneInput& in);
BendingField bending_from_input(const SceneInput& in, const ImmersionScene& scene);

struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct Report {
  std::string command;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::pair<std::string, double>> numbers;

  void check(const std::string& name, double value, double tol);
  void info(const std::string& name, double value);
  void note(const std::string& key, const std::string& value);
  bool all_pass() const;
  std::string text() const;
  std::string json_string() const;
};

void atomic_write(const std::string& path, const std::string& content);

// CSV with header node_index,coords...,value columns.
void write_csv(const std::string& path, const ChartGrid& grid,
               const std::vector<std::pair<std::string, const GridField*>>& fields);

}  // namespace bendkit::io
