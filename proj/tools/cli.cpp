// Command-line surface: scene construction, bending/pair verification,
// reconstruction, classification, s-nullity sweeps and product analysis.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "bendkit/classify.hpp"
#include "bendkit/products.hpp"
#include "bendkit/reconstruct.hpp"
#include "bendkit/sceneio.hpp"

using namespace bendkit;

namespace {

struct CommonFlags {
  int resolution = 64;
  std::string bounds;    // "a,b;c,d" overrides
  std::string periodic;  // "1,0" overrides
  double tol_scale = 1.0;
  std::uint64_t seed = 0x5EED;
  std::string report_path;
  std::string fields_path;
  std::string export_path;
  std::string base;
  bool json = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--resolution", flags.resolution, "nodes per axis for catalog scenes");
  cmd->add_option("--bounds", flags.bounds, "per-axis bounds override, e.g. '0,1;0,2'");
  cmd->add_option("--periodic", flags.periodic, "per-axis periodicity override, e.g. '1,0'");
  cmd->add_option("--tol-scale", flags.tol_scale, "multiplies every tolerance constant");
  cmd->add_option("--seed", flags.seed, "seed for sampled subroutines");
  cmd->add_option("--report", flags.report_path, "write the report to this path");
  cmd->add_option("--fields", flags.fields_path, "CSV dump of residual fields");
  cmd->add_option("--export", flags.export_path, "export the produced object as a scene file");
  cmd->add_flag("--json", flags.json, "machine-readable report on stdout");
}

std::vector<double> parse_list(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

bool looks_like_file(const std::string& spec) {
  return spec.find(".json") != std::string::npos || std::filesystem::exists(spec);
}

ChartGrid grid_for(const std::string& id, const scenes::Params& params,
                   const CommonFlags& flags) {
  ChartGrid grid = scenes::default_grid(id, params, flags.resolution);
  if (flags.bounds.empty() && flags.periodic.empty()) return grid;
  std::vector<std::array<double, 2>> bounds;
  std::vector<int> res;
  std::vector<bool> per;
  for (int d = 0; d < grid.dim(); ++d) {
    bounds.push_back({grid.lower(d), grid.upper(d)});
    res.push_back(grid.resolution(d));
    per.push_back(grid.periodic(d));
  }
  if (!flags.bounds.empty()) {
    std::stringstream ss(flags.bounds);
    std::string axis_spec;
    int d = 0;
    while (std::getline(ss, axis_spec, ';') && d < grid.dim()) {
      std::vector<double> ab = parse_list(axis_spec, ',');
      if (ab.size() != 2) throw io::IoError("--bounds: expected 'lo,hi' per axis");
      bounds[d] = {ab[0], ab[1]};
      ++d;
    }
  }
  if (!flags.periodic.empty()) {
    std::vector<double> flagsv = parse_list(flags.periodic, ',');
    for (std::size_t d = 0; d < flagsv.size() && d < per.size(); ++d)
      per[d] = flagsv[d] != 0.0;
  }
  return ChartGrid(bounds, res, per);
}

ImmersionScene resolve_scene(const std::string& spec, const CommonFlags& flags) {
  if (looks_like_file(spec)) {
    io::SceneInput in = io::read_input(spec);
    if (in.kind != "scene") throw io::IoError("'" + spec + "' is not a scene file");
    return io::scene_from_input(in);
  }
  auto [id, params] = scenes::parse_spec(spec);
  if (!scenes::is_scene_id(id)) throw io::IoError("unknown scene '" + id + "'");
  if (id == "product") throw io::IoError("use the product command to assemble products");
  return scenes::make_scene(id, params, grid_for(id, params, flags));
}

struct BendingOrPair {
  std::optional<BendingField> bending;
  std::optional<AssociatedPair> pair;
  std::optional<GridField> hypersurface_tensor;
  std::string label;
};

BendingOrPair resolve_bending_or_pair(const std::string& spec, const ImmersionScene& scene,
                                      const FramedGeometry& geom) {
  BendingOrPair out;
  out.label = spec;
  if (looks_like_file(spec)) {
    io::SceneInput in = io::read_input(spec);
    if (in.kind == "bending") {
      out.bending = io::bending_from_input(in, scene);
    } else if (in.kind == "pair") {
      if (!in.grid.same_layout(scene.grid))
        throw io::IoError("pair grid does not match the scene grid");
      out.pair = make_pair_from_fields(geom, *in.beta, *in.E);
    } else {
      throw io::IoError("'" + spec + "' is neither a bending nor a pair file");
    }
    return out;
  }
  auto [id, params] = scenes::parse_spec(spec);
  if (id == "codazzi_hypersurface") {
    out.hypersurface_tensor = scenes::hypersurface_tensor(geom, params);
    return out;
  }
  if (!scenes::is_bending_id(id)) throw io::IoError("unknown bending '" + id + "'");
  out.bending = scenes::make_bending(scene, id, params);
  return out;
}

std::size_t parse_base(const std::string& text, const ChartGrid& grid) {
  if (text.empty()) return 0;
  std::vector<double> idx = parse_list(text, ',');
  if (static_cast<int>(idx.size()) != grid.dim())
    throw io::IoError("--base: expected one index per axis");
  std::vector<int> ii(idx.begin(), idx.end());
  return grid.flat(ii);
}

int emit(io::Report& rep, const CommonFlags& flags) {
  std::string payload = flags.json ? rep.json_string() : rep.text();
  std::cout << payload;
  if (!flags.json) std::cout.flush();
  if (!flags.report_path.empty())
    io::atomic_write(flags.report_path, flags.json ? rep.json_string() : rep.text());
  return rep.all_pass() ? 0 : 1;
}

void maybe_dump_fields(const CommonFlags& flags, const ChartGrid& grid,
                       const std::vector<std::pair<std::string, const GridField*>>& fields) {
  if (!flags.fields_path.empty()) io::write_csv(flags.fields_path, grid, fields);
}

int run_sanity(const std::string& scene_spec, const CommonFlags& flags) {
  ImmersionScene scene = resolve_scene(scene_spec, flags);
  FramedGeometry geom = build_geometry(scene);
  StructureReport sr = structure_residuals(geom);
  const double h2 = geom.grid().max_spacing() * geom.grid().max_spacing();

  io::Report rep;
  rep.command = "sanity " + scene.label;
  rep.check("gauss_structure", sr.gauss, 20.0 * h2 * flags.tol_scale);
  rep.check("codazzi_structure", sr.codazzi, 20.0 * h2 * flags.tol_scale);
  rep.check("ricci_structure", sr.ricci, 20.0 * h2 * flags.tol_scale);
  rep.check("frame_orthonormality", geom.frame_orth_residual, 1e-10);
  rep.check("metric_inverse", sup_norm_gInv_g_defect(geom), 1e-10);
  rep.check("alpha_symmetry", geom.alpha_asym,
            10.0 * h2 * std::max(1.0, geom.alpha_inf) * flags.tol_scale);
  rep.info("min_metric_eigenvalue", geom.min_metric_eigen);
  rep.info("alpha_sup", geom.alpha_inf);
  rep.note("normal_frame_pivot", [&] {
    std::string s;
    for (int c : geom.pivot) s += (s.empty() ? "" : ",") + std::to_string(c);
    return s;
  }());
  if (!flags.export_path.empty()) io::write_scene(flags.export_path, scene);
  maybe_dump_fields(flags, scene.grid, {{"f", &scene.map}, {"alpha", &geom.alpha}});
  return emit(rep, flags);
}

int run_verify(const std::string& scene_spec, const std::string& obj_spec,
               const CommonFlags& flags) {
  ImmersionScene scene = resolve_scene(scene_spec, flags);
  FramedGeometry geom = build_geometry(scene);
  BendingOrPair obj = resolve_bending_or_pair(obj_spec, scene, geom);
  const double h2 = geom.grid().max_spacing() * geom.grid().max_spacing();

  io::Report rep;
  rep.command = "verify " + scene.label + " " + obj.label;

  std::optional<AssociatedPair> pair;
  if (obj.hypersurface_tensor) {
    HypersurfaceChecks checks = hypersurface_checks(geom, *obj.hypersurface_tensor);
    const double tol = fundsys_tol(geom, flags.tol_scale);
    rep.check("hypersurface_symmetry", checks.symmetry, tol);
    rep.check("hypersurface_codazzi", checks.codazzi, tol);
    rep.check("hypersurface_wedge", checks.wedge, tol);
    if (rep.all_pass()) pair = hypersurface_pair(geom, *obj.hypersurface_tensor, tol);
  } else if (obj.bending) {
    double bres = bending_residual(geom, *obj.bending);
    rep.check("bending_residual", bres, tol_bend(geom, flags.tol_scale));
    auto [derived, p] = associated_pair(geom, *obj.bending);
    rep.check("b_symmetry", b_symmetry_residual(geom, derived),
              10.0 * h2 * flags.tol_scale);
    rep.check("tangential_identity", tangential_identity_residual(geom, derived, p),
              10.0 * h2 * flags.tol_scale);
    pair = std::move(p);
  } else {
    pair = std::move(*obj.pair);
  }

  if (pair) {
    SystemReport sys = verify(geom, *pair, fundsys_tol(geom, flags.tol_scale));
    rep.check("gauss", sys.gauss, sys.tol);
    rep.check("codazzi", sys.codazzi, sys.tol);
    rep.check("codazzi2", sys.codazzi2, sys.tol);
    rep.check("ricci", sys.ricci, sys.tol);
    rep.check("compatibility", sys.anti, sys.tol);
    rep.info("pair_scale", pair_scale(geom, *pair));
    if (!flags.export_path.empty()) io::write_pair(flags.export_path, scene.grid, *pair);
    maybe_dump_fields(flags, scene.grid, {{"beta", &pair->beta}, {"E", &pair->E}});
  }
  return emit(rep, flags);
}

int run_reconstruct(const std::string& scene_spec, const std::string& obj_spec,
                    const CommonFlags& flags) {
  ImmersionScene scene = resolve_scene(scene_spec, flags);
  FramedGeometry geom = build_geometry(scene);
  BendingOrPair obj = resolve_bending_or_pair(obj_spec, scene, geom);
  const double h2 = geom.grid().max_spacing() * geom.grid().max_spacing();

  io::Report rep;
  rep.command = "reconstruct " + scene.label + " " + obj.label;

  AssociatedPair pair = obj.pair ? std::move(*obj.pair)
                                 : associated_pair(geom, *obj.bending).second;
  ReconstructOptions opts;
  opts.base = parse_base(flags.base, scene.grid);
  opts.tol_scale = flags.tol_scale;
  try {
    ReconstructResult res = reconstruct(geom, pair, opts);
    rep.check("system_worst", res.report.system.worst(), res.report.system.tol);
    rep.check("cell_loop", res.report.max_cell_loop, 30.0 * h2 * flags.tol_scale);
    rep.check("skewness", res.report.skewness, tol_skew(geom, flags.tol_scale));
    rep.check("transposed_sweep", res.report.transposed_sweep, 50.0 * h2 * flags.tol_scale);
    rep.check("bending_residual", res.report.bending_residual, 30.0 * h2 * flags.tol_scale);
    for (int d = 0; d < geom.n; ++d)
      if (scene.grid.periodic(d))
        rep.check("holonomy_axis_" + std::to_string(d), res.report.holonomy[d],
                  fundsys_tol(geom, flags.tol_scale));
    if (!flags.export_path.empty()) io::write_bending(flags.export_path, res.T);
    maybe_dump_fields(flags, scene.grid, {{"T", &res.T.T}, {"D", &res.D.D}});
  } catch (const ReconstructError& e) {
    rep.note("error", e.what());
    rep.check("reconstruct_preconditions", 1.0, 0.0);  // recorded failure
  }
  return emit(rep, flags);
}

int run_classify(const std::string& scene_spec, const std::string& obj_spec,
                 const CommonFlags& flags) {
  ImmersionScene scene = resolve_scene(scene_spec, flags);
  FramedGeometry geom = build_geometry(scene);
  BendingOrPair obj = resolve_bending_or_pair(obj_spec, scene, geom);

  io::Report rep;
  rep.command = "classify " + scene.label + " " + obj.label;
  const double tol = tol_trivial(geom, flags.tol_scale);

  std::optional<AssociatedPair> pair;
  if (obj.bending) {
    double bres = bending_residual(geom, *obj.bending);
    rep.check("bending_residual", bres, tol_bend(geom, flags.tol_scale));
    KillingFit fit = fit_killing(scene, *obj.bending);
    rep.info("killing_fit_residual", fit.residual);
    rep.info("killing_fit_margin", fit.residual / tol);
    if (fit.rank_deficient) rep.note("killing_fit", "normal equations rank deficient");
    rep.note("field_verdict", fit.residual <= tol ? "trivial" : "nontrivial");
    pair = associated_pair(geom, *obj.bending).second;
  } else {
    pair = std::move(*obj.pair);
  }

  PairTriviality triv = pair_triviality(geom, *pair);
  rep.info("res_beta", triv.res_beta);
  rep.info("res_E", triv.res_E);
  rep.info("triviality_margin", std::max(triv.res_beta, triv.res_E) / tol);
  if (triv.impossible) rep.note("pair_triviality", "beta nonzero where alpha vanishes");
  rep.note("pair_verdict", triv.trivial(tol) ? "trivial" : "nontrivial");
  maybe_dump_fields(flags, scene.grid, {{"C", &triv.C}});
  return emit(rep, flags);
}

int run_snullity(const std::string& scene_spec, int s_opt, const std::string& nodes_opt,
                 const CommonFlags& flags) {
  ImmersionScene scene = resolve_scene(scene_spec, flags);
  FramedGeometry geom = build_geometry(scene);

  io::Report rep;
  rep.command = "snullity " + scene.label;
  std::vector<std::size_t> nodes;
  if (nodes_opt.empty()) {
    nodes = default_node_sample(scene.grid);
  } else {
    std::stringstream ss(nodes_opt);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
      std::vector<double> idx = parse_list(tok, ',');
      std::vector<int> ii(idx.begin(), idx.end());
      nodes.push_back(scene.grid.flat(ii));
    }
  }
  SNullityOptions opts;
  opts.seed = flags.seed;
  for (int s = s_opt > 0 ? s_opt : 1; s <= (s_opt > 0 ? s_opt : geom.p); ++s) {
    int worst = 0;
    for (std::size_t node : nodes)
      worst = std::max(worst, s_nullity(geom, node, s, opts).value);
    rep.info("nu_" + std::to_string(s), worst);
    rep.info("bound_n_minus_s_" + std::to_string(s), geom.n - s);
    rep.info("bound_n_minus_2s_" + std::to_string(s), geom.n - 2 * s);
  }
  return emit(rep, flags);
}

int run_product(const std::vector<std::string>& specs, const CommonFlags& flags) {
  if (specs.size() < 3)
    throw io::IoError("product needs at least two factor scenes and one bending");
  std::vector<ImmersionScene> factors;
  for (std::size_t i = 0; i + 1 < specs.size(); ++i)
    factors.push_back(resolve_scene(specs[i], flags));
  auto [scene, ps] = extrinsic_product(factors);
  FramedGeometry geom = build_geometry(scene);
  const double h2 = geom.grid().max_spacing() * geom.grid().max_spacing();

  io::Report rep;
  rep.command = "product " + scene.label + " " + specs.back();
  rep.check("cross_alpha", cross_alpha_residual(geom, ps), 10.0 * h2 * flags.tol_scale);

  BendingOrPair obj = resolve_bending_or_pair(specs.back(), scene, geom);
  if (!obj.bending) throw io::IoError("product: last argument must be a bending");
  rep.check("bending_residual", bending_residual(geom, *obj.bending),
            tol_bend(geom, flags.tol_scale));
  auto [derived, pair] = associated_pair(geom, *obj.bending);
  double adapted = adaptedness_residual(geom, pair, ps);
  rep.check("adaptedness", adapted, 10.0 * h2 * flags.tol_scale);

  SNullityOptions opts;
  opts.seed = flags.seed;
  ProductHypotheses hyp = product_hypotheses(geom, ps, opts);
  for (const HypothesisCheck& c : hyp.checks) {
    rep.info("nu_" + std::to_string(c.s), c.nu);
    rep.note("nu_" + std::to_string(c.s) + "_lt_n_minus_s",
             std::string(c.pass_ns ? "holds" : "fails") +
                 (c.limited_ns ? " (sampling-limited)" : ""));
    rep.note("nu_" + std::to_string(c.s) + "_lt_n_minus_2s",
             std::string(c.pass_n2s ? "holds" : "fails") +
                 (c.limited_n2s ? " (sampling-limited)" : ""));
  }
  rep.note("factor_codimension", hyp.pass_factor_codim ? "p_i < n_i holds" : "p_i < n_i fails");
  rep.note("aggregate_codimension", hyp.pass_aggregate_codim ? "p < n holds" : "p < n fails");

  if (rep.all_pass()) {
    SplitResult split = split_bending(geom, ps, *obj.bending, flags.tol_scale);
    rep.check("split_residual", split.residual, 50.0 * h2 * flags.tol_scale);
    rep.info("split_constancy", split.constancy_residual);
    if (!flags.export_path.empty() && !split.factors.empty())
      io::write_bending(flags.export_path, split.factors[0]);
  }
  return emit(rep, flags);
}

int run_solve_e(const std::string& scene_spec, const std::string& obj_spec,
                const CommonFlags& flags) {
  ImmersionScene scene = resolve_scene(scene_spec, flags);
  FramedGeometry geom = build_geometry(scene);
  BendingOrPair obj = resolve_bending_or_pair(obj_spec, scene, geom);
  const double h2 = geom.grid().max_spacing() * geom.grid().max_spacing();

  io::Report rep;
  rep.command = "solve-e " + scene.label + " " + obj.label;
  AssociatedPair pair = obj.pair ? std::move(*obj.pair)
                                 : associated_pair(geom, *obj.bending).second;
  try {
    GridField E = solve_E_from_beta(geom, pair.beta);
    double diff = 0.0;
    for (std::size_t i = 0; i < E.raw().size(); ++i)
      diff = std::max(diff, std::abs(E.raw()[i] - pair.E.raw()[i]));
    rep.check("E_reconstruction", diff / pair_scale(geom, pair),
              50.0 * h2 * flags.tol_scale);
    AssociatedPair solved = make_pair_from_fields(geom, pair.beta, E);
    rep.check("codazzi_with_solved_E", codazzi_residual(geom, solved),
              fundsys_tol(geom, flags.tol_scale));
    maybe_dump_fields(flags, scene.grid, {{"E", &E}});
  } catch (const ClassifyError& e) {
    rep.note("error", e.what());
    rep.check("first_normal_space_full", 1.0, 0.0);
  }
  return emit(rep, flags);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for infinitesimal bendings of submanifolds"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string scene_spec, obj_spec, nodes_opt;
  int s_opt = 0;
  std::vector<std::string> product_specs;

  CLI::App* sanity = app.add_subcommand("sanity", "build geometry and check structure equations");
  sanity->add_option("scene", scene_spec)->required();
  add_common(sanity, flags);

  CLI::App* verify_cmd = app.add_subcommand("verify", "verify a bending or pair");
  verify_cmd->add_option("scene", scene_spec)->required();
  verify_cmd->add_option("object", obj_spec)->required();
  add_common(verify_cmd, flags);

  CLI::App* rec = app.add_subcommand("reconstruct", "integrate a verified pair into a bending");
  rec->add_option("scene", scene_spec)->required();
  rec->add_option("object", obj_spec)->required();
  rec->add_option("--base", flags.base, "base node indices, e.g. '0,0'");
  add_common(rec, flags);

  CLI::App* cls = app.add_subcommand("classify", "triviality analysis");
  cls->add_option("scene", scene_spec)->required();
  cls->add_option("object", obj_spec)->required();
  add_common(cls, flags);

  CLI::App* snul = app.add_subcommand("snullity", "s-nullity sweep");
  snul->add_option("scene", scene_spec)->required();
  snul->add_option("--s", s_opt, "restrict to one s");
  snul->add_option("--nodes", nodes_opt, "semicolon-separated node indices 'i,j;i,j'");
  add_common(snul, flags);

  CLI::App* prod = app.add_subcommand("product", "extrinsic product analysis and splitting");
  prod->add_option("specs", product_specs, "factor scenes followed by one bending")->required();
  add_common(prod, flags);

  CLI::App* solve = app.add_subcommand("solve-e", "reconstruct E from beta");
  solve->add_option("scene", scene_spec)->required();
  solve->add_option("object", obj_spec)->required();
  add_common(solve, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sanity->parsed()) return run_sanity(scene_spec, flags);
    if (verify_cmd->parsed()) return run_verify(scene_spec, obj_spec, flags);
    if (rec->parsed()) return run_reconstruct(scene_spec, obj_spec, flags);
    if (cls->parsed()) return run_classify(scene_spec, obj_spec, flags);
    if (snul->parsed()) return run_snullity(scene_spec, s_opt, nodes_opt, flags);
    if (prod->parsed()) return run_product(product_specs, flags);
    if (solve->parsed()) return run_solve_e(scene_spec, obj_spec, flags);
  } catch (const io::IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const scenes::CatalogError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const GridError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const GeometryError& e) {
    std::cerr << "scene error: " << e.what() << "\n";
    return 2;
  } catch (const FundsysError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const ProductError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const ClassifyError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const ReconstructError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
