// Batch driver: meshes, solves, verification sweeps and convergence tables
// for the boundary-domain integral equation laboratory.

#include "bdie/bdie.hpp"
#include "bdie/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using json = nlohmann::ordered_json;
using namespace bdie;

namespace {

struct Config {
  std::string kase = "MS1";
  std::string system = "d1";
  int level_lo = 1;
  int level_hi = 2;
  double r0 = 1.0;
  int surface_order = 3;
  int volume_order = 2;
  std::string outdir = "out";
  bool assertions = true;
  std::uint64_t seed = 12345;
  bool serial = false;

  QuadratureConfig quad() const {
    QuadratureConfig q;
    q.surface_order = surface_order;
    q.volume_order = volume_order;
    q.parallel = !serial;
    return q;
  }
};

// fixed-format doubles keep reports byte-identical across runs
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

json jnum(double v) { return json(fmt(v)); }

void load_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("config", "cannot open config file " + path);
  json j = json::parse(in);
  if (j.contains("case")) cfg.kase = j["case"].get<std::string>();
  if (j.contains("system")) cfg.system = j["system"].get<std::string>();
  if (j.contains("levels")) {
    const auto& l = j["levels"];
    cfg.level_lo = l[0].get<int>();
    cfg.level_hi = l[1].get<int>();
  }
  if (j.contains("r0")) cfg.r0 = j["r0"].get<double>();
  if (j.contains("surface_order")) cfg.surface_order = j["surface_order"].get<int>();
  if (j.contains("volume_order")) cfg.volume_order = j["volume_order"].get<int>();
  if (j.contains("output")) cfg.outdir = j["output"].get<std::string>();
  if (j.contains("assertions")) cfg.assertions = j["assertions"].get<bool>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("serial")) cfg.serial = j["serial"].get<bool>();
}

void parse_levels(Config& cfg, const std::string& spec) {
  const auto dots = spec.find("..");
  if (dots == std::string::npos) {
    cfg.level_lo = cfg.level_hi = std::stoi(spec);
  } else {
    cfg.level_lo = std::stoi(spec.substr(0, dots));
    cfg.level_hi = std::stoi(spec.substr(dots + 2));
  }
  if (cfg.level_lo < 0 || cfg.level_hi > 6 || cfg.level_lo > cfg.level_hi)
    throw CLI::ValidationError("levels", "levels must satisfy 0 <= lo <= hi <= 6");
}

struct MeshSet {
  SurfaceMesh surface;
  VolumeMesh volume;
};
MeshSet make_meshes(int level, double r0) {
  MeshSet m;
  m.surface = build_icosphere(level, r0);
  m.volume = build_ball_mesh(m.surface, level + 1);
  return m;
}

void write_report(const Config& cfg, const json& body, int exit_code) {
  std::filesystem::create_directories(cfg.outdir);
  json report;
  report["config"] = {{"case", cfg.kase},
                      {"system", cfg.system},
                      {"levels", {cfg.level_lo, cfg.level_hi}},
                      {"r0", jnum(cfg.r0)},
                      {"surface_order", cfg.surface_order},
                      {"volume_order", cfg.volume_order},
                      {"seed", cfg.seed},
                      {"assertions", cfg.assertions},
                      {"serial", cfg.serial}};
  report["result"] = body;
  report["status"] = exit_code == 0 ? "ok" : "assertion_failure";
  std::ofstream out(cfg.outdir + "/report.json");
  out << report.dump(2) << "\n";
}

void write_csv(const Config& cfg, const std::string& name,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::filesystem::create_directories(cfg.outdir);
  std::ofstream out(cfg.outdir + "/" + name);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << "\n";
  }
}

BdieSystem assemble_named(const BdieWorkspace& ws, const std::string& name) {
  if (name == "d1") return assemble_d1(ws);
  if (name == "d2") return assemble_d2(ws);
  if (name == "n1") return assemble_n1(ws);
  if (name == "n2") return assemble_n2(ws);
  if (name == "n1hat") return perturb(ws, assemble_n1(ws));
  if (name == "n2hat") return perturb(ws, assemble_n2(ws));
  throw std::invalid_argument("unknown system " + name);
}

Vector lumped_volume_mass(const VolumeMesh& mesh) {
  Vector m = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_tets(); ++t)
    for (int k = 0; k < 4; ++k) m[mesh.tets[t][k]] += mesh.volumes[t] / 4.0;
  return m;
}

int cmd_mesh(const Config& cfg) {
  json body = json::array();
  bool ok = true;
  for (int level = cfg.level_lo; level <= cfg.level_hi; ++level) {
    const MeshSet m = make_meshes(level, cfg.r0);
    const auto sa = oracle::sphere_analytics(cfg.r0);
    json j;
    j["level"] = level;
    j["vertices"] = m.surface.num_vertices();
    j["triangles"] = m.surface.num_triangles();
    j["tets"] = m.volume.num_tets();
    j["volume_vertices"] = m.volume.num_vertices();
    j["euler_characteristic"] = m.surface.euler_characteristic();
    j["area"] = jnum(m.surface.total_area());
    j["area_rel_defect"] = jnum((sa.area - m.surface.total_area()) / sa.area);
    j["volume"] = jnum(m.volume.total_volume());
    j["volume_rel_defect"] = jnum((sa.volume - m.volume.total_volume()) / sa.volume);
    body.push_back(j);
    if (cfg.assertions && m.surface.euler_characteristic() != 2) ok = false;
    std::filesystem::create_directories(cfg.outdir);
    std::ofstream dump(cfg.outdir + "/mesh_level" + std::to_string(level) + ".txt");
    dump_mesh(dump, m.volume);
  }
  write_report(cfg, body, ok ? 0 : 1);
  return ok ? 0 : 1;
}

int cmd_solve(const Config& cfg) {
  json body = json::array();
  std::vector<std::vector<double>> rows;
  bool ok = true;
  for (int level = cfg.level_lo; level <= cfg.level_hi; ++level) {
    const MeshSet m = make_meshes(level, cfg.r0);
    const auto kase = case_by_name(cfg.kase, cfg.r0);
    const auto ws = build_workspace(kase, m.volume, cfg.quad());
    const BdieSystem sys = assemble_named(ws, cfg.system);
    const SolveReport rep = solve(sys);
    json j;
    j["level"] = level;
    j["system"] = to_string(sys.label);
    j["unknowns"] = sys.n_u + sys.n_b;
    j["residual"] = jnum(rep.residual);
    double uerr = -1.0;
    if (kase.u) {
      const DomainDensity ue = DomainDensity::interpolate(m.volume, kase.u);
      const Vector mass = lumped_volume_mass(m.volume);
      Vector base = ue.values;
      if (sys.label != SystemLabel::D1 && sys.label != SystemLabel::D2) {
        // Neumann solutions are pinned to boundary-mean zero
        const Vector m1 = ws.bops.M11 * Vector::Ones(ws.n_s());
        Vector tr(ws.n_s());
        for (int v = 0; v < ws.n_s(); ++v) tr[v] = ue.values[m.volume.surface_to_volume[v]];
        const double mean = m1.dot(tr) / ws.boundary_area;
        base.array() -= mean;
      }
      const Vector diff = rep.u - base;
      const double nb = std::sqrt(base.cwiseAbs2().dot(mass));
      uerr = std::sqrt(diff.cwiseAbs2().dot(mass)) / (nb > 0 ? nb : 1.0);
      j["u_rel_l2_error"] = jnum(uerr);
    }
    if (sys.label == SystemLabel::N1hat || sys.label == SystemLabel::N2hat) {
      const Vector m1 = ws.bops.M11 * Vector::Ones(ws.n_s());
      j["phi_mean"] = jnum(m1.dot(rep.boundary) / ws.boundary_area);
      j["solvability"] = jnum(solvability_neumann(kase, m.volume, cfg.quad()));
    }
    body.push_back(j);
    rows.push_back({static_cast<double>(level), rep.residual, uerr});
    if (cfg.assertions && rep.residual > 1e-8) ok = false;
  }
  write_csv(cfg, "solve_" + cfg.system + "_" + cfg.kase + ".csv",
            {"level", "residual", "u_rel_l2_error"}, rows);
  write_report(cfg, body, ok ? 0 : 1);
  return ok ? 0 : 1;
}

int cmd_verify(const Config& cfg, const std::string& what) {
  json body = json::array();
  std::vector<std::vector<double>> rows;
  bool ok = true;
  std::mt19937_64 rng(cfg.seed);
  double prev = -1.0;
  for (int level = cfg.level_lo; level <= cfg.level_hi; ++level) {
    const MeshSet m = make_meshes(level, cfg.r0);
    const auto kase = case_by_name(cfg.kase, cfg.r0);
    const QuadratureConfig q = cfg.quad();
    json j;
    j["level"] = level;
    if (what == "green") {
      DomainDensity u = kase.u ? DomainDensity::interpolate(m.volume, kase.u)
                               : DomainDensity::zero(m.volume);
      const GreenReport first = third_green_residual(u, kase.a, q);
      const GreenReport gen = generalized_third_green_residual(u, kase.rhs, kase.a, q);
      j["third_green_rel"] = jnum(first.relative_residual);
      j["generalized_third_green_rel"] = jnum(gen.relative_residual);
      rows.push_back({static_cast<double>(level), first.relative_residual,
                      gen.relative_residual});
      if (cfg.assertions && prev >= 0 && gen.relative_residual > prev) ok = false;
      prev = gen.relative_residual;
    } else if (what == "jumps") {
      BoundaryDensity g0 = BoundaryDensity::p0(m.surface);
      BoundaryDensity g1 = BoundaryDensity::p1(m.surface);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (int i = 0; i < g0.values.size(); ++i) g0.values[i] = dist(rng);
      for (int i = 0; i < g1.values.size(); ++i) g1.values[i] = dist(rng);
      const JumpReport rep = jump_check(kase.a, m.volume, g0, g1, q);
      j["single_layer"] = jnum(rep.single_layer);
      j["double_layer"] = jnum(rep.double_layer);
      j["conormal_single_layer"] = jnum(rep.conormal_single_layer);
      rows.push_back({static_cast<double>(level), rep.single_layer, rep.double_layer,
                      rep.conormal_single_layer});
    } else if (what == "identities") {
      const BoundaryOps ops = assemble_boundary_ops(kase.a, m.surface, q);
      const double dv = (ops.V - ops.V_composed).norm() / ops.V.norm();
      const double dw = (ops.W - ops.W_composed).norm() / std::max(ops.W.norm(), 1e-30);
      const double dwp = (ops.Wp - ops.Wp_composed).norm() / ops.Wp.norm();
      j["V_vs_composed"] = jnum(dv);
      j["W_vs_composed"] = jnum(dw);
      j["Wp_vs_composed"] = jnum(dwp);
      rows.push_back({static_cast<double>(level), dv, dw, dwp});
      if (cfg.assertions && (dv > 1e-8 || dw > 1e-8 || dwp > 1e-8)) ok = false;
    } else if (what == "conormal") {
      DomainDensity u = DomainDensity::interpolate(m.volume, kase.u);
      const ConormalResult res = generalized_conormal(kase.rhs, u, kase.a, q);
      const BoundaryOps ops = assemble_boundary_ops(coefficient_one(), m.surface, q);
      const Vector& t = res.density.values;
      double l2 = 0.0;
      for (int T = 0; T < m.surface.num_triangles(); ++T)
        l2 += m.surface.areas[T] * t[T] * t[T];
      j["p0_l2_norm"] = jnum(std::sqrt(l2));
      j["hm12_norm"] = jnum(std::sqrt(t.dot(ops.V0 * t)));
      j["interior_residual"] = jnum(res.interior_residual);
      rows.push_back({static_cast<double>(level), std::sqrt(l2),
                      std::sqrt(t.dot(ops.V0 * t)), res.interior_residual});
    } else {
      throw std::invalid_argument("unknown verification " + what);
    }
    body.push_back(j);
  }
  write_csv(cfg, "verify_" + what + "_" + cfg.kase + ".csv",
            what == "green"
                ? std::vector<std::string>{"level", "third_green", "generalized"}
            : what == "jumps"
                ? std::vector<std::string>{"level", "single_layer", "double_layer",
                                           "conormal_single_layer"}
            : what == "identities"
                ? std::vector<std::string>{"level", "V", "W", "Wp"}
                : std::vector<std::string>{"level", "p0_l2", "hm12", "interior"},
            rows);
  write_report(cfg, body, ok ? 0 : 1);
  return ok ? 0 : 1;
}

int cmd_nullspace(const Config& cfg) {
  json body = json::array();
  std::vector<std::vector<double>> rows;
  bool ok = true;
  for (int level = cfg.level_lo; level <= cfg.level_hi; ++level) {
    const MeshSet m = make_meshes(level, cfg.r0);
    const auto kase = case_by_name(cfg.kase, cfg.r0);
    const auto ws = build_workspace(kase, m.volume, cfg.quad());
    const BdieSystem sys = assemble_named(ws, cfg.system);
    const SolveReport rep = null_space(sys);
    const Vector ones = Vector::Ones(sys.a.cols()).normalized();
    const double cosang = std::abs(rep.null_vectors.col(0).normalized().dot(ones));
    json j;
    j["level"] = level;
    j["sigma_min"] = jnum(rep.smallest_sv[0]);
    j["sigma_2"] = jnum(rep.smallest_sv.size() > 1 ? rep.smallest_sv[1] : 0.0);
    j["sigma_max"] = jnum(rep.sigma_max);
    j["kernel_cosine_with_ones"] = jnum(cosang);
    body.push_back(j);
    rows.push_back({static_cast<double>(level), rep.smallest_sv[0],
                    rep.smallest_sv.size() > 1 ? rep.smallest_sv[1] : 0.0, rep.sigma_max,
                    cosang});
    if (cfg.assertions && level >= 2 &&
        (cfg.system == "n1" || cfg.system == "n2") && cosang < 0.99)
      ok = false;
  }
  write_csv(cfg, "nullspace_" + cfg.system + ".csv",
            {"level", "sigma_min", "sigma_2", "sigma_max", "kernel_cosine"}, rows);
  write_report(cfg, body, ok ? 0 : 1);
  return ok ? 0 : 1;
}

int cmd_converge(const Config& cfg) {
  json body = json::array();
  std::vector<std::vector<double>> rows;
  double prev = -1.0;
  bool ok = true;
  for (int level = cfg.level_lo; level <= cfg.level_hi; ++level) {
    const MeshSet m = make_meshes(level, cfg.r0);
    const auto kase = case_by_name(cfg.kase, cfg.r0);
    const auto ws = build_workspace(kase, m.volume, cfg.quad());
    const BdieSystem sys = assemble_named(ws, cfg.system);
    const SolveReport rep = solve(sys);
    double err = 0.0;
    if (kase.u) {
      const DomainDensity ue = DomainDensity::interpolate(m.volume, kase.u);
      const Vector mass = lumped_volume_mass(m.volume);
      err = std::sqrt(Vector(rep.u - ue.values).cwiseAbs2().dot(mass)) /
            std::sqrt(ue.values.cwiseAbs2().dot(mass));
    }
    const double rate = prev > 0 && err > 0 ? std::log2(prev / err) : 0.0;
    json j;
    j["level"] = level;
    j["u_rel_l2_error"] = jnum(err);
    j["rate"] = jnum(rate);
    body.push_back(j);
    rows.push_back({static_cast<double>(level), err, rate});
    if (cfg.assertions && prev > 0 && err > prev) ok = false;
    prev = err;
  }
  write_csv(cfg, "converge_" + cfg.system + "_" + cfg.kase + ".csv",
            {"level", "u_rel_l2_error", "rate"}, rows);
  write_report(cfg, body, ok ? 0 : 1);
  return ok ? 0 : 1;
}

int cmd_oracle(const Config& cfg) {
  json body = json::array();
  bool ok = true;
  for (int level = cfg.level_lo; level <= cfg.level_hi; ++level) {
    const MeshSet m = make_meshes(level, cfg.r0);
    const auto kase = case_by_name(cfg.kase, cfg.r0);
    const QuadratureConfig q = cfg.quad();
    std::mt19937_64 rng(cfg.seed + level);
    std::uniform_real_distribution<double> dist(-0.45, 0.45);
    json points = json::array();
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vec3 y(dist(rng) * cfg.r0, dist(rng) * cfg.r0, dist(rng) * cfg.r0);
      const Vector main =
          volume_potential_rhs(kase.rhs, kase.a, m.volume, {{y, -1}}, q);
      const auto ref = oracle::brute_volume_potential(kase.rhs, kase.a, m.volume, y, 6);
      const double rel =
          std::abs(main[0] - ref.value) / std::max(std::abs(ref.value), 1e-12);
      worst = std::max(worst, rel);
      json pj;
      pj["point"] = {jnum(y.x()), jnum(y.y()), jnum(y.z())};
      pj["main"] = jnum(main[0]);
      pj["oracle"] = jnum(ref.value);
      pj["oracle_error_estimate"] = jnum(ref.error_estimate);
      pj["rel_diff"] = jnum(rel);
      points.push_back(pj);
    }
    json j;
    j["level"] = level;
    j["points"] = points;
    j["worst_rel_diff"] = jnum(worst);
    body.push_back(j);
    if (cfg.assertions && !kase.rhs.boundary_singular && worst > 5e-3) ok = false;
  }
  write_report(cfg, body, ok ? 0 : 1);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametrix boundary-domain integral equation laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  Config cfg;
  std::string config_path, levels_spec, verify_what;

  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--case", cfg.kase, "manufactured case name");
  app.add_option("--levels,--level", levels_spec, "level or range, e.g. 2 or 1..3");
  app.add_option("--r0", cfg.r0, "ball radius");
  app.add_option("--surface-order", cfg.surface_order, "surface quadrature order");
  app.add_option("--volume-order", cfg.volume_order, "volume quadrature order");
  app.add_option("--output", cfg.outdir, "output directory");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_flag("--serial", cfg.serial, "disable parallel assembly");
  bool no_assert = false;
  app.add_flag("--no-assert", no_assert, "report only, never fail assertions");

  auto* mesh = app.add_subcommand("mesh", "build meshes, dump and check invariants");
  auto* solve_cmd = app.add_subcommand("solve", "assemble and solve one BDIE system");
  solve_cmd->add_option("system", cfg.system, "d1|d2|n1|n2|n1hat|n2hat")->required();
  auto* verify = app.add_subcommand("verify", "residual/identity verifications");
  verify->add_option("what", verify_what, "green|jumps|identities|conormal")->required();
  auto* nullsp = app.add_subcommand("nullspace", "singular-value analysis of a system");
  nullsp->add_option("system", cfg.system, "d1|d2|n1|n2|n1hat|n2hat")->required();
  auto* conv = app.add_subcommand("converge", "level sweep with observed rates");
  conv->add_option("system", cfg.system, "d1|d2|n1|n2|n1hat|n2hat")->required();
  auto* orac = app.add_subcommand("oracle", "cross-check potentials against the octree oracle");

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (!levels_spec.empty()) parse_levels(cfg, levels_spec);
    if (no_assert) cfg.assertions = false;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    if (mesh->parsed()) return cmd_mesh(cfg);
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    if (verify->parsed()) return cmd_verify(cfg, verify_what);
    if (nullsp->parsed()) return cmd_nullspace(cfg);
    if (conv->parsed()) return cmd_converge(cfg);
    if (orac->parsed()) return cmd_oracle(cfg);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
