// openbethe_cli.cpp
//
// Command-line driver. Subcommands:
//   verify-identities   run the algebraic identity suite
//   spectrum            sector sweep + exact-diagonalization matching
//   bethe-solve         solve the configured sectors, write roots.json
//   bethe-check         verify roots from a roots.json against the equations
//
// Exit codes: 0 = all checks pass, 1 = numerical failure, 2 = config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "openbethe/harness.hpp"

using namespace openbethe;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  double tol = -1.0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_required = false) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", args.out_dir, "output directory");
  if (out_required) out->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--tol", args.tol, "override the subcommand's primary tolerance");
}

ExperimentConfig load(const CommonArgs& args, const char* tol_key) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.tol > 0) cfg.tolerances[tol_key] = args.tol;
  return cfg;
}

int cmd_verify_identities(const CommonArgs& args) {
  ExperimentConfig cfg = load(args, "identity");
  auto checks = run_identity_suite(cfg);
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%-32s %-4s  max residual %.3e  (tol %.1e)\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.max_residual, c.tolerance);
    all = all && c.pass;
  }
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    write_file(args.out_dir + "/report.json",
               identity_report_json(cfg, checks).dump(2) + "\n");
  }
  return all ? 0 : 1;
}

int cmd_spectrum(const CommonArgs& args) {
  ExperimentConfig cfg = load(args, "ed_match");
  SpectrumReport rep = run_spectrum(cfg);
  std::printf("u0 = (%g, %g); %d eigenvalues; completeness %.4f\n", rep.u0.real(),
              rep.u0.imag(), static_cast<int>(rep.ed_at_u0.size()), rep.completeness);
  for (const auto& sr : rep.sectors) {
    std::string label;
    for (std::size_t i = 0; i < sr.M.size(); ++i)
      label += (i ? "," : "") + std::to_string(sr.M[i]);
    int matched = 0;
    for (const auto& s : sr.solutions)
      if (s.matched_ed >= 0) ++matched;
    std::printf("  sector (%s): %zu solution(s), %d matched\n", label.c_str(),
                sr.solutions.size(), matched);
  }
  for (const auto& warn : rep.warnings) std::printf("warning: %s\n", warn.c_str());
  if (!args.out_dir.empty()) emit_results(cfg, rep, args.out_dir);
  return rep.completeness >= 1.0 ? 0 : 1;
}

json roots_json(const ExperimentConfig& cfg, const std::vector<SectorReport>& sectors) {
  json out = json::array();
  for (const auto& sr : sectors) {
    json jsols = json::array();
    for (const auto& r : sr.solutions) {
      json roots = json::array();
      for (const auto& fam : r.solution.finite.roots) {
        json jf = json::array();
        for (cplx u : fam) jf.push_back(to_json(u));
        roots.push_back(jf);
      }
      jsols.push_back(json{{"roots", roots},
                           {"infinite_roots", r.solution.infinite},
                           {"bethe_residual", round12(r.bethe_residual)}});
    }
    out.push_back(json{{"M", json(sr.M)}, {"solutions", jsols}});
  }
  return json{{"config", config_echo(cfg)}, {"sectors", out}};
}

int cmd_bethe_solve(const CommonArgs& args) {
  ExperimentConfig cfg = load(args, "bethe_residual");
  if (cfg.sectors.empty()) throw ConfigError("bethe-solve: config lists no sectors");
  const ChainSpec chain = cfg.chain();
  BoundaryWeights w = boundary_weights(chain, cfg.boundary);
  for (const auto& warn : w.warnings) std::printf("warning: %s\n", warn.c_str());

  std::vector<std::vector<int>> sectors = cfg.sectors;
  std::stable_sort(sectors.begin(), sectors.end(),
                   [](const std::vector<int>& a, const std::vector<int>& b) {
                     int ta = 0, tb = 0;
                     for (int x : a) ta += x;
                     for (int x : b) tb += x;
                     return ta < tb;
                   });
  std::vector<SectorSolution> priors;
  std::vector<SectorReport> out;
  for (const auto& M : sectors) {
    SolveOptions opts;
    opts.seed = cfg.seed;
    for (int m : M) opts.seed = opts.seed * 1000003ull + static_cast<std::uint64_t>(m + 7);
    auto sols = enumerate_sector_solutions(M, w, opts, priors);
    SectorReport sr;
    sr.M = M;
    std::string label;
    for (std::size_t i = 0; i < M.size(); ++i)
      label += (i ? "," : "") + std::to_string(M[i]);
    std::printf("sector (%s): %zu solution(s)\n", label.c_str(), sols.size());
    for (auto& s : sols) {
      SolutionRecord r;
      r.solution = s;
      r.bethe_residual = s.finite.total() > 0 ? bethe_residual(s.finite, w).max_norm : 0.0;
      sr.solutions.push_back(std::move(r));
      priors.push_back(s);
    }
    out.push_back(std::move(sr));
  }
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    write_file(args.out_dir + "/roots.json", roots_json(cfg, out).dump(2) + "\n");
  }
  return 0;
}

int cmd_bethe_check(const CommonArgs& args, const std::string& roots_path) {
  ExperimentConfig cfg = load(args, "bethe_residual");
  const double tol_be = cfg.tol_or("bethe_residual", tol::bethe_residual);
  const double tol_res = cfg.tol_or("residue", tol::residue);
  const ChainSpec chain = cfg.chain();
  BoundaryWeights w = boundary_weights(chain, cfg.boundary);

  std::ifstream in(roots_path);
  if (!in) throw ConfigError("bethe-check: cannot open '" + roots_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bethe-check: invalid JSON: ") + e.what());
  }
  bool all = true;
  for (const auto& js : j.at("sectors")) {
    std::vector<int> M = js.at("M").get<std::vector<int>>();
    for (const auto& sol : js.at("solutions")) {
      RootFamilies rf;
      rf.M.assign(M.size(), 0);
      for (const auto& fam : sol.at("roots")) {
        std::vector<cplx> f;
        for (const auto& u : fam) f.push_back(detail::parse_complex(u, "root"));
        rf.roots.push_back(std::move(f));
      }
      if (rf.roots.size() != M.size())
        throw ConfigError("bethe-check: root family count does not match sector");
      for (std::size_t k = 0; k < rf.roots.size(); ++k)
        rf.M[k] = static_cast<int>(rf.roots[k].size());
      double be = rf.total() > 0 ? bethe_residual(rf, w).max_norm : 0.0;
      double res = rf.total() > 0 ? residue_check(rf, w).max_rel_residue : 0.0;
      bool ok = be < tol_be && res < tol_res;
      all = all && ok;
      std::string label;
      for (std::size_t i = 0; i < M.size(); ++i)
        label += (i ? "," : "") + std::to_string(M[i]);
      std::printf("sector (%s): equation residual %.3e, max residue %.3e  %s\n",
                  label.c_str(), be, res, ok ? "PASS" : "FAIL");
    }
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open XXX spin-chain laboratory"};
  app.require_subcommand(1);

  CommonArgs vi_args, sp_args, bs_args, bc_args;
  std::string roots_path;

  auto* vi = app.add_subcommand("verify-identities", "run the algebraic identity suite");
  add_common(vi, vi_args);
  auto* sp = app.add_subcommand("spectrum", "sector sweep and eigenvalue matching");
  add_common(sp, sp_args);
  auto* bs = app.add_subcommand("bethe-solve", "solve the configured sectors");
  add_common(bs, bs_args);
  auto* bc = app.add_subcommand("bethe-check", "check roots against the equations");
  add_common(bc, bc_args);
  bc->add_option("--roots", roots_path, "roots.json produced by bethe-solve")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (vi->parsed()) return cmd_verify_identities(vi_args);
    if (sp->parsed()) return cmd_spectrum(sp_args);
    if (bs->parsed()) return cmd_bethe_solve(bs_args);
    if (bc->parsed()) return cmd_bethe_check(bc_args, roots_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
