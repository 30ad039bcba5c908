#include "kernelconv/run.hpp"

#include <chrono>
#include <filesystem>
#include <utility>

#include <nlohmann/json.hpp>

#include "kernelconv/io.hpp"
#include "kernelconv/kernel.hpp"
#include "kernelconv/metrics.hpp"

namespace kernelconv {

namespace {

using json = nlohmann::ordered_json;

json point_json(Point p) { return json::array({p.x, p.y}); }
json cell_json(Cell c) { return json::array({c.x, c.y}); }

json stab_json(const StabilizationReport& r) {
  return {{"stabilized", r.stabilized},
          {"k_or_j_reached", r.k_or_j_reached},
          {"window_held", r.window_held},
          {"method", r.method}};
}

json mask_summary(const GridMask& m) {
  return {{"cells", m.count()}, {"empty", !m.any()}};
}

std::string error_kind(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const GridError*>(&e)) return "GridError";
  if (dynamic_cast<const SpecError*>(&e)) return "SpecError";
  if (dynamic_cast<const EvalError*>(&e)) return "EvalError";
  if (dynamic_cast<const FieldError*>(&e)) return "FieldError";
  if (dynamic_cast<const TamenessError*>(&e)) return "TamenessError";
  if (dynamic_cast<const MonotoneError*>(&e)) return "MonotoneError";
  if (dynamic_cast<const ClassError*>(&e)) return "ClassError";
  if (dynamic_cast<const MetricError*>(&e)) return "MetricError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  if (dynamic_cast<const InternalError*>(&e)) return "InternalError";
  return "Error";
}

struct Emitter {
  std::string out_dir;
  std::string stem;
  std::vector<std::string> artifacts;

  std::string path_for(const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
  }
  std::string mask(const GridMask& m, const std::string& name, json& slot) {
    std::string p = path_for(name);
    write_pgm(m, p);
    artifacts.push_back(p);
    slot[name.substr(0, name.rfind('.'))] = name;
    return p;
  }
};

const DomainSequenceSpec& need_sequence(const RunConfig& cfg) {
  if (!cfg.sequence) throw ValidationError("this command needs a \"sequence\" section");
  return *cfg.sequence;
}

const ScalarFieldSeq& need_field(const RunConfig& cfg) {
  if (!cfg.field) throw ValidationError("this command needs a \"field\" section");
  return *cfg.field;
}

Point need_field_point(const RunConfig& cfg) {
  if (!cfg.field_point) throw ValidationError("this command needs a \"field_point\" entry");
  return *cfg.field_point;
}

json residue_labels(const std::vector<int>& rs) {
  json out = json::array();
  for (int r : rs) out.push_back(r + 1);
  return out;
}

GridMask sublevel_mask(const FieldGrid& f) {
  GridMask m(f.spec);
  for (int iy = 0; iy < f.spec.ny; ++iy)
    for (int ix = 0; ix < f.spec.nx; ++ix)
      if (f.at({ix, iy}) < 0) m.set({ix, iy});
  return m;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "tame",   "kernel",        "prekernel", "liminf",     "converge",  "select",
      "normal-verify", "psi",    "psi-kernel", "cross-check", "hausdorff", "render"};
  return names;
}

RunOutcome run_command(const std::string& command, const RunConfig& config,
                       const RunOptions& options) {
  auto started = std::chrono::steady_clock::now();

  const int band = options.band.value_or(config.params.band);
  const std::uint64_t seed = options.seed.value_or(config.params.seed);

  std::string stem = std::filesystem::path(config.source_path).stem().string();
  if (stem.empty()) stem = "config";
  std::string report_name = stem + "_" + command + ".json";
  for (char& c : report_name)
    if (c == '-') c = '_';

  Emitter emit{options.out_dir, stem, {}};

  json report;
  report["command"] = command;
  report["config"] = {{"path", config.source_path}, {"digest", config.digest}};
  report["grid"] = {{"origin", point_json(config.grid.origin)},
                    {"extent", point_json(config.grid.extent)},
                    {"nx", config.grid.nx},
                    {"ny", config.grid.ny},
                    {"h", config.grid.hmax()}};
  bool verdict = true;

  try {
    std::filesystem::create_directories(options.out_dir);
    bool known = false;
    for (const auto& n : command_names()) known = known || n == command;
    if (!known) throw ValidationError("unknown command \"" + command + "\"");

    json body;
    json artifacts_json = json::object();

    if (command == "tame") {
      SequenceEvaluator ev(need_sequence(config));
      TamenessReport t = ev.tameness_check();
      body = {{"tamed", t.tamed},
              {"k", t.k},
              {"ball_radius", t.ball_radius},
              {"reason", t.reason},
              {"point_track_ok", t.point_track_ok},
              {"point_track_gap", t.point_track_gap}};
      verdict = t.tamed;
    } else if (command == "kernel") {
      SequenceEvaluator ev(need_sequence(config));
      KernelResult k = kernel(ev);
      body = {{"k_stabilized", k.k_stabilized},
              {"stabilization", stab_json(k.stabilization)},
              {"kernel", mask_summary(k.pointed.mask)}};
      if (k.pointed.point) body["base_cell"] = cell_json(*k.pointed.point);
      emit.mask(k.pointed.mask, stem + "_kernel.pgm", artifacts_json);
    } else if (command == "prekernel") {
      SequenceEvaluator ev(need_sequence(config));
      GridMask pk = pre_kernel(ev);
      body = {{"stabilization", stab_json(ev.outer_report())}, {"prekernel", mask_summary(pk)}};
      emit.mask(pk, stem + "_prekernel.pgm", artifacts_json);
    } else if (command == "liminf") {
      SequenceEvaluator ev(need_sequence(config));
      GridMask li = liminf_set(ev);
      body = {{"stabilization", stab_json(ev.outer_report())}, {"liminf", mask_summary(li)}};
      emit.mask(li, stem + "_liminf.pgm", artifacts_json);
    } else if (command == "converge") {
      SequenceEvaluator ev(need_sequence(config));
      ConvergenceVerdict v = convergence_check(ev);
      body["converges"] = v.converges;
      if (v.witness)
        body["witness"] = {{"a", residue_labels(v.witness->first)},
                           {"b", residue_labels(v.witness->second)}};
      else
        body["witness"] = nullptr;
      json residues = json::array();
      for (const auto& [r, pm] : v.residue_kernels) {
        residues.push_back(
            {{"label", r + 1}, {"cells", pm.mask.count()}, {"empty", pm.is_empty()}});
        emit.mask(pm.mask, stem + "_converge_r" + std::to_string(r + 1) + ".pgm", artifacts_json);
      }
      body["residues"] = residues;
      verdict = v.converges;
    } else if (command == "select") {
      SequenceEvaluator ev(need_sequence(config));
      SelectionResult sel = select_subsequence(ev);
      body = {{"residue", sel.residue_label},
              {"maximal_residues", residue_labels(sel.maximal_residues)},
              {"kernel", mask_summary(sel.kernel.mask)}};
      emit.mask(sel.kernel.mask, stem + "_select_kernel.pgm", artifacts_json);
    } else if (command == "normal-verify") {
      SequenceEvaluator ev(need_sequence(config));
      PointedMask candidate;
      if (config.params.candidate_shape) {
        GridMask raster = rasterize_shape(*config.params.candidate_shape, config.grid, 0.0);
        Cell q = ev.limit_cell();
        candidate = raster.test(q) ? PointedMask{connected_component(raster, q), q}
                                   : PointedMask::empty(config.grid);
        body["candidate"] = "shape";
      } else {
        candidate = kernel(ev).pointed;
        body["candidate"] = "kernel";
      }
      bool ok = normal_limit_verify(ev, candidate, config.params.trials, seed);
      body["verified"] = ok;
      body["trials"] = config.params.trials;
      body["seed"] = seed;
      body["candidate_mask"] = mask_summary(candidate.mask);
      emit.mask(candidate.mask, stem + "_normal_verify_candidate.pgm", artifacts_json);
      verdict = ok;
    } else if (command == "psi") {
      const ScalarFieldSeq& f = need_field(config);
      auto [psi, rep] = capital_psi(f, config.grid, config.params.eps_sup);
      std::string range = write_pgm(psi, emit.path_for(stem + "_psi.pgm"));
      emit.artifacts.push_back(emit.path_for(stem + "_psi.pgm"));
      artifacts_json[stem + "_psi"] = stem + "_psi.pgm";
      BoundaryDiagnostic bd = boundary_condition_diagnostic(psi, config.params.boundary_delta);
      json viols = json::array();
      for (std::size_t i = 0; i < bd.violations.size() && i < 10; ++i)
        viols.push_back(cell_json(bd.violations[i]));
      body = {{"stabilization", stab_json(rep)},
              {"eps_sup", config.params.eps_sup},
              {"range", range},
              {"sublevel", mask_summary(sublevel_mask(psi))},
              {"boundary",
               {{"ok", bd.ok},
                {"delta", bd.delta},
                {"violations", bd.violations.size()},
                {"first_violations", viols}}}};
    } else if (command == "psi-kernel") {
      const ScalarFieldSeq& f = need_field(config);
      Point p = need_field_point(config);
      auto [psi, rep] = capital_psi(f, config.grid, config.params.eps_sup);
      PointedMask k = kernel_from_psi(psi, p);
      body = {{"stabilization", stab_json(rep)},
              {"base_cell", cell_json(*k.point)},
              {"kernel", mask_summary(k.mask)}};
      emit.mask(k.mask, stem + "_psi_kernel.pgm", artifacts_json);
    } else if (command == "cross-check") {
      const ScalarFieldSeq& f = need_field(config);
      Point p = need_field_point(config);
      CrossCheckResult cc = cross_check_sublevel(f, p, config.grid, band);
      body = {{"equal", cc.equal},
              {"band_allowed", cc.band_allowed},
              {"band_measured", cc.band_measured},
              {"mismatches", cc.mismatches},
              {"component_hypothesis_ok", cc.component_hypothesis_ok},
              {"boundary_hypothesis_ok", cc.boundary_hypothesis_ok},
              {"warnings", cc.warnings},
              {"kernel_domains", mask_summary(cc.kernel_domains.mask)},
              {"kernel_psi", mask_summary(cc.kernel_psi.mask)}};
      emit.mask(cc.kernel_domains.mask, stem + "_cross_check_domains.pgm", artifacts_json);
      emit.mask(cc.kernel_psi.mask, stem + "_cross_check_psi.pgm", artifacts_json);
      verdict = cc.equal;
    } else if (command == "hausdorff") {
      SequenceEvaluator ev(need_sequence(config));
      if (!config.params.reference_shape)
        throw ValidationError("hausdorff needs params.reference_shape");
      GridMask ref = closure(rasterize_shape(*config.params.reference_shape, config.grid, 0.0));
      json rows = json::array();
      bool monotone = true;
      double prev = -1;
      for (long j : config.params.hausdorff_js) {
        double d = hausdorff_distance(closure(ev.domain_at(j)), ref);
        if (prev >= 0 && d > prev) monotone = false;
        prev = d;
        rows.push_back({{"j", j}, {"distance", d}});
      }
      body = {{"reference_cells", ref.count()},
              {"distances", rows},
              {"monotone_nonincreasing", monotone}};
      try {
        KernelResult k = kernel(ev);
        body["kernel_vs_reference"] =
            k.pointed.mask.any() ? json(hausdorff_distance(closure(k.pointed.mask), ref))
                                 : json(nullptr);
      } catch (const Error& e) {
        body["kernel_vs_reference"] = nullptr;
        body["kernel_note"] = e.what();
      }
    } else if (command == "render") {
      if (!config.sequence && !config.field)
        throw ValidationError("render needs a \"sequence\" or \"field\" section");
      if (config.sequence) {
        SequenceEvaluator ev(*config.sequence);
        json rows = json::array();
        for (long j : config.params.render_js) {
          std::string name = stem + "_G" + std::to_string(j) + ".pgm";
          emit.mask(ev.domain_at(j), name, artifacts_json);
          rows.push_back({{"j", j}, {"cells", ev.domain_at(j).count()}});
        }
        body["domains"] = rows;
      }
      if (config.field) {
        json rows = json::array();
        for (long j : config.params.render_js) {
          std::string name = stem + "_psi_j" + std::to_string(j) + ".pgm";
          FieldGrid f = sample_field(*config.field, j, config.grid);
          std::string range = write_pgm(f, emit.path_for(name));
          emit.artifacts.push_back(emit.path_for(name));
          artifacts_json[name.substr(0, name.size() - 4)] = name;
          rows.push_back({{"j", j}, {"range", range}});
        }
        body["fields"] = rows;
      }
    }

    report["band"] = band;
    report["seed"] = seed;
    report["verdict"] = verdict;
    report["result"] = body;
    report["artifacts"] = artifacts_json;
  } catch (const Error& e) {
    report["verdict"] = nullptr;
    report["error"] = {{"type", error_kind(e)}, {"message", e.what()}};
  } catch (const std::exception& e) {
    report["verdict"] = nullptr;
    report["error"] = {{"type", "Error"}, {"message", e.what()}};
  }

  auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
  report["timings_ms"] = {{"total", elapsed.count()}};

  RunOutcome outcome;
  outcome.report_json = report.dump(2) + "\n";
  outcome.report_path = (std::filesystem::path(options.out_dir) / report_name).string();
  try {
    std::filesystem::create_directories(options.out_dir);
    write_file(outcome.report_path, outcome.report_json);
  } catch (const std::exception&) {
    outcome.report_path.clear();
  }
  outcome.artifacts = emit.artifacts;
  if (!outcome.report_path.empty()) outcome.artifacts.push_back(outcome.report_path);
  outcome.exit_code = report.contains("error") ? 1 : (verdict ? 0 : 2);
  return outcome;
}

RunOutcome run_command_on_file(const std::string& command, const std::string& config_path,
                               const RunOptions& options) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    json report;
    report["command"] = command;
    report["config"] = {{"path", config_path}, {"digest", nullptr}};
    report["verdict"] = nullptr;
    report["error"] = {{"type", error_kind(e)}, {"message", e.what()}};
    RunOutcome outcome;
    outcome.exit_code = 1;
    outcome.report_json = report.dump(2) + "\n";
    std::string stem = std::filesystem::path(config_path).stem().string();
    if (stem.empty()) stem = "config";
    std::string report_name = stem + "_" + command + ".json";
    for (char& c : report_name)
      if (c == '-') c = '_';
    try {
      std::filesystem::create_directories(options.out_dir);
      outcome.report_path = (std::filesystem::path(options.out_dir) / report_name).string();
      write_file(outcome.report_path, outcome.report_json);
      outcome.artifacts.push_back(outcome.report_path);
    } catch (const std::exception&) {
      outcome.report_path.clear();
    }
    return outcome;
  }
  return run_command(command, cfg, options);
}

}  // namespace kernelconv
