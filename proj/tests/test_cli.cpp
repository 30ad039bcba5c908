#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "kernelconv/io.hpp"
#include "kernelconv/run.hpp"

using namespace kernelconv;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

// Scratch directory that cleans up after the test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::path("cli_scratch") / name) {
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string put(const std::string& name, const std::string& text) {
    std::string p = (dir / name).string();
    write_file(p, text);
    return p;
  }
  std::string out(const std::string& name) { return (dir / name).string(); }
};

const char* kPacman64 = R"({
  "grid": {"origin": [-2, -2], "extent": [2, 2], "nx": 64, "ny": 64},
  "sequence": {
    "tail": {"kind": "functional", "shape": {"kind": "slit_disc"},
             "j0": 1, "j_max": 512, "window": 5},
    "track": {"x": "0", "y": "0.5"},
    "limit": [0, 0.5]
  }
})";

const char* kDrunken64 = R"({
  "grid": {"origin": [-2, -2], "extent": [2, 2], "nx": 64, "ny": 64},
  "sequence": {
    "tail": {"kind": "periodic", "shapes": [
      {"kind": "rect", "center": [0, 0], "half_width": 1, "half_height": 3},
      {"kind": "rect", "center": [0, 0], "half_width": 3, "half_height": 1}]},
    "track": {"x": "0", "y": "0"},
    "limit": [0, 0]
  }
})";

const char* kDisc64Field = R"({
  "grid": {"origin": [-2, -2], "extent": [2, 2], "nx": 64, "ny": 64},
  "field": {"expr": "x^2 + y^2 - 1", "j0": 1, "j_max": 64, "window": 5},
  "field_point": [0, 0]
})";

json parse_report(const RunOutcome& o) { return json::parse(o.report_json); }

}  // namespace

TEST_CASE("command inventory") {
  const std::vector<std::string> expected = {"tame",          "kernel", "prekernel",  "liminf",
                                             "converge",      "select", "normal-verify", "psi",
                                             "psi-kernel",    "cross-check", "hausdorff", "render"};
  CHECK(command_names() == expected);
}

TEST_CASE("reports carry the run envelope and name their artifacts") {
  Scratch s("envelope");
  std::string cfg_path = s.put("pac.json", kPacman64);
  RunOutcome o = run_command_on_file("kernel", cfg_path, {s.out("run"), {}, {}});
  REQUIRE(o.exit_code == 0);

  json r = parse_report(o);
  CHECK(r["command"] == "kernel");
  CHECK(r["config"]["path"] == cfg_path);
  CHECK(r["config"]["digest"] == fnv1a_hex(kPacman64));
  CHECK(r["grid"]["nx"] == 64);
  CHECK(r["grid"]["ny"] == 64);
  CHECK(r["grid"]["origin"] == json::array({-2.0, -2.0}));
  CHECK(r["grid"]["h"] == doctest::Approx(0.0625));
  CHECK(r["band"] == 2);
  CHECK(r["seed"] == 42);
  CHECK(r["verdict"] == true);
  CHECK(r["result"]["k_stabilized"].get<long>() >= 1);
  CHECK(r["result"]["kernel"]["cells"].get<long>() > 0);
  CHECK(r["result"]["kernel"]["empty"] == false);
  CHECK(r["result"]["base_cell"] == json::array({32, 40}));
  CHECK(r["timings_ms"]["total"].get<double>() > 0);

  // report lands at <out>/<stem>_<command>.json and matches the returned text
  CHECK(o.report_path == s.out("run/pac_kernel.json"));
  CHECK(read_file(o.report_path) == o.report_json);

  // the mask artifact is listed in the report and written under out
  CHECK(r["artifacts"]["pac_kernel"] == "pac_kernel.pgm");
  std::string mask_path = s.out("run/pac_kernel.pgm");
  CHECK(fs::exists(mask_path));
  bool listed = false;
  for (const auto& a : o.artifacts) listed = listed || a == mask_path;
  CHECK(listed);
}

TEST_CASE("masks render as binary P5 with the top row first") {
  Scratch s("pgm");
  std::string cfg_path = s.put("pac.json", kPacman64);
  RunOutcome o = run_command_on_file("kernel", cfg_path, {s.out("run"), {}, {}});
  REQUIRE(o.exit_code == 0);
  long cells = parse_report(o)["result"]["kernel"]["cells"].get<long>();

  std::string pgm = read_file(s.out("run/pac_kernel.pgm"));
  std::string header = "P5\n64 64\n255\n";
  REQUIRE(pgm.substr(0, header.size()) == header);
  REQUIRE(pgm.size() == header.size() + 64 * 64);

  long set = 0;
  bool binary = true, upper_only = true;
  for (int row = 0; row < 64; ++row)
    for (int col = 0; col < 64; ++col) {
      unsigned char b = pgm[header.size() + row * 64 + col];
      if (b != 0 && b != 255) binary = false;
      if (b == 255) {
        ++set;
        // this kernel lives strictly above the x-axis, so every set pixel
        // sits in the top half of the image
        if (row >= 32) upper_only = false;
      }
    }
  CHECK(binary);
  CHECK(set == cells);
  CHECK(upper_only);
}

TEST_CASE("negative verdicts exit 2") {
  Scratch s("verdict");
  std::string cfg_path = s.put("dr.json", kDrunken64);
  RunOutcome o = run_command_on_file("converge", cfg_path, {s.out("run"), {}, {}});
  CHECK(o.exit_code == 2);
  json r = parse_report(o);
  CHECK(r["verdict"] == false);
  CHECK(r["result"]["converges"] == false);
  CHECK(r["result"]["witness"]["a"] == json::array({1}));
  CHECK(r["result"]["witness"]["b"] == json::array({2}));
  CHECK(r["result"]["residues"].size() == 2);
  CHECK(fs::exists(s.out("run/dr_converge_r1.pgm")));
  CHECK(fs::exists(s.out("run/dr_converge_r2.pgm")));

  // an untamed sequence makes "tame" report false rather than fail
  std::string thin = s.put("thin.json", R"({
    "grid": {"origin": [-2, -2], "extent": [2, 2], "nx": 64, "ny": 64},
    "sequence": {
      "tail": {"kind": "constant",
               "shape": {"kind": "rect", "center": [0, 0], "half_width": 2, "half_height": 0.04}},
      "track": {"x": "0", "y": "0"},
      "limit": [0, 0]
    }
  })");
  RunOutcome t = run_command_on_file("tame", thin, {s.out("run"), {}, {}});
  CHECK(t.exit_code == 2);
  json tr = parse_report(t);
  CHECK(tr["verdict"] == false);
  CHECK(tr["result"]["tamed"] == false);
  CHECK(tr["result"]["reason"].get<std::string>() != "");
}

TEST_CASE("errors exit 1 with a typed report") {
  Scratch s("errors");
  auto expect_error = [&](const std::string& command, const std::string& cfg_path,
                          const std::string& type, const std::string& needle) {
    RunOutcome o = run_command_on_file(command, cfg_path, {s.out("run"), {}, {}});
    CHECK(o.exit_code == 1);
    json r = parse_report(o);
    CHECK(r["verdict"].is_null());
    CHECK(r["error"]["type"] == type);
    std::string msg = r["error"]["message"].get<std::string>();
    CHECK_MESSAGE(msg.find(needle) != std::string::npos, command, ": ", msg);
    // error reports are still written for postmortems
    CHECK(fs::exists(o.report_path));
    return r;
  };

  json missing = expect_error("kernel", s.out("nope.json"), "Error", "cannot open");
  CHECK(missing["config"]["digest"].is_null());

  std::string broken = s.put("broken.json", "{\"grid\": ");
  expect_error("kernel", broken, "ValidationError", "not valid JSON");

  std::string grid_only =
      s.put("grid.json", R"({"grid": {"origin": [-2, -2], "extent": [2, 2], "nx": 64, "ny": 64}})");
  expect_error("kernel", grid_only, "ValidationError", "needs a \"sequence\" section");
  expect_error("psi", grid_only, "ValidationError", "needs a \"field\" section");
  expect_error("hausdorff", grid_only, "ValidationError", "needs a \"sequence\" section");
  expect_error("render", grid_only, "ValidationError", "needs a \"sequence\" or \"field\"");
  expect_error("explode", grid_only, "ValidationError", "unknown command \"explode\"");

  std::string no_point = s.put("nopoint.json", R"({
    "grid": {"origin": [-2, -2], "extent": [2, 2], "nx": 64, "ny": 64},
    "field": {"expr": "x^2 + y^2 - 1"}
  })");
  expect_error("psi-kernel", no_point, "ValidationError", "needs a \"field_point\"");

  std::string dr = s.put("dr.json", kDrunken64);
  expect_error("hausdorff", dr, "ValidationError", "reference_shape");

  // sublevel cross-check insists the field starts at index 1
  std::string late = s.put("late.json", R"({
    "grid": {"origin": [-2, -2], "extent": [2, 2], "nx": 64, "ny": 64},
    "field": {"expr": "x^2 + y^2 - 1", "j0": 3, "j_max": 64},
    "field_point": [0, 0]
  })");
  expect_error("cross-check", late, "ClassError", "indexed from 1");
}

TEST_CASE("band and seed overrides land in the report") {
  Scratch s("overrides");
  std::string dr = s.put("dr.json", kDrunken64);
  RunOutcome o = run_command_on_file("normal-verify", dr, {s.out("a"), {}, std::uint64_t{7}});
  CHECK(o.exit_code == 0);
  json r = parse_report(o);
  CHECK(r["seed"] == 7);
  CHECK(r["result"]["seed"] == 7);
  CHECK(r["result"]["verified"] == true);
  CHECK(r["result"]["candidate"] == "kernel");

  // run_command accepts an already-parsed config as well
  RunConfig cfg = parse_config(kDisc64Field, "disc.json");
  RunOutcome c = run_command("cross-check", cfg, {s.out("b"), 4, {}});
  CHECK(c.exit_code == 0);
  json cr = parse_report(c);
  CHECK(cr["band"] == 4);
  CHECK(cr["result"]["band_allowed"] == 4);
  CHECK(cr["result"]["equal"] == true);
}

TEST_CASE("repeat runs are byte-identical apart from timings") {
  Scratch s("determinism");
  std::string dr = s.put("dr.json", kDrunken64);
  for (std::string command : {"kernel", "converge", "normal-verify"}) {
    RunOutcome a = run_command_on_file(command, dr, {s.out("a"), {}, {}});
    RunOutcome b = run_command_on_file(command, dr, {s.out("b"), {}, {}});
    CHECK(a.exit_code == b.exit_code);
    json ra = parse_report(a), rb = parse_report(b);
    ra.erase("timings_ms");
    rb.erase("timings_ms");
    CHECK(ra.dump() == rb.dump());
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (std::size_t i = 0; i + 1 < a.artifacts.size(); ++i)  // last entry is the report
      CHECK(read_file(a.artifacts[i]) == read_file(b.artifacts[i]));
  }
}

TEST_CASE("shipped fixture configs all parse") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(KERNELCONV_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    RunConfig cfg = load_config(entry.path().string());
    CHECK(cfg.digest.size() == 16);
    CHECK(cfg.grid.nx >= 4);
  }
  CHECK(seen >= 8);
}

TEST_CASE("kernel masks match the committed goldens") {
  Scratch s("goldens");
  for (std::string stem : {"drunken", "pacman"}) {
    std::string cfg = std::string(KERNELCONV_CONFIG_DIR) + "/" + stem + ".json";
    RunOutcome o = run_command_on_file("kernel", cfg, {s.out(stem), {}, {}});
    REQUIRE(o.exit_code == 0);
    std::string got = read_file(s.out(stem + "/" + stem + "_kernel.pgm"));
    std::string want = read_file(std::string(KERNELCONV_GOLDEN_DIR) + "/" + stem + "_kernel.pgm");
    CHECK_MESSAGE(got == want, stem, " kernel drifted from its golden mask");
  }
}
