#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pdlsl/errors.hpp"
#include "pdlsl/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace pdlsl;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("pdlsl_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  fs::path p = temp_dir() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(PDLSL_CLI_PATH) + " " + args;
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("validate_config: defaults are valid") {
  CHECK(validate_config(PipelineConfig{}).empty());
}

TEST_CASE("validate_config: names the offending key") {
  PipelineConfig cfg;
  cfg.seg.v_hold = 0.0;
  auto diags = validate_config(cfg);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].key == "v_hold");

  PipelineConfig cfg2;
  cfg2.regions_path = "/no/such/regions.txt";
  auto diags2 = validate_config(cfg2);
  REQUIRE(diags2.size() == 1);
  CHECK(diags2[0].key == "regions_path");
  CHECK(diags2[0].message.find("/no/such/regions.txt") != std::string::npos);

  PipelineConfig cfg3;
  cfg3.seg.smooth_w = 4;
  cfg3.mode = "wishful";
  CHECK(validate_config(cfg3).size() == 2);
}

TEST_CASE("config files parse and unknown keys fail") {
  PipelineConfig cfg = parse_config(
      "# comment\nv_hold = 0.8\nmode = optimistic\nmax_gap = 5\n", "<cfg>");
  CHECK(cfg.seg.v_hold == 0.8);
  CHECK(cfg.mode == "optimistic");
  CHECK(cfg.max_gap == 5);
  CHECK_THROWS_WITH_AS(parse_config("nope = 1\n", "<cfg>"),
                       doctest::Contains("unknown config key"), DataError);
  CHECK_THROWS_AS(parse_config("v_hold = fast\n", "<cfg>"), DataError);
}

TEST_CASE("run_pipeline: end-to-end on the tap trace") {
  fs::path trace = write_file("tap.csv", synth::to_csv(synth::tap_trace()));
  PipelineConfig cfg;
  PipelineResult r = run_pipeline(cfg, trace.string());
  CHECK(r.model.states.size() == 3);
  int taps = 0;
  for (const auto& a : r.annotations)
    if (a.property == "tap") ++taps;
  CHECK(taps == 1);
  // every artifact embeds the resolved parameter set
  CHECK(r.model.metadata.contains("config"));
  CHECK(r.model.metadata["config"] == cfg.to_json());
}

TEST_CASE("run_pipeline: reproducible byte-identical artifacts") {
  fs::path trace = write_file("rep.csv", synth::to_csv(synth::buoy_trace()));
  PipelineConfig cfg;
  PipelineResult a = run_pipeline(cfg, trace.string());
  PipelineResult b = run_pipeline(cfg, trace.string());
  CHECK(lts_to_json(a.model).dump() == lts_to_json(b.model).dump());
  CHECK(annotations_to_jsonl(a.annotations, a.resolved_config) ==
        annotations_to_jsonl(b.annotations, b.resolved_config));
}

TEST_CASE("run_pipeline: 3D traces are projected before segmentation") {
  fs::path trace = write_file(
      "opp3d.csv", synth::to_csv(synth::with_depth(synth::opposition_trace())));
  PipelineConfig cfg;
  PipelineResult r3 = run_pipeline(cfg, trace.string());
  fs::path trace2 =
      write_file("opp2d.csv", synth::to_csv(synth::opposition_trace()));
  PipelineResult r2 = run_pipeline(cfg, trace2.string());
  CHECK(r3.model.states.size() == r2.model.states.size());
  CHECK(r3.annotations.size() == r2.annotations.size());
}

TEST_CASE("stage isolation: a stubbed segmenter equals direct segments") {
  struct StubSegmenter final : SegmenterStage {
    std::vector<Segment> segs;
    std::vector<Segment> run(const Trace&) const override { return segs; }
  };
  fs::path trace = write_file("iso.csv", synth::to_csv(synth::tap_trace()));
  PipelineConfig cfg;
  Resources res = load_resources(cfg);

  // reference: default pipeline
  PipelineResult ref = run_pipeline(cfg, trace.string());

  // stub: replay the reference segments through a custom stage
  auto stub = std::make_shared<StubSegmenter>();
  stub->segs = ref.segments;
  Stages stages = default_stages(cfg, res);
  stages.segmenter = stub;
  PipelineResult out = run_pipeline(cfg, trace.string(), res, stages);
  CHECK(lts_to_json(out.model).dump() == lts_to_json(ref.model).dump());
  CHECK(annotations_to_jsonl(out.annotations, {}) ==
        annotations_to_jsonl(ref.annotations, {}));
}

TEST_CASE("validate_stages: missing stage is a diagnostic") {
  PipelineConfig cfg;
  Resources res = load_resources(cfg);
  Stages stages = default_stages(cfg, res);
  stages.annotator.reset();
  auto diags = validate_stages(stages);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].key == "stages");
}

TEST_CASE("run_pipeline: invalid config is rejected with the key name") {
  PipelineConfig cfg;
  cfg.seg.smooth_w = 2;
  fs::path trace = write_file("bad.csv", synth::to_csv(synth::tap_trace()));
  CHECK_THROWS_WITH_AS(run_pipeline(cfg, trace.string()),
                       doctest::Contains("smooth_w"), DataError);
}

TEST_CASE("cli: segment emits kind,start,end csv") {
  fs::path trace =
      write_file("cli_seg.csv", synth::to_csv(synth::three_phase_trace()));
  fs::path out = temp_dir() / "segs.csv";
  REQUIRE(run_cli("segment --trace " + trace.string() + " --out " +
                  out.string()) == 0);
  std::string text = read_file(out);
  CHECK(text.rfind("kind,start,end\n", 0) == 0);
  CHECK(text.find("movement,") != std::string::npos);
  CHECK(text.find("hold,0,") != std::string::npos);
}

TEST_CASE("cli: extract-model emits the LTS JSON") {
  fs::path trace =
      write_file("cli_model.csv", synth::to_csv(synth::constant_trace(40)));
  fs::path out = temp_dir() / "model.json";
  REQUIRE(run_cli("extract-model --trace " + trace.string() + " --out " +
                  out.string()) == 0);
  Lts m = load_lts(out.string());
  CHECK(m.states.size() == 1);
  CHECK(m.edges.empty());
  CHECK(m.metadata.contains("config"));
}

TEST_CASE("cli: annotate then eval round-trips through files") {
  fs::path trace =
      write_file("cli_tap.csv", synth::to_csv(synth::tap_trace()));
  fs::path ann = temp_dir() / "tap.ann.jsonl";
  fs::path gold = write_file("tap.gold.csv", "property,start,end\ntap,0,199\n");
  REQUIRE(run_cli("annotate --trace " + trace.string() + " --out " +
                  ann.string()) == 0);
  std::string jsonl = read_file(ann);
  CHECK(jsonl.find("\"meta\"") != std::string::npos);
  CHECK(jsonl.find("\"tap\"") != std::string::npos);

  fs::path report = temp_dir() / "report.txt";
  REQUIRE(run_cli("eval --pred " + ann.string() + " --gold " + gold.string() +
                  " --out " + report.string()) == 0);
  std::string text = read_file(report);
  CHECK(text.find("gold\\predicted") != std::string::npos);
  CHECK(text.find("tap") != std::string::npos);

  fs::path csv_report = temp_dir() / "report.csv";
  REQUIRE(run_cli("eval --pred " + ann.string() + " --gold " + gold.string() +
                  " --report-format csv --out " + csv_report.string()) == 0);
  CHECK(read_file(csv_report).find("property,hits,misses,erroneous") !=
        std::string::npos);
}

TEST_CASE("cli: check verifies a stored model") {
  fs::path trace =
      write_file("cli_opp.csv", synth::to_csv(synth::opposition_trace()));
  fs::path model = temp_dir() / "opp.model.json";
  REQUIRE(run_cli("extract-model --trace " + trace.string() + " --out " +
                  model.string()) == 0);
  fs::path out = temp_dir() / "check.jsonl";
  REQUIRE(run_cli("check --model " + model.string() +
                  " --formula opposition --out " + out.string()) == 0);
  std::string text = read_file(out);
  CHECK(text.find("\"formula\":\"opposition\"") != std::string::npos);
  CHECK(text.find("\"verdict\":\"true\"") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
  CHECK(run_cli("segment --trace /no/such/file.csv") == 2);
  CHECK(run_cli("frobnicate 2>/dev/null") == 1);
  CHECK(run_cli("segment 2>/dev/null") == 1);  // missing required --trace
  fs::path trace =
      write_file("cli_codes.csv", synth::to_csv(synth::constant_trace(10)));
  CHECK(run_cli("segment --trace " + trace.string() + " --smooth-w 2") == 2);
  CHECK(run_cli("validate") == 0);
  CHECK(run_cli("validate --v-hold 0 >/dev/null") == 2);
}

TEST_CASE("cli: config file with flag overrides") {
  fs::path cfg = write_file("pdlsl.cfg", "v_hold = 0.25\nmin_hold = 2\n");
  fs::path trace =
      write_file("cli_cfg.csv", synth::to_csv(synth::three_phase_trace()));
  fs::path out = temp_dir() / "cfg_segs.csv";
  REQUIRE(run_cli("--config " + cfg.string() + " segment --trace " +
                  trace.string() + " --out " + out.string()) == 0);
  CHECK(read_file(out).find("movement") != std::string::npos);
  // flags override the file: an invalid override must fail validation
  CHECK(run_cli("--config " + cfg.string() + " segment --trace " +
                trace.string() + " --v-hold 0") == 2);
}

TEST_CASE("cli: several traces in parallel write one file per trace") {
  fs::path t1 = write_file("multi_a.csv", synth::to_csv(synth::tap_trace()));
  fs::path t2 = write_file("multi_b.csv", synth::to_csv(synth::buoy_trace()));
  fs::path outdir = temp_dir() / "multi_out";
  fs::create_directories(outdir);
  REQUIRE(run_cli("annotate --trace " + t1.string() + " --trace " +
                  t2.string() + " --jobs 2 --out " + outdir.string()) == 0);
  CHECK(fs::exists(outdir / "multi_a.ann.jsonl"));
  CHECK(fs::exists(outdir / "multi_b.ann.jsonl"));
  CHECK(read_file(outdir / "multi_a.ann.jsonl").find("\"tap\"") !=
        std::string::npos);
  CHECK(read_file(outdir / "multi_b.ann.jsonl").find("\"buoy\"") !=
        std::string::npos);
}
