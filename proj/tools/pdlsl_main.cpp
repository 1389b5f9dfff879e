// pdlsl: sign-trace pipeline CLI. Subcommands expose each stage (segment,
// extract-model, check, annotate, eval) plus config validation; `annotate`
// is the end-to-end path. Exit codes: 0 ok, 1 usage, 2 data error,
// 3 internal invariant violation.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "pdlsl/pipeline.hpp"
#include "pdlsl/printer.hpp"

namespace fs = std::filesystem;
using namespace pdlsl;

namespace {

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path);
  out << content;
}

std::string segments_csv(const std::vector<Segment>& segs) {
  std::string out = "kind,start,end\n";
  for (const auto& s : segs) {
    out += s.kind == SegKind::Hold ? "hold" : "movement";
    out += "," + std::to_string(s.start) + "," + std::to_string(s.end) + "\n";
  }
  return out;
}

struct CommonFlags {
  CLI::App* cmd = nullptr;
  CLI::Option *o_format = nullptr, *o_max_gap = nullptr, *o_scale = nullptr;
  CLI::Option *o_v_hold = nullptr, *o_min_hold = nullptr, *o_smooth = nullptr;
  CLI::Option *o_tau = nullptr, *o_move = nullptr, *o_trill = nullptr;
  CLI::Option *o_catalogs = nullptr, *o_regions = nullptr, *o_db = nullptr;
  CLI::Option *o_mode = nullptr, *o_anchor = nullptr;
  std::string format, catalogs, regions, db, mode, anchor;
  int max_gap = 0, min_hold = 0, smooth_w = 0;
  double scale = 0, v_hold = 0, tau = 0, theta_move = 0, theta_trill = 0;

  void add_trace_flags(CLI::App* c) {
    cmd = c;
    o_format = c->add_option("--format", format, "trace format: csv|json|auto");
    o_max_gap = c->add_option("--max-gap", max_gap,
                              "max absent-position run to interpolate");
    o_scale = c->add_option("--scale", scale,
                            "body scale when the trace has no scale column");
  }
  void add_seg_flags(CLI::App* c) {
    o_v_hold = c->add_option("--v-hold", v_hold,
                             "hold speed threshold (body-scales/s)");
    o_min_hold = c->add_option("--min-hold", min_hold,
                               "minimum hold length (frames)");
    o_smooth = c->add_option("--smooth-w", smooth_w,
                             "speed smoothing window (odd frames)");
  }
  void add_model_flags(CLI::App* c) {
    o_tau = c->add_option("--tau-touch", tau, "touch distance (body scales)");
    o_move = c->add_option("--theta-move", theta_move,
                           "net displacement for a directed move");
    o_trill = c->add_option("--theta-trill", theta_trill,
                            "path length for a trill");
    o_catalogs = c->add_option("--catalogs", catalogs, "catalog file");
    o_regions = c->add_option("--regions", regions, "regions file");
  }
  void add_db_flags(CLI::App* c) {
    o_db = c->add_option("--db", db, "property database file");
    o_mode = c->add_option("--mode", mode, "strict|optimistic");
    o_anchor = c->add_option("--head-anchor", anchor,
                             "head_anchor contact test: touch|region");
  }

  void apply(PipelineConfig& cfg) const {
    if (o_format && o_format->count()) cfg.trace_format = format;
    if (o_max_gap && o_max_gap->count()) cfg.max_gap = max_gap;
    if (o_scale && o_scale->count()) cfg.default_scale = scale;
    if (o_v_hold && o_v_hold->count()) cfg.seg.v_hold = v_hold;
    if (o_min_hold && o_min_hold->count()) cfg.seg.min_hold = min_hold;
    if (o_smooth && o_smooth->count()) cfg.seg.smooth_w = smooth_w;
    if (o_tau && o_tau->count()) cfg.model.tau_touch = tau;
    if (o_move && o_move->count()) cfg.model.theta_move = theta_move;
    if (o_trill && o_trill->count()) cfg.model.theta_trill = theta_trill;
    if (o_catalogs && o_catalogs->count()) cfg.catalogs_path = catalogs;
    if (o_regions && o_regions->count()) cfg.regions_path = regions;
    if (o_db && o_db->count()) cfg.db_path = db;
    if (o_mode && o_mode->count()) cfg.mode = mode;
    if (o_anchor && o_anchor->count()) cfg.head_anchor = anchor;
  }
};

PipelineConfig base_config(const std::string& config_path) {
  std::string path = config_path;
  if (path.empty()) {
    const char* env = std::getenv("PDLSL_CONFIG");
    if (env && *env) path = env;
  }
  if (path.empty()) return PipelineConfig{};
  return load_config_file(path);
}

void require_valid(const PipelineConfig& cfg) {
  auto diags = validate_config(cfg);
  if (diags.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& d : diags) msg += "\n  " + d.key + ": " + d.message;
  throw DataError(msg);
}

int run_annotate_many(const PipelineConfig& cfg,
                      const std::vector<std::string>& traces,
                      const std::string& out, const std::string& model_out,
                      const std::string& gold_path, unsigned jobs) {
  if (traces.size() > 1 && !out.empty() && out != "-" &&
      !fs::is_directory(out))
    throw DataError("--out must be a directory when annotating several traces");

  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  std::vector<std::string> errors;
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= traces.size()) return;
      try {
        PipelineResult r = run_pipeline(cfg, traces[i]);
        std::string ann_text =
            annotations_to_jsonl(r.annotations, r.resolved_config);
        std::string ann_path = out;
        std::string lts_path = model_out;
        if (traces.size() > 1) {
          std::string stem = fs::path(traces[i]).stem().string();
          if (!out.empty() && out != "-")
            ann_path = (fs::path(out) / (stem + ".ann.jsonl")).string();
          if (!model_out.empty())
            lts_path = (fs::path(model_out) / (stem + ".lts.json")).string();
        }
        std::string report;
        if (!gold_path.empty()) {
          Resources res = load_resources(cfg);
          EvalOptions eopts;
          eopts.min_iou = cfg.min_iou;
          eopts.count_unknown = cfg.count_unknown;
          eopts.known_properties = res.db.properties;
          EvalReport rep = evaluate(r.annotations, load_gold(gold_path), eopts);
          report = cfg.report_format == "csv" ? report_csv(rep)
                                              : report_text(rep);
        }
        std::lock_guard<std::mutex> lock(io_mutex);
        write_output(ann_path, ann_text);
        if (!lts_path.empty())
          write_output(lts_path, lts_to_json(r.model).dump(2) + "\n");
        if (!report.empty()) std::cout << report;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        errors.push_back(traces[i] + ": " + e.what());
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, traces.size()));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDL-based sign-trace segmentation, model extraction, "
               "verification and annotation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "config file (default: $PDLSL_CONFIG)");

  // segment
  auto* seg_cmd = app.add_subcommand("segment", "hold/movement segmentation");
  std::string seg_trace, seg_out;
  seg_cmd->add_option("--trace", seg_trace, "trace file")->required();
  seg_cmd->add_option("--out", seg_out, "output CSV (default stdout)");
  CommonFlags seg_flags;
  seg_flags.add_trace_flags(seg_cmd);
  seg_flags.add_seg_flags(seg_cmd);
  // segment still needs catalogs to read the trace header
  seg_flags.o_catalogs =
      seg_cmd->add_option("--catalogs", seg_flags.catalogs, "catalog file");

  // extract-model
  auto* model_cmd = app.add_subcommand("extract-model", "build the LTS JSON");
  std::string model_trace, model_out;
  model_cmd->add_option("--trace", model_trace, "trace file")->required();
  model_cmd->add_option("--out", model_out, "output JSON (default stdout)");
  CommonFlags model_flags;
  model_flags.add_trace_flags(model_cmd);
  model_flags.add_seg_flags(model_cmd);
  model_flags.add_model_flags(model_cmd);

  // check
  auto* check_cmd =
      app.add_subcommand("check", "verify formulas against a model");
  std::string check_model, check_out, check_formula;
  check_cmd->add_option("--model", check_model, "LTS JSON file")->required();
  check_cmd->add_option("--formula", check_formula,
                        "check only this property");
  check_cmd->add_option("--out", check_out, "output JSONL (default stdout)");
  CommonFlags check_flags;
  check_flags.o_catalogs =
      check_cmd->add_option("--catalogs", check_flags.catalogs, "catalog file");
  check_flags.add_db_flags(check_cmd);

  // annotate
  auto* ann_cmd = app.add_subcommand("annotate", "end-to-end annotation");
  std::vector<std::string> ann_traces;
  std::string ann_out, ann_model_out, ann_gold, ann_report_format;
  bool ann_vacuous = false, ann_count_unknown = false;
  double ann_min_iou = -1.0;
  unsigned ann_jobs = 1;
  ann_cmd->add_option("--trace", ann_traces, "trace file(s)")->required();
  ann_cmd->add_option("--out", ann_out,
                      "annotations JSONL (directory with several traces)");
  ann_cmd->add_option("--model-out", ann_model_out, "also write the LTS JSON");
  ann_cmd->add_option("--gold", ann_gold, "gold CSV: print an evaluation");
  auto* o_rf = ann_cmd->add_option("--report-format", ann_report_format,
                                   "text|csv");
  ann_cmd->add_flag("--allow-vacuous", ann_vacuous,
                    "annotate vacuous satisfactions too");
  ann_cmd->add_flag("--count-unknown", ann_count_unknown,
                    "score Unknown-verdict annotations in the evaluation");
  auto* o_iou = ann_cmd->add_option("--min-iou", ann_min_iou,
                                    "overlap threshold for the evaluation");
  ann_cmd->add_option("--jobs", ann_jobs, "parallel traces");
  CommonFlags ann_flags;
  ann_flags.add_trace_flags(ann_cmd);
  ann_flags.add_seg_flags(ann_cmd);
  ann_flags.add_model_flags(ann_cmd);
  ann_flags.add_db_flags(ann_cmd);

  // eval
  auto* eval_cmd =
      app.add_subcommand("eval", "score annotations against gold");
  std::string eval_pred, eval_gold, eval_out, eval_report_format;
  bool eval_count_unknown = false;
  double eval_min_iou = -1.0;
  eval_cmd->add_option("--pred", eval_pred, "annotations JSONL")->required();
  eval_cmd->add_option("--gold", eval_gold, "gold CSV")->required();
  eval_cmd->add_option("--out", eval_out, "output (default stdout)");
  auto* o_erf = eval_cmd->add_option("--report-format", eval_report_format,
                                     "text|csv");
  eval_cmd->add_flag("--count-unknown", eval_count_unknown,
                     "score Unknown-verdict annotations too");
  auto* o_eiou =
      eval_cmd->add_option("--min-iou", eval_min_iou, "overlap threshold");
  CommonFlags eval_flags;
  eval_flags.o_catalogs =
      eval_cmd->add_option("--catalogs", eval_flags.catalogs, "catalog file");
  eval_flags.o_db =
      eval_cmd->add_option("--db", eval_flags.db, "property database file");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "validate the configuration");
  CommonFlags val_flags;
  val_flags.add_trace_flags(val_cmd);
  val_flags.add_seg_flags(val_cmd);
  val_flags.add_model_flags(val_cmd);
  val_flags.add_db_flags(val_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    PipelineConfig cfg = base_config(config_path);

    if (app.got_subcommand(seg_cmd)) {
      seg_flags.apply(cfg);
      require_valid(cfg);
      Resources res = load_resources(cfg);
      TraceLoadOptions opts;
      opts.format = cfg.trace_format;
      opts.default_scale = cfg.default_scale;
      Trace t = load_trace(seg_trace, opts, res.catalogs);
      if (t.dims == 3) t = project_2d(t);
      t = fill_gaps(t, cfg.max_gap);
      write_output(seg_out, segments_csv(segment(t, cfg.seg)));
      return 0;
    }

    if (app.got_subcommand(model_cmd)) {
      model_flags.apply(cfg);
      require_valid(cfg);
      PipelineResult r = run_pipeline(cfg, model_trace);
      write_output(model_out, lts_to_json(r.model).dump(2) + "\n");
      return 0;
    }

    if (app.got_subcommand(check_cmd)) {
      check_flags.apply(cfg);
      require_valid(cfg);
      Resources res = load_resources(cfg);
      Lts m = load_lts(check_model);
      DefEnv env = res.db.env();
      CheckMode mode = cfg.mode == "optimistic" ? CheckMode::Optimistic
                                                : CheckMode::Strict;
      std::string out;
      for (const auto& prop : res.db.properties) {
        if (!check_formula.empty() && prop != check_formula) continue;
        const Definition* def = env.find(prop);
        for (const auto& r : check_template(m, def->value, env, mode)) {
          nlohmann::json j;
          j["state"] = r.state;
          j["formula"] = prop;
          j["binding"] = r.binding;
          j["verdict"] = verdict_name(r.verdict);
          out += j.dump() + "\n";
        }
      }
      if (!check_formula.empty()) {
        bool known = false;
        for (const auto& p : res.db.properties)
          if (p == check_formula) known = true;
        if (!known)
          throw DataError("property '" + check_formula +
                          "' is not in the database");
      }
      write_output(check_out, out);
      return 0;
    }

    if (app.got_subcommand(ann_cmd)) {
      ann_flags.apply(cfg);
      if (ann_vacuous) cfg.allow_vacuous = true;
      if (ann_count_unknown) cfg.count_unknown = true;
      if (o_iou->count()) cfg.min_iou = ann_min_iou;
      if (o_rf->count()) cfg.report_format = ann_report_format;
      require_valid(cfg);
      return run_annotate_many(cfg, ann_traces, ann_out, ann_model_out,
                               ann_gold, ann_jobs);
    }

    if (app.got_subcommand(eval_cmd)) {
      eval_flags.apply(cfg);
      if (eval_count_unknown) cfg.count_unknown = true;
      if (o_eiou->count()) cfg.min_iou = eval_min_iou;
      if (o_erf->count()) cfg.report_format = eval_report_format;
      require_valid(cfg);
      std::ifstream in(eval_pred);
      if (!in) throw DataError("cannot open predictions file: " + eval_pred);
      std::stringstream buf;
      buf << in.rdbuf();
      auto pred = annotations_from_jsonl(buf.str(), eval_pred);
      EvalOptions eopts;
      eopts.min_iou = cfg.min_iou;
      eopts.count_unknown = cfg.count_unknown;
      if (eval_flags.o_db->count() || !cfg.db_path.empty()) {
        Resources res = load_resources(cfg);
        eopts.known_properties = res.db.properties;
      }
      EvalReport rep = evaluate(pred, load_gold(eval_gold), eopts);
      write_output(eval_out, cfg.report_format == "csv" ? report_csv(rep)
                                                        : report_text(rep));
      return 0;
    }

    if (app.got_subcommand(val_cmd)) {
      val_flags.apply(cfg);
      auto diags = validate_config(cfg);
      if (diags.empty()) {
        std::cout << "configuration ok\n";
        return 0;
      }
      for (const auto& d : diags)
        std::cout << d.key << ": " << d.message << "\n";
      return 2;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
