#include "pdlsl/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdlsl/errors.hpp"

namespace pdlsl {

namespace {

// Built-in fallback resources, identical to the files shipped under data/.
const char* kDefaultCatalogText =
    "# Default sort catalogs.\n"
    "articulators = RH, LH, HEAD\n"
    "directions = E, NE, N, NW, W, SW, S, SE\n"
    "places = HEAD, TORSE, CENTEROFBODY, L_SIDEOFBODY, R_SIDEOFBODY, "
    "L_SIDEOFHEAD, R_SIDEOFHEAD\n"
    "configs = L_FORM, FIST_FORM, L_CONFIG, KEY_CONFIG, BEAK_CONFIG, "
    "OPENPALM_CONFIG\n";

const char* kDefaultRegionText =
    "# Articulation places: head-origin body-scale units, y down,\n"
    "# annotator's viewpoint. L_/R_ are the signer's left/right, so R_*\n"
    "# sits on the annotator's left (negative x).\n"
    "HEAD = -1.0 -1.0 1.0 1.0\n"
    "R_SIDEOFHEAD = -3.0 -1.5 -1.0 1.5\n"
    "L_SIDEOFHEAD = 1.0 -1.5 3.0 1.5\n"
    "TORSE = -2.0 1.0 2.0 6.0\n"
    "CENTEROFBODY = -1.0 2.0 1.0 4.5\n"
    "R_SIDEOFBODY = -4.5 1.0 -1.0 6.0\n"
    "L_SIDEOFBODY = 1.0 1.0 4.5 6.0\n";

}  // namespace

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["trace_format"] = trace_format;
  j["max_gap"] = max_gap;
  j["default_scale"] = default_scale;
  j["v_hold"] = seg.v_hold;
  j["min_hold"] = seg.min_hold;
  j["smooth_w"] = seg.smooth_w;
  j["tau_touch"] = model.tau_touch;
  j["theta_move"] = model.theta_move;
  j["theta_trill"] = model.theta_trill;
  j["catalogs_path"] = catalogs_path;
  j["regions_path"] = regions_path;
  j["db_path"] = db_path;
  j["head_anchor"] = head_anchor;
  j["mode"] = mode;
  j["allow_vacuous"] = allow_vacuous;
  j["count_unknown"] = count_unknown;
  j["min_iou"] = min_iou;
  j["report_format"] = report_format;
  return j;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& origin,
                            PipelineConfig base) {
  std::istringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto as_double = [&]() {
      try {
        return std::stod(value);
      } catch (const std::exception&) {
        throw DataError(origin + ":" + std::to_string(lineno) + ": '" + key +
                        "' needs a number, got '" + value + "'");
      }
    };
    auto as_int = [&]() { return static_cast<int>(as_double()); };
    auto as_bool = [&]() {
      if (value == "true" || value == "yes" || value == "1") return true;
      if (value == "false" || value == "no" || value == "0") return false;
      throw DataError(origin + ":" + std::to_string(lineno) + ": '" + key +
                      "' needs true/false, got '" + value + "'");
    };
    if (key == "trace_format") base.trace_format = value;
    else if (key == "max_gap") base.max_gap = as_int();
    else if (key == "default_scale" || key == "scale")
      base.default_scale = as_double();
    else if (key == "v_hold") base.seg.v_hold = as_double();
    else if (key == "min_hold") base.seg.min_hold = as_int();
    else if (key == "smooth_w") base.seg.smooth_w = as_int();
    else if (key == "tau_touch") base.model.tau_touch = as_double();
    else if (key == "theta_move") base.model.theta_move = as_double();
    else if (key == "theta_trill") base.model.theta_trill = as_double();
    else if (key == "catalogs_path" || key == "catalogs")
      base.catalogs_path = value;
    else if (key == "regions_path" || key == "regions")
      base.regions_path = value;
    else if (key == "db_path" || key == "db") base.db_path = value;
    else if (key == "head_anchor") base.head_anchor = value;
    else if (key == "mode") base.mode = value;
    else if (key == "allow_vacuous") base.allow_vacuous = as_bool();
    else if (key == "count_unknown") base.count_unknown = as_bool();
    else if (key == "min_iou") base.min_iou = as_double();
    else if (key == "report_format") base.report_format = value;
    else
      throw DataError(origin + ":" + std::to_string(lineno) +
                      ": unknown config key '" + key + "'");
  }
  return base;
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, std::move(base));
}

std::vector<Diagnostic> validate_config(const PipelineConfig& cfg) {
  std::vector<Diagnostic> out;
  auto bad = [&](const std::string& key, const std::string& msg) {
    out.push_back({key, msg});
  };
  if (cfg.trace_format != "auto" && cfg.trace_format != "csv" &&
      cfg.trace_format != "json")
    bad("trace_format", "must be auto, csv or json");
  if (cfg.max_gap < 0) bad("max_gap", "must be >= 0");
  if (cfg.default_scale <= 0) bad("default_scale", "must be > 0");
  if (cfg.seg.v_hold <= 0) bad("v_hold", "must be > 0");
  if (cfg.seg.min_hold < 1) bad("min_hold", "must be >= 1");
  if (cfg.seg.smooth_w < 1 || cfg.seg.smooth_w % 2 == 0)
    bad("smooth_w", "must be odd and >= 1");
  if (cfg.model.tau_touch <= 0) bad("tau_touch", "must be > 0");
  if (cfg.model.theta_move <= 0) bad("theta_move", "must be > 0");
  if (cfg.model.theta_trill <= 0) bad("theta_trill", "must be > 0");
  if (cfg.head_anchor != "touch" && cfg.head_anchor != "region")
    bad("head_anchor", "must be touch or region");
  if (cfg.mode != "strict" && cfg.mode != "optimistic")
    bad("mode", "must be strict or optimistic");
  if (cfg.min_iou < 0 || cfg.min_iou > 1) bad("min_iou", "must be in [0,1]");
  if (cfg.report_format != "text" && cfg.report_format != "csv")
    bad("report_format", "must be text or csv");
  for (const auto& [key, path] :
       {std::pair<std::string, std::string>{"catalogs_path", cfg.catalogs_path},
        {"regions_path", cfg.regions_path},
        {"db_path", cfg.db_path}}) {
    if (!path.empty() && !std::filesystem::exists(path))
      bad(key, "file does not exist: " + path);
  }
  return out;
}

Resources load_resources(const PipelineConfig& cfg) {
  Resources res;
  res.catalogs = cfg.catalogs_path.empty()
                     ? Catalogs::parse(kDefaultCatalogText, "<built-in>")
                     : Catalogs::load_file(cfg.catalogs_path);
  res.regions = cfg.regions_path.empty()
                    ? RegionCatalog::parse(kDefaultRegionText, "<built-in>")
                    : RegionCatalog::load_file(cfg.regions_path);
  res.db = cfg.db_path.empty()
               ? parse_property_db(default_property_db_text(cfg.head_anchor),
                                   "<built-in>", res.catalogs)
               : load_property_db(cfg.db_path, res.catalogs);
  return res;
}

namespace {

struct DefaultSource final : TraceSourceStage {
  PipelineConfig cfg;
  Catalogs catalogs;
  Trace run(const std::string& path) const override {
    TraceLoadOptions opts;
    opts.format = cfg.trace_format;
    opts.default_scale = cfg.default_scale;
    Trace t = load_trace(path, opts, catalogs);
    if (t.dims == 3) t = project_2d(t);
    return fill_gaps(t, cfg.max_gap);
  }
};

struct DefaultSegmenter final : SegmenterStage {
  SegParams params;
  std::vector<Segment> run(const Trace& t) const override {
    return segment(t, params);
  }
};

struct DefaultModelBuilder final : ModelBuilderStage {
  ModelParams params;
  Catalogs catalogs;
  RegionCatalog regions;
  Lts run(const Trace& t, const std::vector<Segment>& segs) const override {
    return build_lts(t, segs, catalogs, regions, params);
  }
};

struct DefaultAnnotator final : AnnotatorStage {
  PropertyDb db;
  AnnotateOptions opts;
  std::vector<Annotation> run(const Lts& m) const override {
    return annotate(m, db, opts);
  }
};

}  // namespace

Stages default_stages(const PipelineConfig& cfg, const Resources& res) {
  auto source = std::make_shared<DefaultSource>();
  source->cfg = cfg;
  source->catalogs = res.catalogs;
  auto seg = std::make_shared<DefaultSegmenter>();
  seg->params = cfg.seg;
  auto builder = std::make_shared<DefaultModelBuilder>();
  builder->params = cfg.model;
  builder->catalogs = res.catalogs;
  builder->regions = res.regions;
  auto ann = std::make_shared<DefaultAnnotator>();
  ann->db = res.db;
  ann->opts.mode =
      cfg.mode == "optimistic" ? CheckMode::Optimistic : CheckMode::Strict;
  ann->opts.allow_vacuous = cfg.allow_vacuous;
  return Stages{source, seg, builder, ann};
}

std::vector<Diagnostic> validate_stages(const Stages& s) {
  std::vector<Diagnostic> out;
  if (!s.source || !s.segmenter || !s.model_builder || !s.annotator) {
    out.push_back({"stages", "pipeline is missing a stage"});
    return out;
  }
  auto link = [&](const char* key, StageIo a, StageIo b) {
    if (a.output != b.input)
      out.push_back({key, "adjacent stage data kinds do not match"});
  };
  link("source->segmenter", s.source->io(), s.segmenter->io());
  link("segmenter->model_builder", s.segmenter->io(), s.model_builder->io());
  link("model_builder->annotator", s.model_builder->io(), s.annotator->io());
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const std::string& trace_path,
                            const Resources& res, const Stages& stages) {
  auto stage_diags = validate_stages(stages);
  if (!stage_diags.empty())
    throw DataError("invalid pipeline: " + stage_diags.front().message);

  PipelineResult r;
  r.resolved_config = cfg.to_json();
  r.trace = stages.source->run(trace_path);
  r.segments = stages.segmenter->run(r.trace);
  r.model = stages.model_builder->run(r.trace, r.segments);
  r.model.metadata["config"] = r.resolved_config;
  r.annotations = stages.annotator->run(r.model);
  (void)res;
  return r;
}

PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const std::string& trace_path) {
  auto diags = validate_config(cfg);
  if (!diags.empty())
    throw DataError("invalid config: " + diags.front().key + ": " +
                    diags.front().message);
  Resources res = load_resources(cfg);
  return run_pipeline(cfg, trace_path, res, default_stages(cfg, res));
}

}  // namespace pdlsl
