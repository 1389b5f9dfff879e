#pragma once

// Staged pipeline: trace source -> segmenter -> model builder -> annotator.
// Stages are swappable behind typed interfaces with declared input/output
// data kinds; a pipeline is valid only when adjacent kinds match. Every
// stage output is written once and consumed immutably downstream.

#include <memory>
#include <string>
#include <vector>

#include "pdlsl/annotator.hpp"
#include "pdlsl/model.hpp"
#include "pdlsl/segment.hpp"
#include "pdlsl/trace.hpp"

namespace pdlsl {

struct PipelineConfig {
  // trace ingestion
  std::string trace_format = "auto";  // csv | json | auto
  int max_gap = 3;
  double default_scale = 1.0;
  // segmentation
  SegParams seg;
  // model extraction
  ModelParams model;
  // resources; empty paths fall back to the built-in defaults
  std::string catalogs_path;
  std::string regions_path;
  std::string db_path;
  std::string head_anchor = "touch";  // touch | region
  // verification / annotation
  std::string mode = "strict";  // strict | optimistic
  bool allow_vacuous = false;
  // evaluation
  bool count_unknown = false;
  double min_iou = 0.0;
  std::string report_format = "text";  // text | csv

  nlohmann::json to_json() const;
};

struct Diagnostic {
  std::string key;      // offending config key
  std::string message;
};

// Key/value config document (`key = value` lines, '#' comments) using the
// same keys as PipelineConfig::to_json. Values from the file override the
// base; CLI flags are applied on top by the tool.
PipelineConfig parse_config(const std::string& text, const std::string& origin,
                            PipelineConfig base = {});
PipelineConfig load_config_file(const std::string& path,
                                PipelineConfig base = {});

// Empty when the config is runnable; otherwise one diagnostic per problem.
std::vector<Diagnostic> validate_config(const PipelineConfig& cfg);

// Resources resolved from a config (built-in defaults when paths are empty).
struct Resources {
  Catalogs catalogs;
  RegionCatalog regions;
  PropertyDb db;
};
Resources load_resources(const PipelineConfig& cfg);

// ---- stage interfaces ----------------------------------------------------

enum class DataKind { TracePath, Trace, Segments, Model, Annotations };

struct StageIo {
  DataKind input;
  DataKind output;
};

struct TraceSourceStage {
  virtual ~TraceSourceStage() = default;
  StageIo io() const { return {DataKind::TracePath, DataKind::Trace}; }
  virtual Trace run(const std::string& path) const = 0;
};

struct SegmenterStage {
  virtual ~SegmenterStage() = default;
  StageIo io() const { return {DataKind::Trace, DataKind::Segments}; }
  virtual std::vector<Segment> run(const Trace& t) const = 0;
};

struct ModelBuilderStage {
  virtual ~ModelBuilderStage() = default;
  StageIo io() const { return {DataKind::Segments, DataKind::Model}; }
  virtual Lts run(const Trace& t, const std::vector<Segment>& segs) const = 0;
};

struct AnnotatorStage {
  virtual ~AnnotatorStage() = default;
  StageIo io() const { return {DataKind::Model, DataKind::Annotations}; }
  virtual std::vector<Annotation> run(const Lts& m) const = 0;
};

struct Stages {
  std::shared_ptr<const TraceSourceStage> source;
  std::shared_ptr<const SegmenterStage> segmenter;
  std::shared_ptr<const ModelBuilderStage> model_builder;
  std::shared_ptr<const AnnotatorStage> annotator;
};

// The default stages wrap the library functions with the config's
// parameters.
Stages default_stages(const PipelineConfig& cfg, const Resources& res);

// Adjacent output/input kinds must match; returns diagnostics like
// validate_config.
std::vector<Diagnostic> validate_stages(const Stages& s);

struct PipelineResult {
  Trace trace;
  std::vector<Segment> segments;
  Lts model;                           // metadata embeds the config snapshot
  std::vector<Annotation> annotations;
  nlohmann::json resolved_config;
};

// Full run: load -> (project_2d when 3D) -> fill_gaps -> segment ->
// build_lts -> annotate. Custom stages may replace any step.
PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const std::string& trace_path);
PipelineResult run_pipeline(const PipelineConfig& cfg,
                            const std::string& trace_path,
                            const Resources& res, const Stages& stages);

}  // namespace pdlsl
