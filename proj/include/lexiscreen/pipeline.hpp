#pragma once

// Batch commands behind the lexiscreen CLI. Each command reads only its
// configuration and input files, so reruns produce identical outputs.
//
// Return value: 0 on success, 1 when some recordings failed (details in
// <out>/errors.log). Fatal configuration, schema and data errors throw Error.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexiscreen/asr_align.hpp"
#include "lexiscreen/classify.hpp"
#include "lexiscreen/config.hpp"
#include "lexiscreen/corpus.hpp"
#include "lexiscreen/features.hpp"
#include "lexiscreen/lexical.hpp"
#include "lexiscreen/svg.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen {

/// Runs fn(i) for i in [0, n) on `jobs` threads. Callers write results by
/// index, so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

inline int default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct RunPaths {
  std::filesystem::path features, model;

  explicit RunPaths(const RunConfig& cfg)
      : features(cfg.features.empty() ? cfg.out / "features.csv" : cfg.features),
        model(cfg.model.empty() ? cfg.out / "model.rf" : cfg.model) {}
};

inline std::filesystem::path labels_path(const RunConfig& cfg) {
  if (!cfg.labels.empty()) return cfg.labels;
  if (std::filesystem::exists(cfg.out / "clusters.csv")) return cfg.out / "clusters.csv";
  return cfg.corpus / "labels.csv";
}

inline std::vector<RecordingMetadata> load_manifest(const RunConfig& cfg) {
  const CorpusLayout layout{cfg.corpus};
  try {
    return parse_manifest_text(text::read_file(layout.manifest()));
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, std::string("manifest: ") + e.what());
  }
}

/// `id` and `class` columns of a headed CSV, keyed by id.
inline std::map<std::string, SkillClass> read_labels(const std::filesystem::path& path) {
  const auto lines = text::content_lines(text::read_file(path));
  if (lines.empty()) throw Error(ErrorCode::SchemaMismatch, path.string() + " is empty");
  const auto header = text::split(lines[0]);
  const auto col = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::SchemaMismatch, path.string() + " lacks column " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = col("id"), class_col = col("class");
  std::map<std::string, SkillClass> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = text::split(lines[i]);
    if (f.size() != header.size()) throw Error(ErrorCode::SchemaMismatch, "ragged row in " + path.string());
    out[f[id_col]] = parse_skill_class(f[class_col]);
  }
  return out;
}

struct LabeledSet {
  std::vector<std::string> ids;
  std::vector<std::array<double, kFeatureCount>> X;
  std::vector<SkillClass> y;
};

/// Labeled recordings in feature-file order. Every labeled id must have a
/// feature row; unlabeled feature rows are skipped.
inline LabeledSet join_labels(std::span<const AcousticFeatureVector> features,
                              const std::map<std::string, SkillClass>& labels) {
  LabeledSet set;
  std::set<std::string> seen;
  for (const auto& row : features) {
    auto it = labels.find(row.id);
    if (it == labels.end()) continue;
    set.ids.push_back(row.id);
    set.X.push_back(row.values);
    set.y.push_back(it->second);
    seen.insert(row.id);
  }
  for (const auto& [id, cls] : labels) {
    if (!seen.count(id)) throw Error(ErrorCode::JoinError, "label for '" + id + "' has no feature row");
  }
  if (set.ids.empty()) throw Error(ErrorCode::JoinError, "no labeled feature rows");
  return set;
}

inline void write_errors(const RunConfig& cfg, const std::vector<std::string>& errors) {
  std::string out;
  for (const auto& e : errors) out += e + "\n";
  text::write_file(cfg.out / "errors.log", out);
}

// ---------------------------------------------------------------------------

/// Optional per-recording diagnostics written under `<out>/dumps/`.
struct FeaturizeDumps {
  bool frames = false;  // <id>.frames.csv
  bool events = false;  // <id>.events.csv
};

inline int cmd_featurize(const RunConfig& cfg, int jobs, std::ostream& log,
                         const FeaturizeDumps& dumps = {}) {
  validate(cfg);
  const auto manifest = load_manifest(cfg);
  const CorpusLayout layout{cfg.corpus};
  struct Outcome {
    std::optional<AcousticFeatureVector> row;
    std::vector<std::string> messages;
  };
  std::vector<Outcome> results(manifest.size());
  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    const auto& meta = manifest[i];
    auto& res = results[i];
    try {
      auto rec = load_wav(layout.wav(meta.id));
      rec.metadata = meta;
      const auto intervals = parse_intervals(layout.intervals(meta.id), rec.duration());
      const auto story = load_story(layout.story_dir(meta.story_id));
      auto fx = extract_features(rec, intervals.intervals, story, cfg.features_cfg);
      for (const auto& w : fx.warnings) res.messages.push_back(meta.id + ": warning: " + w);
      if (dumps.frames) text::write_file(cfg.out / "dumps" / (meta.id + ".frames.csv"), format_frames(fx.track));
      if (dumps.events) {
        text::write_file(cfg.out / "dumps" / (meta.id + ".events.csv"), format_events(fx.pauses, fx.peaks));
      }
      res.row = std::move(fx.vector);
    } catch (const Error& e) {
      res.messages.push_back(meta.id + ": " + std::string(to_string(e.code())) + ": " + e.what());
    }
  });

  std::vector<AcousticFeatureVector> rows;
  std::vector<std::string> messages;
  std::size_t failed = 0;
  for (auto& r : results) {
    if (r.row) rows.push_back(std::move(*r.row));
    else ++failed;
    messages.insert(messages.end(), r.messages.begin(), r.messages.end());
  }
  const RunPaths paths(cfg);
  write_features(paths.features, rows);
  write_errors(cfg, messages);
  log << "featurize: " << rows.size() << " rows, " << failed << " failed -> " << paths.features.string() << "\n";
  return failed ? 1 : 0;
}

inline std::string class_color(SkillClass c) {
  switch (c) {
    case SkillClass::C_A: return "#228833";
    case SkillClass::M_A: return "#4477aa";
    case SkillClass::I_A: return "#ccbb44";
  }
  return "#000000";
}

inline int cmd_cluster(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto manifest = load_manifest(cfg);
  const CorpusLayout layout{cfg.corpus};
  std::vector<std::string> ids, errors;
  std::vector<Point> points_a, points_b;
  std::map<std::string, StoryText> stories;
  for (const auto& meta : manifest) {
    try {
      auto it = stories.find(meta.story_id);
      if (it == stories.end()) it = stories.emplace(meta.story_id, load_story(layout.story_dir(meta.story_id))).first;
      const auto t = parse_transcription(layout.words(meta.id), &it->second);
      points_a.push_back(miscue_fractions(t, MiscueVariant::A));
      points_b.push_back(miscue_fractions(t, MiscueVariant::B));
      ids.push_back(meta.id);
    } catch (const Error& e) {
      errors.push_back(meta.id + ": " + std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  write_errors(cfg, errors);
  if (ids.size() < 3) throw Error(ErrorCode::TooFewPoints, "need at least 3 transcriptions, have " + std::to_string(ids.size()));

  const int kmax = std::min(cfg.k_max, static_cast<int>(ids.size()) - 1);
  const auto sweep_a = sweep_k(points_a, cfg.k_min, kmax, cfg.seed);
  const auto sweep_b = sweep_k(points_b, cfg.k_min, kmax, cfg.seed);
  std::string sil = "k,variant_A,variant_B\n";
  svg::Series sa{"variant A", "#aa3377", {}, {}}, sb{"variant B", "#4477aa", {}, {}};
  for (std::size_t i = 0; i < sweep_a.size(); ++i) {
    sil += std::to_string(sweep_a[i].k) + "," + text::format_exact(sweep_a[i].silhouette) + "," +
           text::format_exact(sweep_b[i].silhouette) + "\n";
    sa.x.push_back(sweep_a[i].k), sa.y.push_back(sweep_a[i].silhouette);
    sb.x.push_back(sweep_b[i].k), sb.y.push_back(sweep_b[i].silhouette);
  }
  text::write_file(cfg.out / "silhouette.csv", sil);
  const std::vector<svg::Series> series{sa, sb};
  text::write_file(cfg.out / "silhouette.svg",
                   svg::line_chart(series, "Average silhouette", "clusters K", "silhouette"));

  const auto model = kmeans(points_b, 3, cfg.seed);
  const auto labels = label_clusters(model);
  std::string clusters = "id,cluster,class,CS1,SmD,M,I\n";
  std::vector<SkillClass> classes;
  svg::Panel left{"C+S1 fraction", "M fraction", {}}, right{"C+S1 fraction", "I fraction", {}};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto cls = labels[model.assignments[i]];
    classes.push_back(cls);
    clusters += ids[i] + "," + std::to_string(model.assignments[i]) + "," + std::string(to_string(cls));
    for (double v : points_b[i]) clusters += "," + text::format_exact(v);
    clusters += "\n";
    left.points.push_back({points_b[i][0], points_b[i][2], class_color(cls)});
    right.points.push_back({points_b[i][0], points_b[i][3], class_color(cls)});
  }
  text::write_file(cfg.out / "clusters.csv", clusters);
  const std::vector<svg::Panel> panels{left, right};
  text::write_file(cfg.out / "clusters.svg", svg::scatter_panels(panels, "Lexical miscue clusters (K=3)"));

  std::string centroids = "class,CS1,SmD,M,I\n";
  for (auto c : kSkillClasses) {
    const auto k = static_cast<std::size_t>(std::find(labels.begin(), labels.end(), c) - labels.begin());
    centroids += std::string(to_string(c));
    for (double v : model.centroids[k]) centroids += "," + text::format_exact(v);
    centroids += "\n";
  }
  text::write_file(cfg.out / "centroids.csv", centroids);

  if (cfg.balanced_target > 0) {
    const auto subset = balanced_subset(ids, classes, static_cast<std::size_t>(cfg.balanced_target), cfg.seed);
    std::map<std::string, SkillClass> by_id;
    for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = classes[i];
    std::string out = "id,class\n";
    for (const auto& id : subset) out += id + "," + std::string(to_string(by_id[id])) + "\n";
    text::write_file(cfg.out / "balanced.csv", out);
  }
  log << "cluster: " << ids.size() << " transcriptions, best K variant A=" << best_k(sweep_a)
      << " variant B=" << best_k(sweep_b) << "\n";
  return errors.empty() ? 0 : 1;
}

inline LabeledSet load_labeled(const RunConfig& cfg) {
  const RunPaths paths(cfg);
  return join_labels(read_features(paths.features), read_labels(labels_path(cfg)));
}

inline ForestOptions forest_options(const RunConfig& cfg) {
  ForestOptions opt;
  opt.n_trees = cfg.n_trees;
  return opt;
}

inline int cmd_train(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto data = load_labeled(cfg);
  const auto model = train_plan(make_plan(cfg.plans.front()), data.X, data.y, cfg.seed, forest_options(cfg));
  const RunPaths paths(cfg);
  text::write_file(paths.model, plan_model_to_json(model).dump() + "\n");
  log << "train: " << to_string(cfg.plans.front()) << " on " << data.ids.size() << " recordings -> "
      << paths.model.string() << "\n";
  return 0;
}

inline std::string importance_svg(const CVReport& r) {
  std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
  std::vector<double> values(r.importance.begin(), r.importance.end());
  return svg::bar_chart(names, values, "Feature importance (" + std::string(to_string(r.plan)) + ")");
}

inline int cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto data = load_labeled(cfg);
  std::vector<std::string> groups;
  if (cfg.group_by == "child_id") {
    std::map<std::string, std::string> child;
    for (const auto& m : load_manifest(cfg)) child[m.id] = m.child_id;
    for (const auto& id : data.ids) {
      auto it = child.find(id);
      if (it == child.end()) throw Error(ErrorCode::JoinError, "'" + id + "' is not in the manifest");
      groups.push_back(it->second);
    }
  }
  for (auto plan_id : cfg.plans) {
    const auto report = cross_validate(make_plan(plan_id), data.X, data.y, cfg.folds, cfg.seed,
                                       forest_options(cfg), groups);
    const auto dir = cfg.out / std::string(to_string(plan_id));
    text::write_file(dir / "cvreport.json", cv_report_to_json(report).dump(2) + "\n");
    text::write_file(dir / "confusion.csv", format_confusion(report.pooled));
    text::write_file(dir / "importance.svg", importance_svg(report));
    std::string pred = "id,actual,predicted\n";
    for (std::size_t i = 0; i < data.ids.size(); ++i) {
      pred += data.ids[i] + "," + std::string(to_string(data.y[i])) + "," +
              std::string(to_string(report.predictions[i])) + "\n";
    }
    text::write_file(dir / "predictions.csv", pred);
    log << "evaluate: " << to_string(plan_id) << " accuracy " << text::format_fixed(report.accuracy, 4)
        << " (" << report.pooled.trace() << "/" << report.pooled.total() << ")\n";
  }
  return 0;
}

inline int cmd_predict(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const RunPaths paths(cfg);
  if (!std::filesystem::exists(paths.model)) throw Error(ErrorCode::NoModel, paths.model.string() + " not found");
  PlanModel model;
  try {
    model = plan_model_from_json(nlohmann::json::parse(text::read_file(paths.model)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  const auto rows = read_features(paths.features);
  std::string out = "id,class\n";
  for (const auto& r : rows) out += r.id + "," + std::string(to_string(predict_stage(model, r.values))) + "\n";
  text::write_file(cfg.out / "predictions.csv", out);
  log << "predict: " << rows.size() << " recordings\n";
  return 0;
}

/// Reads `centroids.csv` written by cmd_cluster.
inline CentroidModel read_centroids(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::NoModel, path.string() + " not found; run cluster first");
  const auto lines = text::content_lines(text::read_file(path));
  if (lines.size() != 4 || lines[0] != "class,CS1,SmD,M,I") throw Error(ErrorCode::SchemaMismatch, "bad centroids file");
  CentroidModel m;
  for (std::size_t i = 1; i < 4; ++i) {
    const auto f = text::split(lines[i]);
    if (f.size() != 5) throw Error(ErrorCode::SchemaMismatch, "bad centroids row");
    const auto c = parse_skill_class(f[0]);
    auto val = [&](std::size_t k) { return text::parse_double(f[k], ErrorCode::SchemaMismatch, "centroid"); };
    m.centroids[index_of(c)] = {val(1), val(3), val(4)};
  }
  return m;
}

inline int cmd_asr_align(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const auto model = read_centroids(cfg.out / "centroids.csv");
  const auto manifest = load_manifest(cfg);
  const CorpusLayout layout{cfg.corpus};
  std::map<std::string, SkillClass> truth;
  if (const auto lp = labels_path(cfg); std::filesystem::exists(lp)) truth = read_labels(lp);

  std::string out = "id,pct_C,pct_M,pct_I,distance,class\n";
  std::vector<std::string> errors;
  ConfusionMatrix cm;
  std::map<std::string, StoryText> stories;
  for (const auto& meta : manifest) {
    try {
      auto it = stories.find(meta.story_id);
      if (it == stories.end()) it = stories.emplace(meta.story_id, load_story(layout.story_dir(meta.story_id))).first;
      const auto words = it->second.words();
      const auto hyp = load_hypothesis(layout.hypothesis(meta.id));
      const auto al = align(words, hyp);
      const auto pct = confidence_remap(al.ops, hyp, cfg.tau);
      const auto cls = classify_by_centroid(pct, model);
      out += meta.id + "," + text::format_exact(pct.pct_C) + "," + text::format_exact(pct.pct_M) + "," +
             text::format_exact(pct.pct_I) + "," + std::to_string(al.distance) + "," +
             std::string(to_string(cls)) + "\n";
      if (auto t = truth.find(meta.id); t != truth.end()) cm.add(t->second, cls);
    } catch (const Error& e) {
      errors.push_back(meta.id + ": " + std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  text::write_file(cfg.out / "asr_classes.csv", out);
  text::write_file(cfg.out / "asr_confusion.csv", format_confusion(cm));
  write_errors(cfg, errors);
  log << "asr-align: " << manifest.size() - errors.size() << " aligned";
  if (cm.total() > 0) log << ", accuracy vs labels " << text::format_fixed(accuracy(cm), 4);
  log << "\n";
  return errors.empty() ? 0 : 1;
}

/// Summary of the evaluate outputs found under <out>.
inline int cmd_report(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  std::string md = "# lexiscreen report\n\n| plan | accuracy | correct / total |\n|---|---|---|\n";
  int found = 0;
  for (auto plan : {PlanId::OneStage, PlanId::TwoStageP, PlanId::TwoStageQ}) {
    const auto path = cfg.out / std::string(to_string(plan)) / "cvreport.json";
    if (!std::filesystem::exists(path)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text::read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaMismatch, e.what());
    }
    long trace = 0, total = 0;
    const auto& pooled = j.at("pooled_confusion");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        const long v = pooled.at(r).at(c).get<long>();
        total += v;
        if (r == c) trace += v;
      }
    }
    md += "| " + std::string(to_string(plan)) + " | " + text::format_fixed(j.at("accuracy").get<double>(), 4) +
          " | " + std::to_string(trace) + " / " + std::to_string(total) + " |\n";
    ++found;
  }
  if (found == 0) throw Error(ErrorCode::Config, "no cvreport.json under " + cfg.out.string() + "; run evaluate first");
  text::write_file(cfg.out / "report.md", md);
  log << "report: " << found << " plan(s) -> " << (cfg.out / "report.md").string() << "\n";
  return 0;
}

}  // namespace lexiscreen
