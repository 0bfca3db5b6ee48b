#pragma once

// One- and two-stage classifier plans over the named acoustic features,
// stratified k-fold cross-validation and confusion matrices.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexiscreen/error.hpp"
#include "lexiscreen/features.hpp"
#include "lexiscreen/forest.hpp"
#include "lexiscreen/random.hpp"
#include "lexiscreen/skill_class.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen {

enum class PlanId { OneStage, TwoStageP, TwoStageQ };

inline std::string_view to_string(PlanId p) {
  switch (p) {
    case PlanId::OneStage: return "one_stage";
    case PlanId::TwoStageP: return "two_stage_P";
    case PlanId::TwoStageQ: return "two_stage_Q";
  }
  return "?";
}

inline PlanId parse_plan_id(std::string_view s) {
  for (auto p : {PlanId::OneStage, PlanId::TwoStageP, PlanId::TwoStageQ}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::Config, "unknown plan '" + std::string(s) + "'");
}

/// One classifier stage. Its targets are groups of skill classes, ordered by
/// their lowest member; a multi-class group defers to the next stage.
struct Stage {
  std::vector<std::string> feature_names;
  std::vector<std::vector<SkillClass>> groups;

  std::vector<std::size_t> feature_indices() const {
    std::vector<std::size_t> idx;
    for (const auto& n : feature_names) idx.push_back(feature_index(n));
    return idx;
  }
  std::optional<int> group_of(SkillClass c) const {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (std::find(groups[g].begin(), groups[g].end(), c) != groups[g].end()) return int(g);
    }
    return std::nullopt;
  }
};

struct StagePlan {
  PlanId id = PlanId::OneStage;
  std::vector<Stage> stages;
};

namespace plan_features {

inline std::vector<std::string> pause() {
  return {"pause_mean", "pause_std", "pause_min", "pause_max", "pause_freq", "pauses_per_interval"};
}
inline std::vector<std::string> syllable_rate() {
  return {"rel_syll_mean", "rel_syll_std", "rel_syll_cv", "articulation_rate"};
}
inline std::vector<std::string> spectral() {
  return {"spdyn_ratio", "spdyn_norm_mode_count", "spdyn_norm_mode_variation"};
}
inline std::vector<std::string> intensity() {
  return {"intdyn_macro_mean", "intdyn_macro_std", "intdyn_micro_mean", "intdyn_micro_std"};
}
inline std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace plan_features

inline StagePlan make_plan(PlanId id) {
  using namespace plan_features;
  using enum SkillClass;
  StagePlan plan{id, {}};
  switch (id) {
    case PlanId::OneStage:
      plan.stages.push_back(
          {concat({pause(), syllable_rate(), spectral(), intensity()}), {{C_A}, {M_A}, {I_A}}});
      break;
    case PlanId::TwoStageP:
      plan.stages.push_back({concat({{"articulation_rate"}, spectral(), intensity(),
                                     {"pauses_per_interval"}}),
                             {{C_A, M_A}, {I_A}}});
      plan.stages.push_back({concat({pause(), syllable_rate()}), {{C_A}, {M_A}}});
      break;
    case PlanId::TwoStageQ:
      plan.stages.push_back(
          {concat({pause(), syllable_rate(), spectral(), intensity()}), {{C_A, I_A}, {M_A}}});
      plan.stages.push_back(
          {concat({spectral(), intensity(), syllable_rate(), {"pause_freq"}}), {{C_A}, {I_A}}});
      break;
  }
  return plan;
}

inline std::vector<double> select_features(std::span<const double> full,
                                           std::span<const std::size_t> indices) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(full[i]);
  return out;
}

struct PlanModel {
  StagePlan plan;
  std::vector<RandomForest> forests;  // one per stage
};

/// Stage s trains on the samples whose class belongs to one of its groups,
/// with forest seed derive_seed(seed, s).
inline PlanModel train_plan(const StagePlan& plan,
                            std::span<const std::array<double, kFeatureCount>> X,
                            std::span<const SkillClass> y, std::uint64_t seed,
                            const ForestOptions& opt = {}) {
  PlanModel model{plan, {}};
  for (std::size_t s = 0; s < plan.stages.size(); ++s) {
    const auto& stage = plan.stages[s];
    const auto idx = stage.feature_indices();
    std::vector<FeatureRow> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (auto g = stage.group_of(y[i])) {
        rows.push_back(select_features(X[i], idx));
        labels.push_back(*g);
      }
    }
    model.forests.push_back(train_forest(rows, labels, static_cast<int>(stage.groups.size()),
                                         derive_seed(seed, s), opt));
  }
  return model;
}

/// Runs stages in order until one predicts a single-class group.
inline SkillClass predict_stage(const PlanModel& model, std::span<const double> x) {
  if (x.size() != kFeatureCount) {
    throw Error(ErrorCode::DimensionMismatch, "expected the full " + std::to_string(kFeatureCount) +
                                                  "-feature vector");
  }
  for (std::size_t s = 0; s < model.plan.stages.size(); ++s) {
    const auto& stage = model.plan.stages[s];
    const auto sub = select_features(x, stage.feature_indices());
    const auto& group = stage.groups[model.forests[s].predict(sub)];
    if (group.size() == 1 || s + 1 == model.plan.stages.size()) return group.front();
  }
  return SkillClass::C_A;
}

// ---------------------------------------------------------------------------
// Confusion matrices and cross-validation

/// Rows are actual class, columns predicted, both in C_A, M_A, I_A order.
struct ConfusionMatrix {
  std::array<std::array<long, 3>, 3> counts{};

  void add(SkillClass actual, SkillClass predicted) { ++counts[index_of(actual)][index_of(predicted)]; }
  long total() const {
    long t = 0;
    for (const auto& r : counts)
      for (long v : r) t += v;
    return t;
  }
  long trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }
  long row_sum(int r) const { return counts[r][0] + counts[r][1] + counts[r][2]; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) counts[r][c] += o.counts[r][c];
    return *this;
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline double accuracy(const ConfusionMatrix& m) {
  const long total = m.total();
  if (total <= 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
  return double(m.trace()) / double(total);
}

/// Fold id per sample. Each class is shuffled by `seed`, the classes are
/// concatenated in class order and dealt round-robin, so fold sizes differ by
/// at most one and class proportions are preserved to within one sample.
/// With `groups`, whole groups are dealt instead (speaker-disjoint folds).
inline std::vector<int> stratified_folds(std::span<const SkillClass> y, int folds,
                                         std::uint64_t seed,
                                         std::span<const std::string> groups = {}) {
  std::vector<int> fold(y.size(), 0);
  if (!groups.empty()) {
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < y.size(); ++i) members[groups[i]].push_back(i);
    std::array<std::vector<std::string>, 3> by_class;
    for (const auto& [g, idx] : members) {
      std::array<int, 3> counts{};
      for (auto i : idx) ++counts[index_of(y[i])];
      by_class[std::max_element(counts.begin(), counts.end()) - counts.begin()].push_back(g);
    }
    std::size_t dealt = 0;
    for (int c = 0; c < 3; ++c) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
      rng.shuffle(by_class[c]);
      for (const auto& g : by_class[c]) {
        for (auto i : members[g]) fold[i] = static_cast<int>(dealt % folds);
        ++dealt;
      }
    }
    return fold;
  }
  std::size_t dealt = 0;
  for (auto c : kSkillClasses) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) idx.push_back(i);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index_of(c))));
    rng.shuffle(idx);
    for (auto i : idx) fold[i] = static_cast<int>(dealt++ % folds);
  }
  return fold;
}

struct CVReport {
  PlanId plan = PlanId::OneStage;
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<ConfusionMatrix> per_fold;
  ConfusionMatrix pooled;
  double accuracy = 0.0;
  std::array<double, kFeatureCount> importance{};  // over all stage forests, sums to 1
  std::vector<SkillClass> predictions;              // per input sample
};

/// Both stages are retrained on each fold's training split only; fold f uses
/// seed derive_seed(seed, 1000 + f).
inline CVReport cross_validate(const StagePlan& plan,
                               std::span<const std::array<double, kFeatureCount>> X,
                               std::span<const SkillClass> y, int folds, std::uint64_t seed,
                               const ForestOptions& opt = {},
                               std::span<const std::string> groups = {}) {
  if (X.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "feature/label count mismatch");
  std::array<int, 3> class_counts{};
  for (auto c : y) ++class_counts[index_of(c)];
  for (auto c : kSkillClasses) {
    if (class_counts[index_of(c)] < folds) {
      throw Error(ErrorCode::TooFewPerClass, std::string(to_string(c)) + " has " +
                                                 std::to_string(class_counts[index_of(c)]) +
                                                 " samples for " + std::to_string(folds) + " folds");
    }
  }
  const auto fold_of = stratified_folds(y, folds, seed, groups);

  CVReport report;
  report.plan = plan.id;
  report.folds = folds;
  report.seed = seed;
  report.predictions.assign(y.size(), SkillClass::C_A);
  std::array<double, kFeatureCount> importance{};
  for (int f = 0; f < folds; ++f) {
    std::vector<std::array<double, kFeatureCount>> train_x;
    std::vector<SkillClass> train_y;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of[i] != f) {
        train_x.push_back(X[i]);
        train_y.push_back(y[i]);
      }
    }
    const auto model = train_plan(plan, train_x, train_y,
                                  derive_seed(seed, 1000 + static_cast<std::uint64_t>(f)), opt);
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
      const auto idx = plan.stages[s].feature_indices();
      for (std::size_t k = 0; k < idx.size(); ++k) importance[idx[k]] += model.forests[s].importance[k];
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of[i] != f) continue;
      report.predictions[i] = predict_stage(model, X[i]);
      cm.add(y[i], report.predictions[i]);
    }
    report.per_fold.push_back(cm);
    report.pooled += cm;
  }
  double total = 0.0;
  for (double v : importance) total += v;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    report.importance[k] = total > 0.0 ? importance[k] / total : 0.0;
  }
  report.accuracy = accuracy(report.pooled);
  return report;
}

// ---------------------------------------------------------------------------
// Report files

inline nlohmann::json confusion_to_json(const ConfusionMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : m.counts) rows.push_back(r);
  return rows;
}

inline nlohmann::json cv_report_to_json(const CVReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& m : r.per_fold) folds.push_back(confusion_to_json(m));
  nlohmann::json importance = nlohmann::json::object();
  for (std::size_t k = 0; k < kFeatureCount; ++k) importance[std::string(kFeatureNames[k])] = r.importance[k];
  return {{"plan", std::string(to_string(r.plan))},
          {"folds", r.folds},
          {"seed", r.seed},
          {"classes", {"C_A", "M_A", "I_A"}},
          {"pooled_confusion", confusion_to_json(r.pooled)},
          {"per_fold_confusion", std::move(folds)},
          {"accuracy", r.accuracy},
          {"feature_importance", std::move(importance)}};
}

/// `actual,C_A,M_A,I_A` header then one row per actual class.
inline std::string format_confusion(const ConfusionMatrix& m) {
  std::string out = "actual,C_A,M_A,I_A\n";
  for (auto c : kSkillClasses) {
    const auto& r = m.counts[index_of(c)];
    out += std::string(to_string(c)) + "," + std::to_string(r[0]) + "," + std::to_string(r[1]) +
           "," + std::to_string(r[2]) + "\n";
  }
  return out;
}

inline nlohmann::json plan_model_to_json(const PlanModel& m) {
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t s = 0; s < m.plan.stages.size(); ++s) {
    const auto& st = m.plan.stages[s];
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : st.groups) {
      nlohmann::json names = nlohmann::json::array();
      for (auto c : g) names.push_back(std::string(to_string(c)));
      groups.push_back(std::move(names));
    }
    stages.push_back({{"features", st.feature_names},
                      {"groups", std::move(groups)},
                      {"forest", forest_to_json(m.forests[s])}});
  }
  return {{"format", "lexiscreen-model"},
          {"version", 1},
          {"feature_format_version", kFeatureFormatVersion},
          {"plan", std::string(to_string(m.plan.id))},
          {"stages", std::move(stages)}};
}

inline PlanModel plan_model_from_json(const nlohmann::json& j) {
  PlanModel m;
  try {
    if (j.at("format") != "lexiscreen-model" || j.at("version") != 1 ||
        j.at("feature_format_version") != kFeatureFormatVersion) {
      throw Error(ErrorCode::SchemaMismatch, "unsupported model format or version");
    }
    m.plan.id = parse_plan_id(j.at("plan").get<std::string>());
    for (const auto& sj : j.at("stages")) {
      Stage st;
      st.feature_names = sj.at("features").get<std::vector<std::string>>();
      for (const auto& gj : sj.at("groups")) {
        std::vector<SkillClass> g;
        for (const auto& c : gj) g.push_back(parse_skill_class(c.get<std::string>()));
        st.groups.push_back(std::move(g));
      }
      auto forest = forest_from_json(sj.at("forest"));
      if (forest.n_features != static_cast<int>(st.feature_names.size()) ||
          forest.n_classes != static_cast<int>(st.groups.size())) {
        throw Error(ErrorCode::SchemaMismatch, "stage forest does not match its feature set");
      }
      st.feature_indices();  // validates names
      m.plan.stages.push_back(std::move(st));
      m.forests.push_back(std::move(forest));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  if (m.plan.stages.empty()) throw Error(ErrorCode::SchemaMismatch, "model has no stages");
  return m;
}

}  // namespace lexiscreen
