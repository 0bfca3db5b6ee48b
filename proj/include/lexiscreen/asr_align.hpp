#pragma once

// Scoring of an external ASR hypothesis against the canonical story text:
// word-level edit-distance alignment, confidence-based remapping to C/M/I
// fractions and nearest-centroid classification.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexiscreen/corpus.hpp"
#include "lexiscreen/error.hpp"
#include "lexiscreen/lexical.hpp"
#include "lexiscreen/skill_class.hpp"
#include "lexiscreen/text_io.hpp"

namespace lexiscreen {

struct HypWord {
  std::string text;
  double confidence = 1.0;

  bool operator==(const HypWord&) const = default;
};

enum class OpKind { c, s, i, d };

inline char to_char(OpKind k) {
  switch (k) {
    case OpKind::c: return 'c';
    case OpKind::s: return 's';
    case OpKind::i: return 'i';
    case OpKind::d: return 'd';
  }
  return '?';
}

struct AlignmentOp {
  OpKind kind = OpKind::c;
  std::optional<std::size_t> canonical;   // c, s, d
  std::optional<std::size_t> hypothesis;  // c, s, i

  bool operator==(const AlignmentOp&) const = default;
};

struct Alignment {
  std::size_t distance = 0;
  std::vector<AlignmentOp> ops;
};

/// Lower case with everything but letters, digits and apostrophes removed.
inline std::string comparison_key(std::string_view word) {
  std::string out;
  for (char ch : word) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'') out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

/// Unit-cost word Levenshtein. The table holds suffix distances so the path
/// can be read forward from the first words; at each step a match or
/// substitution is preferred over a deletion, and a deletion over an insertion.
inline Alignment align(std::span<const std::string> canonical, std::span<const std::string> hypothesis) {
  if (canonical.empty()) throw Error(ErrorCode::EmptyCanonical, "canonical text has no words");
  const std::size_t n = canonical.size(), m = hypothesis.size();
  std::vector<std::string> a(n), b(m);
  std::transform(canonical.begin(), canonical.end(), a.begin(), comparison_key);
  std::transform(hypothesis.begin(), hypothesis.end(), b.begin(), comparison_key);

  // D[i][j] = distance between a[i..] and b[j..].
  std::vector<std::size_t> D((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return D[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, m) = n - i;
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = m - j;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      const std::size_t diag = at(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
      at(i, j) = std::min({diag, at(i + 1, j) + 1, at(i, j + 1) + 1});
    }
  }

  Alignment result{at(0, 0), {}};
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const std::size_t here = at(i, j);
    if (i < n && j < m && here == at(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1)) {
      result.ops.push_back({a[i] == b[j] ? OpKind::c : OpKind::s, i, j});
      ++i;
      ++j;
    } else if (i < n && here == at(i + 1, j) + 1) {
      result.ops.push_back({OpKind::d, i, std::nullopt});
      ++i;
    } else {
      result.ops.push_back({OpKind::i, std::nullopt, j});
      ++j;
    }
  }
  return result;
}

inline Alignment align(std::span<const std::string> canonical, std::span<const HypWord> hypothesis) {
  std::vector<std::string> words;
  for (const auto& h : hypothesis) words.push_back(h.text);
  return align(canonical, words);
}

struct RemapPercentages {
  double pct_C = 0.0;
  double pct_M = 0.0;
  double pct_I = 0.0;
};

/// d -> M, c -> C, s and i -> C when confidence >= tau, else I. All counts are
/// divided by the canonical word count, so insertions can push C + I past 1.
inline RemapPercentages confidence_remap(std::span<const AlignmentOp> ops,
                                         std::span<const HypWord> hypothesis, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::OutOfRange, "threshold outside [0, 1]");
  double c = 0, m = 0, inc = 0, canonical = 0;
  for (const auto& op : ops) {
    if (op.canonical) canonical += 1;
    switch (op.kind) {
      case OpKind::c: c += 1; break;
      case OpKind::d: m += 1; break;
      case OpKind::s:
      case OpKind::i: (hypothesis[*op.hypothesis].confidence >= tau ? c : inc) += 1; break;
    }
  }
  if (canonical == 0) throw Error(ErrorCode::EmptyCanonical, "alignment covers no canonical words");
  return {c / canonical, m / canonical, inc / canonical};
}

/// Labeled centroids in (C+S1, M, I) coordinates, one per skill class.
struct CentroidModel {
  std::array<std::array<double, 3>, 3> centroids{};  // indexed by SkillClass
};

/// Projects a labeled variant-B 3-cluster model, dropping the Sm+D axis.
inline CentroidModel project_centroids(const ClusterModel& model) {
  if (model.k != 3 || model.centroids.size() != 3) throw Error(ErrorCode::NoModel, "need a K=3 model");
  const auto labels = label_clusters(model);
  CentroidModel out;
  for (int k = 0; k < 3; ++k) {
    const auto& c = model.centroids[k];
    out.centroids[index_of(labels[k])] = {c[0], c[2], c[3]};
  }
  return out;
}

/// Euclidean nearest centroid; near-ties (1e-12) go to the lower class.
inline SkillClass classify_by_centroid(const RemapPercentages& p, const CentroidModel& model) {
  const std::array<double, 3> x{p.pct_C, p.pct_M, p.pct_I};
  int best = 0;
  double best_d = squared_distance(x, model.centroids[0]);
  for (int k = 1; k < 3; ++k) {
    const double d = squared_distance(x, model.centroids[k]);
    if (d < best_d - 1e-12) {
      best = k;
      best_d = d;
    }
  }
  return kSkillClasses[best];
}

// ---------------------------------------------------------------------------
// <id>.hyp.csv: `word,confidence` rows in decoding order; an optional
// `word,confidence` header line is skipped.

inline std::vector<HypWord> parse_hypothesis_text(std::string_view content) {
  std::vector<HypWord> out;
  for (const auto& line : text::content_lines(content)) {
    if (out.empty() && line == "word,confidence") continue;
    const auto f = text::split(line);
    if (f.size() != 2 || f[0].empty()) {
      throw Error(ErrorCode::SchemaMismatch, "malformed hypothesis row '" + line + "'");
    }
    const double conf = text::parse_double(f[1], ErrorCode::OutOfRange, "confidence");
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw Error(ErrorCode::OutOfRange, "confidence outside [0, 1] in '" + line + "'");
    }
    out.push_back({f[0], conf});
  }
  return out;
}

inline std::vector<HypWord> load_hypothesis(const std::filesystem::path& path) {
  return parse_hypothesis_text(text::read_file(path));
}

inline std::string format_hypothesis(std::span<const HypWord> words) {
  std::string out = "word,confidence\n";
  for (const auto& w : words) out += w.text + "," + text::format_fixed(w.confidence, 4) + "\n";
  return out;
}

}  // namespace lexiscreen
