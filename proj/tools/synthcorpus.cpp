// synthcorpus: deterministic synthetic reading corpora.

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexiscreen/pipeline.hpp"
#include "lexiscreen/synthcorpus.hpp"

namespace ls = lexiscreen;
namespace synth = lexiscreen::synth;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic reading-recording corpora with known ground truth"};
  app.require_subcommand(1);
  int jobs = ls::default_jobs();
  app.add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string out, profile = "C_A", id = "synth0001";
  double duration = 10.0;
  std::uint64_t seed = 1;
  std::vector<double> pauses;
  auto* gen = app.add_subcommand("generate", "One recording of a single profile");
  gen->add_option("--profile", profile, "C_A, M_A or I_A")->check(CLI::IsMember({"C_A", "M_A", "I_A"}));
  gen->add_option("--out", out, "Corpus root")->required();
  gen->add_option("--duration", duration, "Seconds (>= 5)");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--id", id, "Recording id");
  gen->add_option("--pauses", pauses, "Explicit pause schedule as start,duration pairs in seconds")
      ->delimiter(',');

  synth::CorpusSpec spec;
  auto* corpus = app.add_subcommand("corpus", "A labeled corpus with every profile");
  corpus->add_option("--out", out, "Corpus root")->required();
  corpus->add_option("--per-class", spec.per_class, "Recordings per class")->check(CLI::PositiveNumber);
  corpus->add_option("--duration", spec.duration, "Seconds per recording (>= 5)");
  corpus->add_option("--seed", spec.seed, "Corpus seed");
  corpus->add_option("--children", spec.children, "Distinct child ids (0: one per recording)");
  corpus->add_flag("--randomize-pauses", spec.randomize_pauses, "Draw pause schedules from a random class");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const ls::CorpusLayout layout{out};
    if (gen->parsed()) {
      auto p = synth::make_profile(ls::parse_skill_class(profile), seed);
      if (pauses.size() % 2 != 0) throw ls::Error(ls::ErrorCode::Config, "--pauses needs start,duration pairs");
      for (std::size_t i = 0; i < pauses.size(); i += 2) p.pauses.fixed.push_back({pauses[i], pauses[i + 1]});
      auto r = synth::generate(p, duration, id);
      r.recording.metadata.child_id = "child001";
      r.recording.metadata.timestamp = "2024-01-01T00:00:00";
      synth::write_recording(layout, r);
      synth::write_story(layout, r.story);
      const std::vector<ls::RecordingMetadata> rows{r.recording.metadata};
      const std::vector<ls::SkillClass> classes{r.cls};
      synth::write_index(layout, rows, classes);
      std::cout << "generate: " << id << " (" << profile << ") -> " << out << "\n";
      return 0;
    }
    const int n = 3 * spec.per_class;
    std::vector<ls::RecordingMetadata> rows(n);
    std::vector<ls::SkillClass> classes(n);
    std::vector<ls::StoryText> stories(n);
    ls::parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t k) {
      const auto r = synth::generate_corpus_item(spec, static_cast<int>(k));
      synth::write_recording(layout, r);
      rows[k] = r.recording.metadata;
      classes[k] = r.cls;
      stories[k] = r.story;
    });
    std::set<std::string> written;
    for (const auto& story : stories) {
      if (written.insert(story.story_id).second) synth::write_story(layout, story);
    }
    synth::write_index(layout, rows, classes);
    std::cout << "corpus: " << n << " recordings -> " << out << "\n";
  } catch (const ls::Error& e) {
    std::cerr << "error: " << ls::to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
