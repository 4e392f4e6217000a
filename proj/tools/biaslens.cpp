// Command-line front end: ingest, split, train, eval, analyze and report.

#include <biaslens/biaslens.hpp>
#include <biaslens/synthetic.hpp>

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace biaslens;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("failed writing " + path);
}

struct LoadedModel {
  Checkpoint checkpoint;
  std::unique_ptr<Classifier> classifier;
};

LoadedModel load_model(const std::string& path, const std::string& embeddings_override) {
  LoadedModel m;
  m.checkpoint = load_checkpoint(path);
  const std::string emb = embeddings_override.empty() ? m.checkpoint.embeddings_path : embeddings_override;
  if (emb.empty()) throw Error(path + ": checkpoint names no embeddings file; pass --embeddings");
  auto table = std::make_shared<const EmbeddingTable>(load_embeddings(emb, m.checkpoint.params.shape().input));
  m.classifier = std::make_unique<Classifier>(m.checkpoint.params, std::move(table),
                                              m.checkpoint.config.max_sequence_length);
  return m;
}

std::vector<Article> load_articles(const std::string& corpus, const std::string& split, const std::string& partition) {
  auto articles = read_corpus(corpus);
  if (split.empty()) return articles;
  return select_partition(articles, read_split(split), parse_partition(partition));
}

struct CommonInputs {
  std::string corpus;
  std::string split;
  std::string partition = "test";
  std::string embeddings;
};

void add_corpus_options(CLI::App* cmd, CommonInputs& in) {
  cmd->add_option("--corpus", in.corpus, "Labeled corpus (JSONL from `ingest`)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--split", in.split, "Split file; restricts to --partition")->check(CLI::ExistingFile);
  cmd->add_option("--partition", in.partition, "Partition used with --split")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  cmd->add_option("--embeddings", in.embeddings, "Override the embeddings path stored in the checkpoint");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train recurrent bias classifiers and localize bias by segment ablation"};
  app.require_subcommand(1);

  // ingest
  struct {
    std::string articles, ratings, out, normalization, audit;
    bool no_scrub = false;
  } ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Join articles with portal ratings and derive labels");
  ingest_cmd->add_option("--articles", ingest.articles, "Articles JSONL (id, portal, topic, text)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--ratings", ingest.ratings, "Ratings CSV")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest.out, "Output corpus JSONL")->required();
  ingest_cmd->add_option("--normalization", ingest.normalization, "Placement normalization table (CSV)")
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--audit", ingest.audit, "Write every scrubbing change as JSONL");
  ingest_cmd->add_flag("--no-scrub", ingest.no_scrub, "Keep portal mentions");

  // split
  struct {
    std::string corpus, out;
    std::uint64_t seed = 0;
    double min_fraction = 0.10;
  } split;
  auto* split_cmd = app.add_subcommand("split", "Assign whole topics to train/dev/test");
  split_cmd->add_option("--corpus", split.corpus)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--seed", split.seed)->required();
  split_cmd->add_option("--min-fraction", split.min_fraction, "Minimum dev and test share")->capture_default_str();
  split_cmd->add_option("--out", split.out)->required();

  // stats
  struct {
    std::string corpus, split;
  } stats;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus size, portals, topics and label prevalence");
  stats_cmd->add_option("--corpus", stats.corpus)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--split", stats.split)->check(CLI::ExistingFile);

  // train
  struct {
    std::string corpus, split, embeddings, target, out;
    TrainConfig config;
  } tr;
  auto* train_cmd = app.add_subcommand("train", "Train one classifier with dev early stopping");
  train_cmd->add_option("--corpus", tr.corpus)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--split", tr.split)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--embeddings", tr.embeddings)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--target", tr.target)->required()->check(CLI::IsMember({"bias", "fairness", "objectivity"}));
  train_cmd->add_option("--seed", tr.config.seed)->required();
  train_cmd->add_option("--out", tr.out)->required();
  train_cmd->add_option("--batch-size", tr.config.batch_size)->capture_default_str();
  train_cmd->add_option("--max-epochs", tr.config.max_epochs)->capture_default_str();
  train_cmd->add_option("--patience", tr.config.patience)->capture_default_str();
  train_cmd->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  train_cmd->add_option("--hidden", tr.config.hidden)->capture_default_str();
  train_cmd->add_option("--max-len", tr.config.max_sequence_length, "Maximum tokens per article")->capture_default_str();

  // eval
  struct {
    std::string model, out;
    CommonInputs in;
  } ev;
  auto* eval_cmd = app.add_subcommand("eval", "Per-class F1, macro-F1 and majority baseline");
  eval_cmd->add_option("--model", ev.model)->required()->check(CLI::ExistingFile);
  add_corpus_options(eval_cmd, ev.in);
  eval_cmd->add_option("--out", ev.out)->required();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Reverse feature analysis");
  analyze_cmd->require_subcommand(1);

  struct {
    std::string model, granularity = "sentence", out;
    bool only_correct = false;
    CommonInputs in;
  } st;
  auto* strength_cmd = analyze_cmd->add_subcommand("strength", "Segment-ablation bias strength per article");
  strength_cmd->add_option("--model", st.model)->required()->check(CLI::ExistingFile);
  add_corpus_options(strength_cmd, st.in);
  strength_cmd->add_option("--granularity", st.granularity)->check(CLI::IsMember({"sentence", "paragraph"}));
  strength_cmd->add_flag("--only-correct", st.only_correct, "Keep only correctly classified articles");
  strength_cmd->add_option("--out", st.out)->required();

  struct {
    std::string models, out, scope = "per_curve";
    CommonInputs in;
  } pt;
  auto* pattern_cmd = analyze_cmd->add_subcommand("pattern", "Normalized discourse-quarter strength patterns");
  pattern_cmd->add_option("--models", pt.models, "Comma-separated checkpoints")->required();
  add_corpus_options(pattern_cmd, pt.in);
  pattern_cmd->add_option("--scope", pt.scope, "Normalization population")
      ->check(CLI::IsMember({"per_curve", "per_bias_type"}));
  pattern_cmd->add_option("--out", pt.out)->required();

  struct {
    std::string model, lexicon, out;
    CommonInputs in;
  } lx;
  auto* lexicon_cmd = analyze_cmd->add_subcommand("lexicon", "Correlate word categories with sentence strength");
  lexicon_cmd->add_option("--model", lx.model)->required()->check(CLI::ExistingFile);
  add_corpus_options(lexicon_cmd, lx.in);
  lexicon_cmd->add_option("--lexicon", lx.lexicon)->required()->check(CLI::ExistingFile);
  lexicon_cmd->add_option("--out", lx.out)->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Render analysis outputs");
  report_cmd->require_subcommand(1);
  struct {
    std::string strengths, corpus, out;
  } hm;
  auto* heatmap_cmd = report_cmd->add_subcommand("heatmap", "One HTML heatmap per strength report");
  heatmap_cmd->add_option("--strengths", hm.strengths)->required()->check(CLI::ExistingFile);
  heatmap_cmd->add_option("--corpus", hm.corpus)->required()->check(CLI::ExistingFile);
  heatmap_cmd->add_option("--out", hm.out, "Output directory")->required();
  struct {
    std::string in, out;
  } pr;
  auto* pattern_report_cmd = report_cmd->add_subcommand("pattern", "Canonical pattern table");
  pattern_report_cmd->add_option("--in", pr.in)->required()->check(CLI::ExistingFile);
  pattern_report_cmd->add_option("--out", pr.out)->required();

  // synth
  struct {
    std::string out_dir;
    std::uint64_t seed = 1;
  } sy;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic marker-token dataset");
  synth_cmd->add_option("--out-dir", sy.out_dir)->required();
  synth_cmd->add_option("--seed", sy.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) {
      const PlacementNormalizer normalizer =
          ingest.normalization.empty() ? PlacementNormalizer{} : PlacementNormalizer::load(ingest.normalization);
      auto result = load_corpus(ingest.articles, ingest.ratings, normalizer, LoadOptions{!ingest.no_scrub});
      for (const auto& e : result.errors) std::cerr << ingest.articles << ":" << e.line << ": " << e.message << "\n";
      for (const auto& [portal, n] : result.dropped_by_portal)
        std::cerr << "dropped " << n << " article(s) from unrated portal '" << portal << "'\n";
      std::ostringstream out;
      write_corpus(out, result.articles);
      write_file(ingest.out, out.str());
      if (!ingest.audit.empty()) {
        std::ostringstream audit;
        for (const auto& ev : result.scrub_log)
          audit << nlohmann::json{{"article_id", ev.article_id},
                                  {"kind", ev.kind == ScrubEvent::Kind::alias_replaced ? "alias" : "byline"},
                                  {"original", ev.original}}
                       .dump()
                << '\n';
        write_file(ingest.audit, audit.str());
      }
      std::cerr << "kept " << result.articles.size() << ", dropped unrated " << result.dropped_unrated
                << ", dropped empty " << result.dropped_empty_after_scrub << ", malformed " << result.errors.size()
                << ", scrub changes " << result.scrub_log.size() << "\n";
    } else if (*split_cmd) {
      const auto articles = read_corpus(split.corpus);
      const auto assignment = split_by_topic(articles, split.seed, split.min_fraction);
      write_file(split.out, split_to_string(assignment));
      const auto s = corpus_stats(articles, &assignment);
      for (auto p : {Partition::train, Partition::dev, Partition::test}) {
        auto it = s.partitions.find(p);
        std::cerr << to_string(p) << ": " << (it == s.partitions.end() ? 0 : it->second.articles) << " articles\n";
      }
    } else if (*stats_cmd) {
      const auto articles = read_corpus(stats.corpus);
      std::optional<SplitAssignment> assignment;
      if (!stats.split.empty()) assignment = read_split(stats.split);
      const auto s = corpus_stats(articles, assignment ? &*assignment : nullptr);
      std::cout << "articles " << s.articles << "\nportals " << s.portals.size() << "\ntopics " << s.topics.size()
                << "\n";
      for (const auto& [p, ps] : s.partitions) {
        std::cout << to_string(p) << " " << ps.articles;
        for (auto t : kAllBiasTypes) std::cout << " " << to_string(t) << "=" << format_percent(ps.prevalence(t)) << "%";
        std::cout << "\n";
      }
    } else if (*train_cmd) {
      const auto articles = read_corpus(tr.corpus);
      const auto assignment = read_split(tr.split);
      const BiasType target = parse_bias_type(tr.target);
      const auto table = load_embeddings(tr.embeddings);
      const auto train_set = make_examples(select_partition(articles, assignment, Partition::train), table, target,
                                           tr.config.max_sequence_length);
      const auto dev_set = make_examples(select_partition(articles, assignment, Partition::dev), table, target,
                                         tr.config.max_sequence_length);
      auto result = train(train_set, dev_set, tr.config, table.dimension());
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& e : result.log)
        std::cerr << "epoch " << e.epoch << " loss " << e.train_loss << " dev macro-F1 " << e.dev_macro_f1
                  << (e.improved ? " *" : "") << "\n";
      Checkpoint ck;
      ck.target = target;
      ck.embeddings_path = fs::absolute(tr.embeddings).string();
      ck.config = tr.config;
      ck.params = std::move(result.params);
      ck.history = std::move(result.log);
      ck.best_epoch = result.best_epoch;
      save_checkpoint(ck, tr.out);
      std::cerr << "best epoch " << ck.best_epoch << " dev macro-F1 " << result.best_dev_macro_f1 << "\n";
    } else if (*eval_cmd) {
      const auto model = load_model(ev.model, ev.in.embeddings);
      const auto articles = load_articles(ev.in.corpus, ev.in.split, ev.in.partition);
      const BiasType target = model.checkpoint.target;
      const auto evaluation = evaluate(*model.classifier, articles, target);
      const auto majority = majority_baseline(evaluation.truth);
      nlohmann::ordered_json j;
      j["target"] = std::string(to_string(target));
      j["partition"] = ev.in.split.empty() ? "all" : ev.in.partition;
      j["n"] = evaluation.report.n;
      j["model"] = report_to_json(evaluation.report);
      j["majority"] = report_to_json(majority);
      j["table"] = results_table(evaluation.report, majority);
      write_file(ev.out, j.dump(2) + "\n");
      std::cout << "macro-F1 " << format_percent(evaluation.report.macro_f1) << "% (majority "
                << format_percent(majority.macro_f1) << "%)\n";
    } else if (*strength_cmd) {
      const auto model = load_model(st.model, st.in.embeddings);
      auto articles = load_articles(st.in.corpus, st.in.split, st.in.partition);
      if (st.only_correct) articles = filter_correct(*model.classifier, articles, model.checkpoint.target);
      const Granularity g = parse_granularity(st.granularity);
      std::ostringstream out;
      std::size_t written = 0, skipped = 0;
      for (const auto& a : articles) {
        const auto seg = segment_article(a);
        if (segment_ranges(seg.sentences.size(), g).size() < 2) {
          ++skipped;
          continue;
        }
        out << to_json(bias_strength(*model.classifier, seg, g)).dump() << '\n';
        ++written;
      }
      write_file(st.out, out.str());
      std::cerr << "wrote " << written << " report(s); skipped " << skipped << " single-segment article(s)\n";
    } else if (*pattern_cmd) {
      const auto articles = load_articles(pt.in.corpus, pt.in.split, pt.in.partition);
      const auto scope = pt.scope == "per_curve" ? NormalizationScope::per_curve : NormalizationScope::per_bias_type;
      std::vector<QuartilePattern> patterns;
      std::stringstream paths(pt.models);
      std::string path;
      while (std::getline(paths, path, ',')) {
        if (path.empty()) continue;
        const auto model = load_model(path, pt.in.embeddings);
        const BiasType target = model.checkpoint.target;
        const auto correct = filter_correct(*model.classifier, articles, target);
        const auto result = quartile_pattern(*model.classifier, correct, target, scope);
        std::cerr << to_string(target) << ": " << correct.size() << " correct, " << result.biased.articles
                  << " biased / " << result.unbiased.articles << " unbiased used, " << result.skipped_short
                  << " skipped (<4 sentences), normalization " << to_string(result.scope) << "\n";
        patterns.push_back(result.biased);
        patterns.push_back(result.unbiased);
      }
      write_file(pt.out, emit_pattern_table(patterns));
    } else if (*lexicon_cmd) {
      const auto model = load_model(lx.model, lx.in.embeddings);
      const auto articles = load_articles(lx.in.corpus, lx.in.split, lx.in.partition);
      const auto lexicon = load_lexicon(lx.lexicon);
      const BiasType target = model.checkpoint.target;
      const auto correct = filter_correct(*model.classifier, articles, target);
      const auto report = correlate_categories(*model.classifier, correct, lexicon, target);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      std::string out = "category,bias_type,r,n\n";
      for (const auto& r : report.results)
        out += csv::escape(r.category) + "," + std::string(to_string(r.bias_type)) + "," + csv::format_double(r.r) +
               "," + std::to_string(r.n) + "\n";
      write_file(lx.out, out);
    } else if (*heatmap_cmd) {
      const auto articles = read_corpus(hm.corpus);
      std::map<std::string, const Article*> by_id;
      for (const auto& a : articles) by_id[a.id] = &a;
      std::ifstream in(hm.strengths);
      const auto reports = read_strength_reports(in, hm.strengths);
      fs::create_directories(hm.out);
      for (const auto& r : reports) {
        auto it = by_id.find(r.article_id);
        if (it == by_id.end()) throw Error("strength report for unknown article '" + r.article_id + "'");
        std::string name;
        for (char c : r.article_id) name += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
        write_file((fs::path(hm.out) / (name + "." + std::string(to_string(r.granularity)) + ".html")).string(),
                   render_heatmap(r, it->second->text));
      }
      std::cerr << "rendered " << reports.size() << " heatmap(s)\n";
    } else if (*pattern_report_cmd) {
      std::ifstream in(pr.in);
      write_file(pr.out, emit_pattern_table(parse_pattern_table(in, pr.in)));
    } else if (*synth_cmd) {
      synthetic::Config cfg;
      cfg.seed = sy.seed;
      fs::create_directories(sy.out_dir);
      const fs::path dir(sy.out_dir);
      std::ostringstream articles, embeddings;
      synthetic::write_articles(articles, synthetic::corpus(cfg));
      synthetic::write_embeddings(embeddings, cfg, *synthetic::embeddings(cfg));
      write_file((dir / "articles.jsonl").string(), articles.str());
      write_file((dir / "ratings.csv").string(), synthetic::ratings_csv());
      write_file((dir / "embeddings.txt").string(), embeddings.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
