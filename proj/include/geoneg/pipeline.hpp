#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "geoneg/contrastive.hpp"
#include "geoneg/corpus.hpp"
#include "geoneg/eval.hpp"

namespace geoneg {

// High-level pipeline commands shared by the C API and the CLI. All of them
// are deterministic per seed; logging goes to stderr, data to files.

struct GenOptions {
    std::string out_dir;
    int count = 10;
    std::uint64_t seed = 0;
    std::array<double, 4> template_weights = {1.0, 1.0, 1.0, 1.0};  // template enum order
    std::string corpus_id = "c";
};
void cmd_gen(const GenOptions& options);

struct NegativesOptions {
    std::string corpus_dir;
    std::string family;  // rule | scene | retrieval | random
    int count = 10;
    std::uint64_t seed = 0;
    std::string out_dir;       // defaults to corpus_dir
    int sample_from_top = 0;   // retrieval only; 0 = take the top-k directly
};
struct NegativesSummary {
    int groups = 0;
    int skipped = 0;  // positives with no applicable perturbation
};
NegativesSummary cmd_negatives(const NegativesOptions& options);

struct TrainOptions {
    std::string corpus_dir;
    std::string negatives_path;  // negatives_<family>.jsonl
    std::string run_dir;
    TrainConfig config;
};
TrainRun cmd_train(const TrainOptions& options);

struct EvalOptions {
    std::string corpus_dir;
    std::string negatives_path;
    std::string run_dir;   // empty = evaluate the untrained seed projection
    std::uint64_t seed = 0;  // projection seed when run_dir is empty
    std::string out_path;  // metrics CSV; empty = stdout only
};
struct EvalResult {
    std::string eval_set_name;
    double hit_at_1 = 0.0;
    int items = 0;
};
EvalResult cmd_eval(const EvalOptions& options);

struct AuditOptions {
    std::string corpus_dir;       // "train" side
    std::string test_corpus_dir;  // "test" side
    double cutoff = 0.995;
    std::vector<double> thresholds = {0.995, 0.99, 0.98, 0.97};
    std::string out_dir;  // writes audit.csv and audit.md when set
    std::uint64_t seed = 0;
};
struct AuditSummary {
    AuditReport report;              // post-filter contamination audit
    SeparationScores separation;     // between the two corpora's caption embeddings
    int removed = 0;
    std::string rendered_markdown;
};
AuditSummary cmd_audit(const AuditOptions& options);

struct SweepOptions {
    std::string corpus_dir;
    std::string negatives_path;
    std::vector<int> ratios = {5, 10, 20, 30, 50};
    TrainConfig config;   // negative_ratio ignored; one run per ratio
    std::string out_path;  // sweep CSV
};
std::vector<RatioSweepRow> cmd_sweep(const SweepOptions& options);

// --- shared assembly helpers -------------------------------------------------

// Loads a negatives file plus its sidecars and assembles training groups with
// precomputed features.
std::vector<TrainGroup> build_train_groups(const Corpus& corpus,
                                           const std::string& negatives_path);

// Eval set over the groups: anchor = the positive's opposite-modality mate,
// candidates = the group's negatives.
EvalSet build_eval_set(const Corpus& corpus, const std::string& negatives_path);

// Feature corpus covering corpus items and all constructed negatives.
CorpusFeatures build_corpus_features(const Corpus& corpus, const std::string& negatives_path);

// Raw text-feature embeddings of all captions (identity "encoder", unit-norm
// rows); used by the audits.
EmbeddingMatrix caption_feature_matrix(const Corpus& corpus);

std::string render_audit_markdown(const AuditSummary& summary, double cutoff);

}  // namespace geoneg
