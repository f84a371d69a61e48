#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoneg/caption.hpp"
#include "geoneg/geometry.hpp"
#include "geoneg/negatives.hpp"

namespace geoneg {

// Scene <-> single-line JSON with fixed field order
// (points, shapes, relations, marks, seed).
nlohmann::ordered_json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

nlohmann::ordered_json caption_to_json(const Caption& caption, const std::string& id,
                                       const std::string& scene_id);

struct CorpusItem {
    std::string scene_id;
    Scene scene;
    std::string caption_id;
    Caption caption;
};

struct Corpus {
    std::vector<CorpusItem> items;
};

// scenes.jsonl + captions.jsonl, aligned by line.
void save_corpus(const Corpus& corpus, const std::string& dir);
Corpus load_corpus(const std::string& dir);

// negatives_<family>.jsonl rows:
//   {positive_id, modality, ratio, negatives: [{id, category, delta}]}
void save_negative_groups(const std::vector<NegativeGroup>& groups, const std::string& path);
std::vector<NegativeGroup> load_negative_groups(const std::string& path);

// Sidecar items for constructed negatives.
void save_negative_captions(const std::vector<std::pair<std::string, Caption>>& items,
                            const std::string& path);
std::vector<std::pair<std::string, Caption>> load_negative_captions(const std::string& path);

void save_negative_scenes(const std::vector<std::pair<std::string, Scene>>& items,
                          const std::string& path);
// Ids are re-derived from the group order, so the file holds plain scenes.
std::vector<Scene> load_negative_scenes(const std::string& path);

std::vector<std::string> read_lines(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace geoneg
