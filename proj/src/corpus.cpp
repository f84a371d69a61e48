#include "geoneg/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "geoneg/util.hpp"

namespace geoneg {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

nlohmann::ordered_json scene_to_json(const Scene& scene) {
    const Scene c = canonicalize(scene);
    ordered_json j;
    j["points"] = json::array();
    for (const auto& p : c.points) {
        ordered_json pj;
        pj["id"] = std::string(1, p.id);
        pj["x"] = p.x;
        pj["y"] = p.y;
        j["points"].push_back(pj);
    }
    j["shapes"] = json::array();
    for (const auto& s : c.shapes) {
        ordered_json sj;
        switch (s.kind) {
            case ShapeKind::segment:
                sj["kind"] = "segment";
                sj["vertices"] = s.label();
                break;
            case ShapeKind::polygon:
                sj["kind"] = "polygon";
                sj["vertices"] = s.label();
                sj["attr"] = shape_attr_name(s.attr);
                break;
            case ShapeKind::circle:
                sj["kind"] = "circle";
                sj["center"] = s.label();
                sj["radius"] = s.radius;
                break;
        }
        j["shapes"].push_back(sj);
    }
    j["relations"] = json::array();
    for (const auto& r : c.relations) {
        ordered_json rj;
        rj["kind"] = relation_kind_name(r.kind);
        rj["lhs"] = r.lhs;
        rj["rhs"] = r.rhs;
        j["relations"].push_back(rj);
    }
    j["marks"] = json::array();
    for (const auto& m : c.marks) {
        ordered_json mj;
        mj["kind"] = m.quantity == Quantity::length ? "length" : "angle";
        mj["target"] = measure_target_label(m.target);
        mj["value"] = m.value;
        j["marks"].push_back(mj);
    }
    j["seed"] = c.seed;
    return j;
}

Scene scene_from_json(const json& j) {
    Scene scene;
    for (const auto& pj : j.at("points")) {
        Point p;
        std::string id = pj.at("id").get<std::string>();
        if (id.size() != 1) throw Error::runtime("bad point id in scene JSON: " + id);
        p.id = id[0];
        p.x = pj.at("x").get<double>();
        p.y = pj.at("y").get<double>();
        scene.points.push_back(p);
    }
    for (const auto& sj : j.at("shapes")) {
        Shape s;
        std::string kind = sj.at("kind").get<std::string>();
        if (kind == "segment" || kind == "polygon") {
            s.kind = kind == "segment" ? ShapeKind::segment : ShapeKind::polygon;
            std::string verts = sj.at("vertices").get<std::string>();
            s.vertices.assign(verts.begin(), verts.end());
            if (kind == "polygon") {
                auto attr = shape_attr_from_name(sj.at("attr").get<std::string>());
                if (!attr) throw Error::runtime("bad attr in scene JSON");
                s.attr = *attr;
            }
        } else if (kind == "circle") {
            s.kind = ShapeKind::circle;
            std::string center = sj.at("center").get<std::string>();
            s.vertices.assign(center.begin(), center.end());
            s.radius = sj.at("radius").get<double>();
        } else {
            throw Error::runtime("unknown shape kind in scene JSON: " + kind);
        }
        scene.shapes.push_back(s);
    }
    for (const auto& rj : j.at("relations")) {
        Relation r;
        auto kind = relation_kind_from_name(rj.at("kind").get<std::string>());
        if (!kind) throw Error::runtime("unknown relation kind in scene JSON");
        r.kind = *kind;
        r.lhs = rj.at("lhs").get<int>();
        r.rhs = rj.at("rhs").get<int>();
        scene.relations.push_back(r);
    }
    for (const auto& mj : j.at("marks")) {
        NumericMark m;
        std::string kind = mj.at("kind").get<std::string>();
        std::string target = mj.at("target").get<std::string>();
        m.value = mj.at("value").get<double>();
        if (kind == "length") {
            m.quantity = Quantity::length;
            if (target.size() != 2) throw Error::runtime("bad length target in scene JSON");
            m.target = SegmentRef{target[0], target[1]};
        } else if (kind == "angle") {
            m.quantity = Quantity::angle;
            if (target.size() != 3) throw Error::runtime("bad angle target in scene JSON");
            m.target = AngleRef{target[0], target[1], target[2]};
        } else {
            throw Error::runtime("unknown mark kind in scene JSON: " + kind);
        }
        scene.marks.push_back(m);
    }
    scene.seed = j.at("seed").get<std::uint64_t>();
    return scene;
}

nlohmann::ordered_json caption_to_json(const Caption& caption, const std::string& id,
                                       const std::string& scene_id) {
    ordered_json j;
    j["id"] = id;
    j["scene_id"] = scene_id;
    j["text"] = caption.text;
    j["facts"] = json::array();
    for (const auto& f : caption.facts) {
        ordered_json fj;
        fj["kind"] = fact_kind_name(f.kind);
        fj["payload"] = f.payload;
        j["facts"].push_back(fj);
    }
    return j;
}

namespace {

Caption caption_from_json(const json& j) {
    Caption c;
    c.text = j.at("text").get<std::string>();
    for (const auto& fj : j.at("facts")) {
        Fact f;
        std::string kind = fj.at("kind").get<std::string>();
        if (kind == "shape") f.kind = FactKind::shape;
        else if (kind == "relation") f.kind = FactKind::relation;
        else if (kind == "mark") f.kind = FactKind::mark;
        else if (kind == "ordering") f.kind = FactKind::ordering;
        else throw Error::runtime("unknown fact kind: " + kind);
        f.payload = fj.at("payload").get<std::string>();
        c.facts.push_back(f);
    }
    return c;
}

NegativeCategory category_from_name(const std::string& name) {
    for (NegativeCategory c :
         {NegativeCategory::ordering, NegativeCategory::shape_attribute, NegativeCategory::relation,
          NegativeCategory::numeric, NegativeCategory::retrieval, NegativeCategory::scene_perturb,
          NegativeCategory::random}) {
        if (negative_category_name(c) == name) return c;
    }
    throw Error::runtime("unknown negative category: " + name);
}

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream scenes(fs::path(dir) / "scenes.jsonl");
    std::ofstream captions(fs::path(dir) / "captions.jsonl");
    if (!scenes || !captions) throw Error::runtime("cannot write corpus files in " + dir);
    for (const auto& item : corpus.items) {
        scenes << scene_to_json(item.scene).dump() << "\n";
        captions << caption_to_json(item.caption, item.caption_id, item.scene_id).dump() << "\n";
    }
}

Corpus load_corpus(const std::string& dir) {
    auto scene_lines = read_lines((fs::path(dir) / "scenes.jsonl").string());
    auto caption_lines = read_lines((fs::path(dir) / "captions.jsonl").string());
    if (scene_lines.size() != caption_lines.size())
        throw Error::runtime("scenes.jsonl and captions.jsonl disagree in length in " + dir);
    Corpus corpus;
    for (std::size_t i = 0; i < scene_lines.size(); ++i) {
        CorpusItem item;
        item.scene = scene_from_json(json::parse(scene_lines[i]));
        json cj = json::parse(caption_lines[i]);
        item.caption = caption_from_json(cj);
        item.caption_id = cj.at("id").get<std::string>();
        item.scene_id = cj.at("scene_id").get<std::string>();
        corpus.items.push_back(std::move(item));
    }
    return corpus;
}

void save_negative_groups(const std::vector<NegativeGroup>& groups, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error::runtime("cannot write " + path);
    for (const auto& g : groups) {
        ordered_json j;
        j["positive_id"] = g.positive_id;
        j["modality"] = modality_name(g.modality);
        j["ratio"] = g.ratio();
        j["negatives"] = json::array();
        for (const auto& n : g.negatives) {
            ordered_json nj;
            nj["id"] = n.id;
            nj["category"] = negative_category_name(n.category);
            nj["delta"] = n.delta;
            j["negatives"].push_back(nj);
        }
        out << j.dump() << "\n";
    }
}

std::vector<NegativeGroup> load_negative_groups(const std::string& path) {
    std::vector<NegativeGroup> groups;
    for (const auto& line : read_lines(path)) {
        json j = json::parse(line);
        NegativeGroup g;
        g.positive_id = j.at("positive_id").get<std::string>();
        g.modality = j.at("modality").get<std::string>() == "image" ? Modality::image : Modality::text;
        for (const auto& nj : j.at("negatives")) {
            NegativeItem item;
            item.id = nj.at("id").get<std::string>();
            item.category = category_from_name(nj.at("category").get<std::string>());
            item.delta = nj.at("delta").get<std::string>();
            g.negatives.push_back(item);
        }
        if (j.at("ratio").get<int>() != g.ratio())
            throw Error::runtime("ratio field disagrees with negative count in " + path);
        groups.push_back(std::move(g));
    }
    return groups;
}

void save_negative_captions(const std::vector<std::pair<std::string, Caption>>& items,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error::runtime("cannot write " + path);
    for (const auto& [id, cap] : items) {
        out << caption_to_json(cap, id, "").dump() << "\n";
    }
}

std::vector<std::pair<std::string, Caption>> load_negative_captions(const std::string& path) {
    std::vector<std::pair<std::string, Caption>> items;
    for (const auto& line : read_lines(path)) {
        json j = json::parse(line);
        items.emplace_back(j.at("id").get<std::string>(), caption_from_json(j));
    }
    return items;
}

void save_negative_scenes(const std::vector<std::pair<std::string, Scene>>& items,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error::runtime("cannot write " + path);
    for (const auto& [id, scene] : items) {
        out << scene_to_json(scene).dump() << "\n";
    }
}

std::vector<Scene> load_negative_scenes(const std::string& path) {
    std::vector<Scene> scenes;
    for (const auto& line : read_lines(path)) {
        scenes.push_back(scene_from_json(json::parse(line)));
    }
    return scenes;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error::runtime("cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_text_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::runtime("cannot write " + path);
    out << content;
    if (!out) throw Error::runtime("failed while writing " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::runtime("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace geoneg
