#include "hopgraph/storage.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "hopgraph/errors.hpp"
#include "json.hpp"

namespace hopgraph {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'A', 'R'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 8;

std::uint64_t fnv1a_bytes(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    }
    return v;
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    }
    return v;
}

nlohmann::json embedding_to_json(const Embedding& e) {
    nlohmann::json arr = nlohmann::json::array();
    for (float v : e.values) {
        arr.push_back(v);
    }
    return arr;
}

Embedding embedding_from_json(const nlohmann::json& arr) {
    Embedding e;
    e.values.reserve(arr.size());
    for (const auto& v : arr) {
        e.values.push_back(v.get<float>());
    }
    return e;
}

nlohmann::json triplets_to_json(const std::vector<QueryTriplet>& triplets) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : triplets) {
        arr.push_back({{"question", t.question},
                       {"keywords", t.keywords.terms()},
                       {"embedding", embedding_to_json(t.embedding)}});
    }
    return arr;
}

std::vector<QueryTriplet> triplets_from_json(const nlohmann::json& arr, Direction direction) {
    std::vector<QueryTriplet> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& t = arr[i];
        QueryTriplet q;
        q.question = t.at("question").get<std::string>();
        q.keywords = Keywords::of(t.at("keywords").get<std::vector<std::string>>());
        q.embedding = embedding_from_json(t.at("embedding"));
        q.direction = direction;
        q.ordinal = i;
        out.push_back(std::move(q));
    }
    return out;
}

nlohmann::json payload_json(const PassageGraph& graph, const BuildMeta& meta) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& [id, v] : graph.vertices()) {
        vertices.push_back({{"id", v.passage.id},
                            {"text", v.passage.text},
                            {"doc_id", v.passage.doc_id},
                            {"keywords", v.passage_keywords.terms()},
                            {"embedding", embedding_to_json(v.passage_embedding)},
                            {"out", triplets_to_json(v.out_triplets)},
                            {"in", triplets_to_json(v.in_triplets)}});
    }

    nlohmann::json candidates = nlohmann::json::array();
    for (const Edge& e : graph.candidate_edges()) {
        candidates.push_back({{"source", e.source_id},
                              {"target", e.target_id},
                              {"question", e.question},
                              {"keywords", e.keywords.terms()},
                              {"embedding", embedding_to_json(e.embedding)},
                              {"score", e.sim_score},
                              {"source_ordinal", e.source_ordinal},
                              {"target_ordinal", e.target_ordinal}});
    }

    return {{"dim", graph.dim()},
            {"edge_cap", graph.edge_cap()},
            {"meta",
             {{"embedder", meta.embedder},
              {"extractor", meta.extractor},
              {"chat", meta.chat},
              {"created_at", meta.created_at},
              {"notes", meta.notes}}},
            {"vertices", std::move(vertices)},
            {"candidates", std::move(candidates)}};
}

} // namespace

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void save(const PassageGraph& graph, const BuildMeta& meta, const std::string& path) {
    BuildMeta stamped = meta;
    if (stamped.created_at.empty()) {
        stamped.created_at = now_iso8601();
    }
    std::string payload = payload_json(graph, stamped).dump();

    std::string blob;
    blob.reserve(kHeaderSize + payload.size());
    blob.append(kMagic, 4);
    put_u32(blob, kFormatVersion);
    put_u64(blob, payload.size());
    put_u64(blob, fnv1a_bytes(payload));
    blob += payload;

    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write archive: " + tmp.string());
        }
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        out.flush();
        if (!out) {
            throw Error("short write to archive: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move archive into place: " + ec.message());
    }
}

LoadedGraph load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open archive: " + path);
    }
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (blob.size() < kHeaderSize || blob.compare(0, 4, kMagic, 4) != 0) {
        throw ChecksumError(path + " is not a graph archive");
    }
    std::uint32_t version = get_u32(blob, 4);
    if (version != kFormatVersion) {
        throw VersionError("archive format version " + std::to_string(version) +
                           " is not supported; this build reads version " +
                           std::to_string(kFormatVersion));
    }
    std::uint64_t payload_size = get_u64(blob, 8);
    if (blob.size() - kHeaderSize != payload_size) {
        throw ChecksumError("archive payload is truncated: header says " +
                            std::to_string(payload_size) + " bytes, file has " +
                            std::to_string(blob.size() - kHeaderSize));
    }
    std::uint64_t stored = get_u64(blob, 16);
    std::string payload = blob.substr(kHeaderSize);
    std::uint64_t computed = fnv1a_bytes(payload);
    if (stored != computed) {
        throw ChecksumError("archive checksum mismatch: the file is corrupt");
    }

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::exception& e) {
        throw ChecksumError(std::string("archive payload is not valid JSON: ") + e.what());
    }

    try {
        std::vector<Vertex> vertices;
        for (const auto& jv : doc.at("vertices")) {
            Vertex v;
            v.passage.id = jv.at("id").get<std::string>();
            v.passage.text = jv.at("text").get<std::string>();
            v.passage.doc_id = jv.value("doc_id", std::string{});
            v.passage_keywords = Keywords::of(jv.at("keywords").get<std::vector<std::string>>());
            v.passage_embedding = embedding_from_json(jv.at("embedding"));
            v.out_triplets = triplets_from_json(jv.at("out"), Direction::OutComing);
            v.in_triplets = triplets_from_json(jv.at("in"), Direction::InComing);
            vertices.push_back(std::move(v));
        }

        std::vector<Edge> candidates;
        for (const auto& je : doc.at("candidates")) {
            Edge e;
            e.source_id = je.at("source").get<std::string>();
            e.target_id = je.at("target").get<std::string>();
            e.question = je.at("question").get<std::string>();
            e.keywords = Keywords::of(je.at("keywords").get<std::vector<std::string>>());
            e.embedding = embedding_from_json(je.at("embedding"));
            e.sim_score = je.at("score").get<double>();
            e.source_ordinal = je.at("source_ordinal").get<std::size_t>();
            e.target_ordinal = je.at("target_ordinal").get<std::size_t>();
            candidates.push_back(std::move(e));
        }

        const auto& jm = doc.at("meta");
        BuildMeta meta;
        meta.embedder = jm.value("embedder", std::string{});
        meta.extractor = jm.value("extractor", std::string{});
        meta.chat = jm.value("chat", std::string{});
        meta.created_at = jm.value("created_at", std::string{});
        meta.notes = jm.value("notes", std::string{});

        PassageGraph graph(std::move(vertices), std::move(candidates),
                           doc.at("dim").get<std::size_t>(),
                           doc.at("edge_cap").get<std::size_t>());
        return {std::move(graph), std::move(meta)};
    } catch (const nlohmann::json::exception& e) {
        throw ChecksumError(std::string("archive payload has an unexpected layout: ") +
                            e.what());
    }
}

GraphStats stats(const PassageGraph& graph) {
    GraphStats s;
    s.vertex_count = graph.vertex_count();
    s.edge_count = graph.edge_count();
    if (s.vertex_count > 0) {
        s.avg_out_degree = static_cast<double>(s.edge_count) / s.vertex_count;
        double chars = 0.0;
        for (const auto& [id, v] : graph.vertices()) {
            chars += static_cast<double>(v.passage.text.size());
        }
        s.avg_passage_chars = chars / static_cast<double>(s.vertex_count);
    }
    return s;
}

} // namespace hopgraph
