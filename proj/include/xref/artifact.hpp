#pragma once

#include "xref/anchors.hpp"
#include "xref/cooccurrence.hpp"
#include "xref/corpus.hpp"
#include "xref/inference.hpp"
#include "xref/tokenizer.hpp"
#include "xref/topics.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xref {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

/// sha256 over the stage name, its canonical config JSON, the keys of its
/// upstream artifacts and the hashes of its raw inputs.
std::string content_key(const std::string& stage, const nlohmann::json& config,
                        const std::map<std::string, std::string>& upstream,
                        const std::vector<std::string>& input_hashes = {});

/// Binary container for one pipeline stage.
///
/// Layout: magic "XREFART\0", u32 format version, u64 header length, the JSON
/// header, the raw little-endian array payloads in header order, and finally
/// a SHA-256 of all preceding bytes.
class Artifact {
public:
    static constexpr std::uint32_t kVersion = 1;

    Artifact() = default;
    explicit Artifact(std::string kind) : kind(std::move(kind)) {}

    std::string kind;
    std::string key;
    std::map<std::string, std::string> upstream;  // stage -> content key, transitively
    nlohmann::json meta = nlohmann::json::object();

    template <typename T>
    void put(const std::string& name, std::span<const T> values, std::vector<std::uint64_t> shape = {});
    template <typename T>
    void put(const std::string& name, const std::vector<T>& values, std::vector<std::uint64_t> shape = {}) {
        put(name, std::span<const T>(values), std::move(shape));
    }
    void put_strings(const std::string& name, const std::vector<std::string>& values);

    template <typename T>
    std::vector<T> get(const std::string& name) const;
    std::vector<std::string> get_strings(const std::string& name) const;
    std::vector<std::uint64_t> shape(const std::string& name) const;
    bool has(const std::string& name) const { return arrays_.contains(name); }

    /// Writes to a sibling temp file and renames it into place.
    void save(const std::string& path) const;
    /// Reads and verifies a container; `expected_kind` is checked when set.
    static Artifact load(const std::string& path, const std::string& expected_kind = {});
    /// The content key from the header, without reading the payload. Empty
    /// when the file is missing or not an artifact.
    static std::string peek_key(const std::string& path);

private:
    struct Array {
        std::string dtype;
        std::vector<std::uint64_t> shape;
        std::vector<std::uint8_t> bytes;
    };
    const Array& array(const std::string& name, const char* dtype) const;
    std::map<std::string, Array> arrays_;
    std::vector<std::string> order_;
};

/// Ingest output: passages with their token lists, the vocabulary and the
/// document-term counts.
struct CorpusBundle {
    Corpus corpus;
    Vocabulary vocab;
    DocTermCounts counts;
};

Artifact pack_corpus(const CorpusBundle& bundle);
CorpusBundle unpack_corpus(const Artifact& a);

/// Q is stored as its packed upper triangle; Qbar and p are rebuilt on load.
Artifact pack_cooccurrence(const CooccurrenceMatrix& cooc);
CooccurrenceMatrix unpack_cooccurrence(const Artifact& a);

Artifact pack_anchors(const AnchorSet& anchors);
AnchorSet unpack_anchors(const Artifact& a);

Artifact pack_topics(const TopicModel& model);
TopicModel unpack_topics(const Artifact& a);

Artifact pack_theta(const ThetaMatrix& theta);
ThetaMatrix unpack_theta(const Artifact& a);

}  // namespace xref
