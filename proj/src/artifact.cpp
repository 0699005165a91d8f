#include "xref/artifact.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

namespace xref {

static_assert(std::endian::native == std::endian::little, "artifacts are stored little-endian");

namespace {

constexpr char kMagic[8] = {'X', 'R', 'E', 'F', 'A', 'R', 'T', '\0'};
constexpr std::size_t kDigestSize = 32;

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
    }
    void update(const void* data, std::size_t n) {
        if (n > 0 && EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("sha256 update failed");
    }
    std::array<unsigned char, kDigestSize> digest() {
        std::array<unsigned char, kDigestSize> out{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1 || len != kDigestSize) {
            throw Error("sha256 final failed");
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string hex(std::span<const unsigned char> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 15]);
    }
    return out;
}

template <typename T>
constexpr const char* dtype_of() {
    if constexpr (std::is_same_v<T, double>) return "f64";
    else if constexpr (std::is_same_v<T, std::uint64_t>) return "u64";
    else if constexpr (std::is_same_v<T, std::uint32_t>) return "u32";
    else if constexpr (std::is_same_v<T, std::int32_t>) return "i32";
    else if constexpr (std::is_same_v<T, std::uint8_t>) return "u8";
    else if constexpr (std::is_same_v<T, char>) return "u8";
    else static_assert(sizeof(T) == 0, "unsupported artifact dtype");
}

std::size_t dtype_size(const std::string& dtype) {
    if (dtype == "f64" || dtype == "u64") return 8;
    if (dtype == "u32" || dtype == "i32") return 4;
    if (dtype == "u8") return 1;
    throw Error("unknown artifact dtype '" + dtype + "'");
}

struct Header {
    std::uint32_t version = 0;
    nlohmann::json json;
    std::uint64_t payload_offset = 0;
};

Header read_header(std::istream& in, const std::string& path) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error(path + " is not an xref artifact");
    Header h;
    std::uint64_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&h.version), 4) || !in.read(reinterpret_cast<char*>(&len), 8)) {
        throw Error(path + ": truncated artifact header");
    }
    if (h.version != Artifact::kVersion) {
        throw Error(path + ": artifact format version " + std::to_string(h.version) + " is not supported");
    }
    if (len > (std::uint64_t{1} << 32)) throw Error(path + ": implausible artifact header length");
    std::string text(len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw Error(path + ": truncated artifact header");
    try {
        h.json = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
        throw Error(path + ": artifact header is not valid JSON");
    }
    h.payload_offset = 8 + 4 + 8 + len;
    return h;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    const auto d = h.digest();
    return hex(d);
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    Sha256 h;
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    const auto d = h.digest();
    return hex(d);
}

std::string content_key(const std::string& stage, const nlohmann::json& config,
                        const std::map<std::string, std::string>& upstream,
                        const std::vector<std::string>& input_hashes) {
    nlohmann::json doc{{"stage", stage},
                       {"config", config},
                       {"upstream", upstream},
                       {"inputs", input_hashes},
                       {"format", Artifact::kVersion}};
    return sha256_hex(doc.dump());
}

template <typename T>
void Artifact::put(const std::string& name, std::span<const T> values, std::vector<std::uint64_t> shape) {
    if (shape.empty()) shape.push_back(values.size());
    std::uint64_t n = 1;
    for (auto s : shape) n *= s;
    if (n != values.size()) throw Error("array '" + name + "' does not match its shape");
    Array a;
    a.dtype = dtype_of<T>();
    a.shape = std::move(shape);
    a.bytes.resize(values.size_bytes());
    if (!values.empty()) std::memcpy(a.bytes.data(), values.data(), values.size_bytes());
    if (!arrays_.contains(name)) order_.push_back(name);
    arrays_[name] = std::move(a);
}

const Artifact::Array& Artifact::array(const std::string& name, const char* dtype) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw Error(kind + " artifact has no array '" + name + "'");
    if (it->second.dtype != dtype) {
        throw Error(kind + " artifact array '" + name + "' has dtype " + it->second.dtype + ", expected " + dtype);
    }
    return it->second;
}

template <typename T>
std::vector<T> Artifact::get(const std::string& name) const {
    const auto& a = array(name, dtype_of<T>());
    std::vector<T> out(a.bytes.size() / sizeof(T));
    if (!out.empty()) std::memcpy(out.data(), a.bytes.data(), a.bytes.size());
    return out;
}

#define XREF_INSTANTIATE(T)                                                                             \
    template void Artifact::put<T>(const std::string&, std::span<const T>, std::vector<std::uint64_t>); \
    template std::vector<T> Artifact::get<T>(const std::string&) const;
XREF_INSTANTIATE(double)
XREF_INSTANTIATE(std::uint64_t)
XREF_INSTANTIATE(std::uint32_t)
XREF_INSTANTIATE(std::int32_t)
XREF_INSTANTIATE(std::uint8_t)
XREF_INSTANTIATE(char)
#undef XREF_INSTANTIATE

void Artifact::put_strings(const std::string& name, const std::vector<std::string>& values) {
    std::vector<std::uint64_t> offsets{0};
    std::vector<char> bytes;
    for (const auto& s : values) {
        bytes.insert(bytes.end(), s.begin(), s.end());
        offsets.push_back(bytes.size());
    }
    put(name + ".offsets", offsets);
    put(name + ".bytes", bytes);
}

std::vector<std::string> Artifact::get_strings(const std::string& name) const {
    const auto offsets = get<std::uint64_t>(name + ".offsets");
    const auto bytes = get<char>(name + ".bytes");
    if (offsets.empty() || offsets.back() != bytes.size()) throw Error("string table '" + name + "' is corrupt");
    std::vector<std::string> out;
    out.reserve(offsets.size() - 1);
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
        if (offsets[i] > offsets[i + 1]) throw Error("string table '" + name + "' is corrupt");
        out.emplace_back(bytes.data() + offsets[i], bytes.data() + offsets[i + 1]);
    }
    return out;
}

std::vector<std::uint64_t> Artifact::shape(const std::string& name) const {
    const auto it = arrays_.find(name);
    if (it == arrays_.end()) throw Error(kind + " artifact has no array '" + name + "'");
    return it->second.shape;
}

void Artifact::save(const std::string& path) const {
    nlohmann::json arrays = nlohmann::json::array();
    for (const auto& name : order_) {
        const auto& a = arrays_.at(name);
        arrays.push_back({{"name", name}, {"dtype", a.dtype}, {"shape", a.shape}, {"bytes", a.bytes.size()}});
    }
    const nlohmann::json header{{"kind", kind}, {"key", key}, {"upstream", upstream}, {"meta", meta}, {"arrays", arrays}};
    const std::string text = header.dump();
    const std::uint64_t len = text.size();

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        Sha256 h;
        auto emit = [&](const void* data, std::size_t n) {
            out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
            h.update(data, n);
        };
        emit(kMagic, 8);
        emit(&kVersion, 4);
        emit(&len, 8);
        emit(text.data(), text.size());
        for (const auto& name : order_) {
            const auto& bytes = arrays_.at(name).bytes;
            emit(bytes.data(), bytes.size());
        }
        const auto digest = h.digest();
        out.write(reinterpret_cast<const char*>(digest.data()), digest.size());
        out.flush();
        if (!out) {
            out.close();
            std::remove(tmp.c_str());
            throw Error("failed writing " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        throw Error("cannot move " + tmp + " to " + path + ": " + ec.message());
    }
}

Artifact Artifact::load(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open artifact " + path);
    const auto header = read_header(in, path);

    Artifact a;
    try {
        a.kind = header.json.at("kind").get<std::string>();
        a.key = header.json.at("key").get<std::string>();
        a.upstream = header.json.at("upstream").get<std::map<std::string, std::string>>();
        a.meta = header.json.at("meta");
    } catch (const nlohmann::json::exception&) {
        throw Error(path + ": artifact header is missing fields");
    }
    if (!expected_kind.empty() && a.kind != expected_kind) {
        throw Error(path + " holds a " + a.kind + " artifact, expected " + expected_kind);
    }

    // Re-hash the header bytes exactly as read, then each payload as it arrives.
    Sha256 h;
    {
        std::ifstream again(path, std::ios::binary);
        std::vector<char> head(header.payload_offset);
        again.read(head.data(), static_cast<std::streamsize>(head.size()));
        h.update(head.data(), head.size());
    }
    for (const auto& d : header.json.at("arrays")) {
        Array arr;
        const auto name = d.at("name").get<std::string>();
        arr.dtype = d.at("dtype").get<std::string>();
        arr.shape = d.at("shape").get<std::vector<std::uint64_t>>();
        const auto bytes = d.at("bytes").get<std::uint64_t>();
        std::uint64_t n = 1;
        for (auto s : arr.shape) n *= s;
        if (n * dtype_size(arr.dtype) != bytes) throw Error(path + ": array '" + name + "' size mismatch");
        arr.bytes.resize(bytes);
        if (!in.read(reinterpret_cast<char*>(arr.bytes.data()), static_cast<std::streamsize>(bytes))) {
            throw Error(path + ": truncated artifact payload");
        }
        h.update(arr.bytes.data(), arr.bytes.size());
        a.order_.push_back(name);
        a.arrays_[name] = std::move(arr);
    }
    std::array<unsigned char, kDigestSize> stored{};
    if (!in.read(reinterpret_cast<char*>(stored.data()), stored.size())) throw Error(path + ": missing checksum");
    if (in.peek() != std::char_traits<char>::eof()) throw Error(path + ": trailing bytes after checksum");
    if (h.digest() != stored) throw Error(path + ": checksum mismatch, artifact is corrupt");
    return a;
}

std::string Artifact::peek_key(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    try {
        return read_header(in, path).json.at("key").get<std::string>();
    } catch (const std::exception&) {
        return {};
    }
}

// ---- stage payloads ------------------------------------------------------

namespace {

std::vector<double> flatten(const RowMatrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

RowMatrix matrix(const Artifact& a, const std::string& name) {
    const auto shape = a.shape(name);
    if (shape.size() != 2) throw Error("array '" + name + "' is not a matrix");
    const auto data = a.get<double>(name);
    RowMatrix m(static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
    if (!data.empty()) std::memcpy(m.data(), data.data(), data.size() * sizeof(double));
    return m;
}

void put_matrix(Artifact& a, const std::string& name, const RowMatrix& m) {
    a.put(name, flatten(m), {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())});
}

std::vector<std::uint8_t> bytes_of(const std::vector<char>& v) {
    return std::vector<std::uint8_t>(v.begin(), v.end());
}

std::vector<char> chars_of(const std::vector<std::uint8_t>& v) {
    return std::vector<char>(v.begin(), v.end());
}

void put_anchor_arrays(Artifact& a, const std::string& prefix, const AnchorSet& s) {
    put_matrix(a, prefix + "vectors", s.vectors);
    a.put(prefix + "residual_norms", s.residual_norms);
    std::vector<std::int32_t> kind;
    std::vector<std::uint32_t> source;
    std::vector<std::uint64_t> word_ptr{0};
    std::vector<WordIndex> words;
    for (const auto& p : s.provenance) {
        kind.push_back(p.word ? 0 : (p.passage ? 1 : -1));
        source.push_back(p.word ? *p.word : (p.passage ? *p.passage : 0));
        words.insert(words.end(), p.words.begin(), p.words.end());
        word_ptr.push_back(words.size());
    }
    a.put(prefix + "provenance.kind", kind);
    a.put(prefix + "provenance.source", source);
    a.put(prefix + "provenance.word_ptr", word_ptr);
    a.put(prefix + "provenance.words", words);
    a.meta[prefix + "method"] = to_string(s.method);
    a.meta[prefix + "candidate_min_df"] = s.candidate_min_df;
}

AnchorSet get_anchor_arrays(const Artifact& a, const std::string& prefix) {
    AnchorSet s;
    const auto method = a.meta.at(prefix + "method").get<std::string>();
    if (method == "gram-schmidt") s.method = AnchorMethod::gram_schmidt;
    else if (method == "tandem") s.method = AnchorMethod::tandem;
    else throw Error("unknown anchor method '" + method + "' in artifact");
    s.candidate_min_df = a.meta.at(prefix + "candidate_min_df").get<std::uint32_t>();
    s.vectors = matrix(a, prefix + "vectors");
    s.residual_norms = a.get<double>(prefix + "residual_norms");
    const auto kind = a.get<std::int32_t>(prefix + "provenance.kind");
    const auto source = a.get<std::uint32_t>(prefix + "provenance.source");
    const auto word_ptr = a.get<std::uint64_t>(prefix + "provenance.word_ptr");
    const auto words = a.get<WordIndex>(prefix + "provenance.words");
    if (kind.size() != source.size() || word_ptr.size() != kind.size() + 1 || word_ptr.back() != words.size()) {
        throw Error("anchor provenance arrays are inconsistent");
    }
    for (std::size_t i = 0; i < kind.size(); ++i) {
        AnchorProvenance p;
        if (kind[i] == 0) p.word = source[i];
        if (kind[i] == 1) p.passage = source[i];
        p.words.assign(words.begin() + static_cast<std::ptrdiff_t>(word_ptr[i]),
                       words.begin() + static_cast<std::ptrdiff_t>(word_ptr[i + 1]));
        s.provenance.push_back(std::move(p));
    }
    return s;
}

}  // namespace

Artifact pack_corpus(const CorpusBundle& b) {
    Artifact a("corpus");
    std::vector<std::string> ids, texts;
    std::vector<std::uint64_t> token_ptr{0};
    std::vector<WordIndex> tokens;
    for (const auto& p : b.corpus.passages()) {
        ids.push_back(p.id.str());
        texts.push_back(p.raw_text);
        tokens.insert(tokens.end(), p.tokens.begin(), p.tokens.end());
        token_ptr.push_back(tokens.size());
    }
    a.put_strings("passage.id", ids);
    a.put_strings("passage.text", texts);
    a.put("passage.token_ptr", token_ptr);
    a.put("passage.tokens", tokens);
    a.put_strings("vocab.terms", b.vocab.terms);
    a.put("vocab.doc_freq", b.vocab.doc_freq);
    a.put("vocab.corpus_freq", b.vocab.corpus_freq);
    a.put("counts.row_ptr", b.counts.row_ptr);
    a.put("counts.cols", b.counts.cols);
    a.put("counts.vals", b.counts.vals);
    a.put("counts.lengths", b.counts.lengths);
    a.meta["vocab_size"] = b.counts.vocab_size;
    return a;
}

CorpusBundle unpack_corpus(const Artifact& a) {
    CorpusBundle b;
    const auto ids = a.get_strings("passage.id");
    const auto texts = a.get_strings("passage.text");
    const auto token_ptr = a.get<std::uint64_t>("passage.token_ptr");
    const auto tokens = a.get<WordIndex>("passage.tokens");
    if (texts.size() != ids.size() || token_ptr.size() != ids.size() + 1 || token_ptr.back() != tokens.size()) {
        throw Error("corpus artifact passage arrays are inconsistent");
    }
    std::vector<Passage> passages;
    passages.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Passage p;
        p.id = PassageId::parse(ids[i]);
        p.raw_text = texts[i];
        p.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(token_ptr[i]),
                        tokens.begin() + static_cast<std::ptrdiff_t>(token_ptr[i + 1]));
        passages.push_back(std::move(p));
    }
    b.corpus = Corpus(std::move(passages));
    b.vocab.terms = a.get_strings("vocab.terms");
    b.vocab.doc_freq = a.get<std::uint32_t>("vocab.doc_freq");
    b.vocab.corpus_freq = a.get<std::uint64_t>("vocab.corpus_freq");
    for (std::size_t w = 0; w < b.vocab.terms.size(); ++w) b.vocab.index.emplace(b.vocab.terms[w], static_cast<WordIndex>(w));
    b.counts.vocab_size = a.meta.at("vocab_size").get<std::size_t>();
    b.counts.row_ptr = a.get<std::uint64_t>("counts.row_ptr");
    b.counts.cols = a.get<WordIndex>("counts.cols");
    b.counts.vals = a.get<std::uint32_t>("counts.vals");
    b.counts.lengths = a.get<std::uint32_t>("counts.lengths");
    if (b.counts.row_ptr.size() != b.counts.lengths.size() + 1 || b.counts.lengths.size() != ids.size() ||
        b.counts.vocab_size != b.vocab.size()) {
        throw Error("corpus artifact count arrays are inconsistent");
    }
    return b;
}

Artifact pack_cooccurrence(const CooccurrenceMatrix& c) {
    Artifact a("cooccurrence");
    const auto V = c.joint.rows();
    std::vector<double> upper;
    upper.reserve(static_cast<std::size_t>(V * (V + 1) / 2));
    for (Eigen::Index i = 0; i < V; ++i) {
        for (Eigen::Index j = i; j < V; ++j) upper.push_back(c.joint(i, j));
    }
    a.put("joint.upper", upper);
    a.meta["vocab_size"] = V;
    a.meta["documents_used"] = c.documents_used;
    return a;
}

CooccurrenceMatrix unpack_cooccurrence(const Artifact& a) {
    const auto V = a.meta.at("vocab_size").get<Eigen::Index>();
    const auto upper = a.get<double>("joint.upper");
    if (upper.size() != static_cast<std::size_t>(V * (V + 1) / 2)) throw Error("co-occurrence artifact is truncated");
    CooccurrenceMatrix c;
    c.joint.resize(V, V);
    std::size_t p = 0;
    for (Eigen::Index i = 0; i < V; ++i) {
        for (Eigen::Index j = i; j < V; ++j) {
            c.joint(i, j) = upper[p];
            c.joint(j, i) = upper[p];
            ++p;
        }
    }
    auto n = row_normalize(c.joint);
    c.conditional = std::move(n.conditional);
    c.marginal = std::move(n.marginal);
    c.excluded = std::move(n.excluded);
    c.documents_used = a.meta.at("documents_used").get<std::size_t>();
    return c;
}

Artifact pack_anchors(const AnchorSet& s) {
    Artifact a("anchors");
    put_anchor_arrays(a, "", s);
    return a;
}

AnchorSet unpack_anchors(const Artifact& a) { return get_anchor_arrays(a, ""); }

Artifact pack_topics(const TopicModel& m) {
    Artifact a("topics");
    put_matrix(a, "topic_word", m.topic_word);
    a.put("topic_weights", std::vector<double>(m.topic_weights.data(), m.topic_weights.data() + m.topic_weights.size()));
    put_matrix(a, "coefficients", m.coefficients);
    a.put("residuals", m.residuals);
    a.put("iterations", m.iterations);
    a.put("converged", bytes_of(m.converged));
    a.put("flagged", m.flagged);
    put_anchor_arrays(a, "anchor.", m.anchors);
    return a;
}

TopicModel unpack_topics(const Artifact& a) {
    TopicModel m;
    m.topic_word = matrix(a, "topic_word");
    const auto w = a.get<double>("topic_weights");
    m.topic_weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.coefficients = matrix(a, "coefficients");
    m.residuals = a.get<double>("residuals");
    m.iterations = a.get<std::int32_t>("iterations");
    m.converged = chars_of(a.get<std::uint8_t>("converged"));
    m.flagged = a.get<WordIndex>("flagged");
    m.anchors = get_anchor_arrays(a, "anchor.");
    if (m.topic_weights.size() != m.topic_word.cols() || m.coefficients.rows() != m.topic_word.rows()) {
        throw Error("topic artifact arrays are inconsistent");
    }
    return m;
}

Artifact pack_theta(const ThetaMatrix& t) {
    Artifact a("theta");
    put_matrix(a, "theta", t.theta);
    a.put("degenerate", bytes_of(t.degenerate));
    a.put("iterations", t.iterations);
    a.put("converged", bytes_of(t.converged));
    return a;
}

ThetaMatrix unpack_theta(const Artifact& a) {
    ThetaMatrix t;
    t.theta = matrix(a, "theta");
    t.degenerate = chars_of(a.get<std::uint8_t>("degenerate"));
    t.iterations = a.get<std::int32_t>("iterations");
    t.converged = chars_of(a.get<std::uint8_t>("converged"));
    if (t.degenerate.size() != static_cast<std::size_t>(t.theta.rows())) throw Error("theta artifact arrays are inconsistent");
    return t;
}

}  // namespace xref
