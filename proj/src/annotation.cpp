#include "xref/annotation.hpp"

#include <json.hpp>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fcntl.h>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <unistd.h>

namespace xref {

namespace {

std::uint64_t pair_key(DocIndex a, DocIndex b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool ends_with_newline(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in || in.tellg() <= 0) return true;
    in.seekg(-1, std::ios::end);
    return in.get() == '\n';
}

}  // namespace

AnnotationStore::AnnotationStore(CandidateSet candidates, const Corpus& corpus, std::string log_path,
                                 double duplicate_jaccard)
    : candidates_(std::move(candidates)), corpus_(corpus), log_path_(std::move(log_path)) {
    if (candidates_.docs != corpus_.size()) {
        throw Error("candidate list covers " + std::to_string(candidates_.docs) + " passages but the corpus has " +
                    std::to_string(corpus_.size()));
    }
    duplicates_ = duplicate_pair_report(candidates_, corpus_, duplicate_jaccard);
    by_pair_.reserve(candidates_.pairs.size());
    for (std::size_t i = 0; i < candidates_.pairs.size(); ++i) {
        const auto& p = candidates_.pairs[i];
        by_pair_.emplace(pair_key(p.from, p.to), i);
    }
    votes_.resize(candidates_.pairs.size());
    net_.assign(candidates_.pairs.size(), 0);
    replay();
    fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open vote log " + log_path_ + ": " + std::strerror(errno));
}

AnnotationStore::~AnnotationStore() {
    if (fd_ >= 0) ::close(fd_);
}

void AnnotationStore::replay() {
    std::ifstream in(log_path_);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    std::uintmax_t offset = 0;
    bool torn = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::uintmax_t start = offset;
        offset += line.size() + (in.eof() ? 0 : 1);
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            // A torn final line was never acknowledged; anything earlier is corruption.
            if (in.peek() == std::char_traits<char>::eof()) {
                offset = start;
                torn = true;
                break;
            }
            throw ParseError(lineno, "vote log " + log_path_ + " is not valid JSON");
        }
        try {
            const auto from = corpus_.position(PassageId::parse(rec.at("from").get<std::string>()));
            const auto to = corpus_.position(PassageId::parse(rec.at("to").get<std::string>()));
            if (!from || !to) throw Error("unknown passage");
            const auto idx = find(*from, *to);
            if (idx == size()) throw Error("pair is not in the candidate list");
            apply(idx, rec.at("annotator").get<std::string>(), rec.at("vote").get<int>(),
                  rec.value("ts", std::string{}));
            ++replayed_;
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(lineno, "vote log " + log_path_ + ": " + e.what());
        }
    }
    in.close();
    // Drop a torn tail and terminate the last record so appends start on a
    // fresh line.
    if (torn) std::filesystem::resize_file(log_path_, offset);
    if (offset > 0 && !ends_with_newline(log_path_)) {
        std::ofstream(log_path_, std::ios::app) << '\n';
    }
}

std::size_t AnnotationStore::find(DocIndex from, DocIndex to) const {
    const auto it = by_pair_.find(pair_key(from, to));
    return it == by_pair_.end() ? size() : it->second;
}

int AnnotationStore::apply(std::size_t index, const std::string& annotator, int vote, const std::string& ts) {
    if (vote != 1 && vote != -1) throw Error("vote must be +1 or -1");
    auto& slot = votes_[index];
    const auto it = slot.find(annotator);
    if (it != slot.end()) {
        net_[index] -= it->second.first;
        it->second = {vote, ts};
    } else {
        slot.emplace(annotator, std::make_pair(vote, ts));
        voted_by_[annotator].insert(index);
    }
    net_[index] += vote;
    return net_[index];
}

void AnnotationStore::append(const std::string& line) {
    std::string buf = line + '\n';
    const char* p = buf.data();
    std::size_t left = buf.size();
    while (left > 0) {
        const auto n = ::write(fd_, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error("vote log write failed: " + std::string(std::strerror(errno)));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error("vote log fsync failed: " + std::string(std::strerror(errno)));
}

int AnnotationStore::record_vote(const PassageId& from, const PassageId& to, const std::string& annotator,
                                 int vote) {
    if (vote != 1 && vote != -1) throw Error("vote must be +1 or -1");
    if (annotator.empty()) throw Error("annotator is required");
    const auto a = corpus_.resolve(from);
    const auto b = corpus_.resolve(to);
    const auto idx = (a && b) ? find(*a, *b) : size();
    if (idx == size()) throw std::out_of_range("pair " + from.str() + " -> " + to.str() + " is not a candidate");

    std::unique_lock lock(mutex_);
    const auto& slot = votes_[idx];
    if (const auto it = slot.find(annotator); it != slot.end() && it->second.first == vote) return net_[idx];
    const auto ts = utc_now();
    nlohmann::json rec{{"from", corpus_[*a].id.str()}, {"to", corpus_[*b].id.str()}, {"annotator", annotator}, {"vote", vote}, {"ts", ts}};
    append(rec.dump());
    return apply(idx, annotator, vote, ts);
}

Batch AnnotationStore::next_batch(std::size_t cursor, std::size_t limit, const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    Batch batch;
    const auto voted = voted_by_.find(annotator);
    std::size_t i = std::min(cursor, size());
    for (; i < size() && batch.items.size() < limit; ++i) {
        if (voted != voted_by_.end() && voted->second.contains(i)) continue;
        batch.items.push_back(BatchItem{i, candidates_.pairs[i], duplicates_[i].flagged, duplicates_[i].jaccard});
    }
    // Skip past already-voted entries so the terminal cursor is reported promptly.
    while (i < size() && voted != voted_by_.end() && voted->second.contains(i)) ++i;
    batch.cursor = i;
    batch.done = i >= size();
    return batch;
}

std::vector<std::pair<DocIndex, DocIndex>> AnnotationStore::export_curated(int min_net) const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<DocIndex, DocIndex>> out;
    for (std::size_t i = 0; i < size(); ++i) {
        if (!votes_[i].empty() && net_[i] >= min_net) out.emplace_back(candidates_.pairs[i].from, candidates_.pairs[i].to);
    }
    return out;
}

AnnotationRecord AnnotationStore::record(std::size_t index) const {
    std::shared_lock lock(mutex_);
    if (index >= size()) throw std::out_of_range("candidate index out of range");
    AnnotationRecord r;
    r.candidate = candidates_.pairs[index];
    r.net = net_[index];
    for (const auto& [who, v] : votes_[index]) r.votes.push_back(Vote{who, v.first, v.second});
    return r;
}

Progress AnnotationStore::progress() const {
    std::shared_lock lock(mutex_);
    Progress p;
    p.candidates = size();
    for (const auto& slot : votes_) {
        if (!slot.empty()) ++p.voted_candidates;
        p.votes += slot.size();
    }
    p.annotators = voted_by_.size();
    return p;
}

}  // namespace xref
