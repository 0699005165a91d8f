#include "xref/service.hpp"

#include "xref/evaluation.hpp"

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <sstream>

namespace xref {

namespace {

using nlohmann::json;

void send_error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", message}}.dump(), "application/json");
}

template <typename T>
bool query_number(const httplib::Request& req, const char* name, T& out) {
    if (!req.has_param(name)) return true;
    const auto v = req.get_param_value(name);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    return !v.empty() && ec == std::errc{} && ptr == v.data() + v.size();
}

}  // namespace

struct AnnotationServer::Impl {
    AnnotationStore& store;
    ServiceConfig config;
    httplib::Server server;
    bool bound = false;

    Impl(AnnotationStore& s, ServiceConfig c) : store(s), config(std::move(c)) { routes(); }

    void routes() {
        server.Get("/api/batch", [this](const httplib::Request& req, httplib::Response& res) {
            std::size_t cursor = 0;
            std::size_t limit = 20;
            if (!query_number(req, "cursor", cursor) || !query_number(req, "limit", limit)) {
                return send_error(res, 400, "cursor and limit must be non-negative integers");
            }
            if (limit == 0 || limit > config.max_batch) {
                return send_error(res, 400, "limit must be between 1 and " + std::to_string(config.max_batch));
            }
            const auto annotator = req.get_param_value("annotator");
            const auto batch = store.next_batch(cursor, limit, annotator);
            const auto& corpus = store.corpus();
            json items = json::array();
            for (const auto& item : batch.items) {
                const auto& from = corpus[item.candidate.from];
                const auto& to = corpus[item.candidate.to];
                items.push_back(json{{"index", item.index},
                                     {"rank", item.candidate.rank},
                                     {"from", from.id.str()},
                                     {"to", to.id.str()},
                                     {"from_text", from.raw_text},
                                     {"to_text", to.raw_text},
                                     {"score", item.candidate.score},
                                     {"duplicate", item.duplicate},
                                     {"jaccard", item.jaccard}});
            }
            json body{{"items", std::move(items)},
                      {"cursor", batch.cursor},
                      {"done", batch.done},
                      {"total", store.size()},
                      {"method", to_string(store.candidates().method)}};
            res.set_content(body.dump(), "application/json");
        });

        server.Post("/api/vote", [this](const httplib::Request& req, httplib::Response& res) {
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception&) {
                return send_error(res, 400, "request body is not valid JSON");
            }
            std::string from, to, annotator;
            int vote = 0;
            try {
                from = body.at("from").get<std::string>();
                to = body.at("to").get<std::string>();
                annotator = body.at("annotator").get<std::string>();
                vote = body.at("vote").get<int>();
            } catch (const json::exception&) {
                return send_error(res, 400, "expected fields from, to, annotator and vote");
            }
            try {
                const int net = store.record_vote(PassageId::parse(from), PassageId::parse(to), annotator, vote);
                res.set_content(json{{"from", from}, {"to", to}, {"net", net}}.dump(), "application/json");
            } catch (const std::out_of_range& e) {
                send_error(res, 404, e.what());
            } catch (const Error& e) {
                send_error(res, 400, e.what());
            }
        });

        server.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
            const auto p = store.progress();
            json body{{"candidates", p.candidates},
                      {"voted_candidates", p.voted_candidates},
                      {"votes", p.votes},
                      {"annotators", p.annotators}};
            res.set_content(body.dump(), "application/json");
        });

        server.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
            int min_net = 1;
            if (!query_number(req, "min_net", min_net)) return send_error(res, 400, "min_net must be an integer");
            std::ostringstream out;
            write_pairs_tsv(out, store.export_curated(min_net), store.corpus());
            res.set_content(out.str(), "text/tab-separated-values");
        });

        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            } catch (...) {
                send_error(res, 500, "internal error");
            }
        });

        if (!config.static_dir.empty() && !server.set_mount_point("/", config.static_dir)) {
            throw Error("static directory " + config.static_dir + " does not exist");
        }
    }
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServiceConfig config)
    : impl_(std::make_unique<Impl>(store, std::move(config))) {}

AnnotationServer::~AnnotationServer() = default;

int AnnotationServer::bind() {
    int port = impl_->config.port;
    if (port == 0) {
        port = impl_->server.bind_to_any_port(impl_->config.host);
        if (port < 0) throw Error("cannot bind " + impl_->config.host);
    } else if (!impl_->server.bind_to_port(impl_->config.host, port)) {
        throw Error("cannot bind " + impl_->config.host + ":" + std::to_string(port));
    }
    impl_->bound = true;
    return port;
}

void AnnotationServer::run() {
    if (!impl_->bound) throw Error("server is not bound");
    impl_->server.listen_after_bind();
}

void AnnotationServer::stop() { impl_->server.stop(); }

}  // namespace xref
