#pragma once

#include "xref/annotation.hpp"

#include <memory>
#include <string>

namespace xref {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;            // 0 picks a free port
    std::string static_dir;     // served at / when set
    std::size_t max_batch = 200;
};

/// HTTP front end for an AnnotationStore.
///
///   GET  /api/batch?cursor=&limit=&annotator=
///   POST /api/vote       {"from","to","annotator","vote"}
///   GET  /api/progress
///   GET  /api/export?min_net=
class AnnotationServer {
public:
    AnnotationServer(AnnotationStore& store, ServiceConfig config);
    ~AnnotationServer();

    /// Binds the listening socket and returns the bound port.
    int bind();
    /// Serves until stop() is called. bind() must have succeeded.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace xref
