#pragma once

// HTTP transport for the annotation API.

#include <map>
#include <string>

#include "bws/service.hpp"
#include "httplib.h"

namespace bws {

inline void bind_routes(httplib::Server& server, Api& api) {
  auto dispatch = [&api](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const auto out = api.handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(R"(/api/v1/.*)", dispatch);
  server.Post(R"(/api/v1/.*)", dispatch);
}

}  // namespace bws
