#pragma once

#include <string>

#include <httplib.h>

#include "dca/service/api.hpp"

namespace dca::service {

// Binds an Api to an httplib server. Every request goes through Api::handle,
// so the HTTP transport adds nothing but framing.
inline void mount(httplib::Server& server, Api& api) {
  auto forward = [&api](const httplib::Request& req, httplib::Response& res) {
    std::string target = req.path;
    if (!req.params.empty()) {
      std::string q;
      for (const auto& [k, v] : req.params) {
        q += q.empty() ? "?" : "&";
        q += httplib::detail::encode_query_param(k) + "=" + httplib::detail::encode_query_param(v);
      }
      target += q;
    }
    auto r = api.handle(Request{req.method, target, req.body});
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  const char* any = R"(/api/.*)";
  server.Get(any, forward);
  server.Post(any, forward);
  server.Put(any, forward);
  server.Patch(any, forward);
  server.Delete(any, forward);
}

}  // namespace dca::service
