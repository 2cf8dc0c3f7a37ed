#include <httplib.h>

#include "mot/llm_client.hpp"

namespace mot {

namespace {

class HttplibTransport : public HttpTransport {
 public:
  HttpResult post(const std::string& url, const std::map<std::string, std::string>& headers,
                  const std::string& body, std::chrono::milliseconds timeout) override {
    HttpResult result;
    // Split "scheme://host[:port]/path".
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
      result.transport_error = "malformed url " + url;
      return result;
    }
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers hdrs;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        hdrs.emplace(k, v);
      }
    }
    auto res = client.Post(path, hdrs, body, content_type);
    if (!res) {
      result.transport_error = httplib::to_string(res.error());
      return result;
    }
    result.status = res->status;
    result.body = res->body;
    return result;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace mot
