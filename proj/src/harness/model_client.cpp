#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "ecgbench/core/errors.hpp"
#include "ecgbench/harness/harness.hpp"

namespace ecgbench {

namespace {

std::string env_or(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

void apply_endpoint_env(ModelEndpoint& e) {
  if (e.base_url.empty()) e.base_url = env_or("ECGBENCH_BASE_URL");
  if (e.model.empty()) e.model = env_or("ECGBENCH_MODEL");
  if (e.auth_value.empty()) {
    const auto key = env_or("ECGBENCH_API_KEY");
    if (!key.empty()) e.auth_value = "Bearer " + key;
  }
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string chat_request_body(const ModelEndpoint& endpoint, const std::vector<Message>& messages) {
  nlohmann::ordered_json body;
  body["model"] = endpoint.model;
  body["temperature"] = 0;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    nlohmann::ordered_json jm;
    jm["role"] = m.role;
    if (m.image_png_base64.empty()) {
      jm["content"] = m.content;
    } else {
      jm["content"] = nlohmann::ordered_json::array(
          {{{"type", "text"}, {"text", m.content}},
           {{"type", "image_url"},
            {"image_url", {{"url", "data:image/png;base64," + m.image_png_base64}}}}});
    }
    msgs.push_back(std::move(jm));
  }
  body["messages"] = std::move(msgs);
  return body.dump();
}

std::string parse_chat_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // content parts
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
    }
    return text;
  } catch (const nlohmann::json::exception& e) {
    throw EndpointError(std::string("malformed completion: ") + e.what());
  }
}

void RateLimiter::acquire() {
  if (interval_ <= 0.0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(interval_));
  }
  std::this_thread::sleep_until(slot);
}

HttpChatModel::HttpChatModel(ModelEndpoint endpoint)
    : endpoint_(std::move(endpoint)), limiter_(endpoint_.min_interval_s) {
  if (endpoint_.base_url.empty()) throw ConfigError("model endpoint has no base URL");
}

std::string HttpChatModel::describe() const { return endpoint_.model.empty() ? endpoint_.base_url : endpoint_.model; }

std::string HttpChatModel::reply(const ChatRequest& request) {
  const std::string body = chat_request_body(endpoint_, *request.messages);
  httplib::Headers headers;
  if (!endpoint_.auth_value.empty()) headers.emplace(endpoint_.auth_header, endpoint_.auth_value);
  const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::duration<double>(endpoint_.timeout_s));

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(500) * (1 << (attempt - 1)));
    }
    limiter_.acquire();
    httplib::Client cli(endpoint_.base_url);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    auto res = cli.Post(endpoint_.path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    return parse_chat_response(res->body);
  }
  throw EndpointError("no reply from " + endpoint_.base_url + " after " +
                      std::to_string(endpoint_.max_retries + 1) + " attempts: " + last_error);
}

}  // namespace ecgbench
