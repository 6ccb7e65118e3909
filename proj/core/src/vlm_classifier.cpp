#include "amg/vlm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <regex>
#include <thread>

#include <openssl/evp.h>

#include <httplib.h>
#include <json.hpp>

#include "amg/error.hpp"
#include "amg/map_io.hpp"

namespace amg {
namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

void set_timeout(httplib::Client& client, double seconds) {
  const auto whole = static_cast<time_t>(seconds);
  const auto usec = static_cast<time_t>((seconds - static_cast<double>(whole)) * 1e6);
  client.set_connection_timeout(whole, usec);
  client.set_read_timeout(whole, usec);
  client.set_write_timeout(whole, usec);
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

VlmClientConfig vlm_config_from_env() {
  VlmClientConfig config;
  config.endpoint_url = env_or_empty(kVlmEndpointEnv);
  config.api_key = env_or_empty(kVlmApiKeyEnv);
  return config;
}

AbstractLabel parse_vlm_answer(std::string_view text) {
  const auto b = text.find_first_not_of(" \t\r\n\v\f");
  std::string norm;
  if (b != std::string_view::npos) {
    const auto e = text.find_last_not_of(" \t\r\n\v\f");
    norm.assign(text.substr(b, e - b + 1));
  }
  std::transform(norm.begin(), norm.end(), norm.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (const auto label = parse_label(norm)) return *label;
  std::string shown(text.substr(0, 80));
  throw Error(ErrorCode::MalformedResponse, "expected 'crowd' or 'free', got '" + shown + "'");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string image_mime_type(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/jpeg";
}

std::string build_chat_request(const VlmClientConfig& config, std::span<const std::uint8_t> image,
                               std::string_view mime) {
  nlohmann::json body = {
      {"model", config.model},
      {"messages",
       nlohmann::json::array(
           {{{"role", "user"},
             {"content",
              nlohmann::json::array(
                  {{{"type", "text"}, {"text", config.prompt}},
                   {{"type", "image_url"},
                    {"image_url",
                     {{"url", "data:" + std::string(mime) + ";base64," + base64_encode(image)}}}}})}}})},
  };
  return body.dump();
}

std::string extract_message_text(std::string_view response_body) {
  nlohmann::json j = nlohmann::json::parse(response_body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::MalformedResponse, "response is not JSON");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers return content parts.
    if (content.is_array()) {
      std::string text;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
      }
      return text;
    }
  } catch (const nlohmann::json::exception&) {
  }
  throw Error(ErrorCode::MalformedResponse, "no choices[0].message.content in response");
}

namespace {

std::string_view sniff_mime(std::span<const std::uint8_t> b) {
  const auto starts = [&](std::string_view magic, std::size_t at = 0) {
    return b.size() >= at + magic.size() &&
           std::equal(magic.begin(), magic.end(), b.begin() + static_cast<std::ptrdiff_t>(at),
                      [](char m, std::uint8_t v) { return static_cast<std::uint8_t>(m) == v; });
  };
  if (starts("\x89PNG")) return "image/png";
  if (starts("RIFF") && starts("WEBP", 8)) return "image/webp";
  return "image/jpeg";
}

}  // namespace

ImageProvider directory_image_provider(std::filesystem::path directory) {
  return [dir = std::move(directory)](const Pose&, const ClassifyContext& ctx) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "station_%04zu", ctx.station);
    for (const char* ext : {".jpg", ".jpeg", ".png", ".webp"}) {
      const auto p = dir / (std::string(stem) + ext);
      if (std::filesystem::exists(p)) return read_file_bytes(p);
    }
    throw Error(ErrorCode::IoError, "no image " + std::string(stem) + ".* in " + dir.string());
  };
}

VlmClassifier::VlmClassifier(VlmClientConfig config, ImageProvider images)
    : config_(std::move(config)), images_(std::move(images)) {
  if (config_.prompt.empty()) throw Error(ErrorCode::ConfigError, "VLM prompt is empty");
  if (config_.model.empty()) throw Error(ErrorCode::ConfigError, "VLM model name is empty");
  if (config_.max_retries < 0 || !(config_.timeout_s > 0.0) || config_.backoff_base_s < 0.0 ||
      config_.backoff_factor < 1.0) {
    throw Error(ErrorCode::ConfigError, "invalid VLM timeout/retry settings");
  }
  static const std::regex url_re(R"(^(https?://[^/\s]+)(/\S*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint_url, m, url_re)) {
    throw Error(ErrorCode::ConfigError, "VLM endpoint must be an http(s) URL (set " +
                                            std::string(kVlmEndpointEnv) + ")");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched && m[2].length() > 1 ? m[2].str() : "/v1/chat/completions";
}

std::string VlmClassifier::last_raw_response() const {
  std::lock_guard lock(mutex_);
  return last_raw_response_;
}

int VlmClassifier::last_attempts() const {
  std::lock_guard lock(mutex_);
  return last_attempts_;
}

AbstractLabel VlmClassifier::classify_image(std::span<const std::uint8_t> image,
                                            std::string_view mime) {
  if (image.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
  const std::string body = build_chat_request(config_, image, mime);

  httplib::Client client(scheme_host_port_);
  set_timeout(client, config_.timeout_s);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string failure;
  const int attempts = config_.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      const double delay =
          config_.backoff_base_s * std::pow(config_.backoff_factor, attempt - 2);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    auto res = client.Post(path_, headers, body, "application/json");
    {
      std::lock_guard lock(mutex_);
      last_attempts_ = attempt;
      last_raw_response_ = res ? res->body : std::string();
    }
    if (!res) {
      failure = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::AuthError, "endpoint rejected credentials (HTTP " +
                                            std::to_string(res->status) + ")");
    }
    if (res->status < 200 || res->status >= 300) {
      failure = "HTTP " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw Error(ErrorCode::TransportError, failure);
    }
    return parse_vlm_answer(extract_message_text(res->body));
  }
  throw Error(ErrorCode::TransportError,
              failure + " after " + std::to_string(attempts) + " attempt(s)");
}

AbstractLabel VlmClassifier::classify(const Pose& pose, const ClassifyContext& context) {
  if (!images_) throw Error(ErrorCode::ConfigError, "VLM classifier has no image source");
  const auto image = images_(pose, context);
  return classify_image(image, sniff_mime(image));
}

}  // namespace amg
