#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amg/classifier.hpp"

namespace amg {

inline constexpr std::string_view kDefaultVlmModel = "gpt-4o-mini";

inline constexpr std::string_view kDefaultCrowdPrompt =
    "You are an expert on robot drivability. The given image was taken by a camera placed in "
    "front of the robot. Analyze if there are any crowds in this image that would be an obstacle "
    "to the robot's traveling. If a crowd is determined to be present, return \"crowd\"; "
    "otherwise, return \"free\".";

inline constexpr const char* kVlmEndpointEnv = "AMG_VLM_ENDPOINT";
inline constexpr const char* kVlmApiKeyEnv = "AMG_VLM_API_KEY";

struct VlmClientConfig {
  // Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions.
  // A bare scheme://host[:port] gets /v1/chat/completions appended.
  std::string endpoint_url;
  std::string model = std::string(kDefaultVlmModel);
  std::string api_key;
  std::string prompt = std::string(kDefaultCrowdPrompt);
  double timeout_s = 30.0;
  int max_retries = 2;
  double backoff_base_s = 1.0;
  double backoff_factor = 2.0;
};

// Endpoint and key from AMG_VLM_ENDPOINT / AMG_VLM_API_KEY.
VlmClientConfig vlm_config_from_env();

// Trims and lowercases; accepts exactly "crowd" or "free", otherwise
// throws MalformedResponse.
AbstractLabel parse_vlm_answer(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::string image_mime_type(const std::filesystem::path& path);

// JSON body for one chat-completions request: a single user message with
// the prompt text and the image as a base64 data URL.
std::string build_chat_request(const VlmClientConfig& config, std::span<const std::uint8_t> image,
                               std::string_view mime);
// choices[0].message.content; MalformedResponse if absent.
std::string extract_message_text(std::string_view response_body);

using ImageProvider = std::function<std::vector<std::uint8_t>(const Pose&, const ClassifyContext&)>;

// Frames named station_<NNNN>.<ext> in `directory`, indexed by station.
ImageProvider directory_image_provider(std::filesystem::path directory);

class VlmClassifier final : public AbstractionSource {
 public:
  explicit VlmClassifier(VlmClientConfig config, ImageProvider images = {});

  // One request per call; transport failures (connection errors, 408, 429,
  // 5xx) are retried with exponential backoff, nothing else is.
  AbstractLabel classify_image(std::span<const std::uint8_t> image,
                               std::string_view mime = "image/jpeg");

  AbstractLabel classify(const Pose& pose, const ClassifyContext& context) override;
  ObservationSource source() const noexcept override { return ObservationSource::vlm; }

  const VlmClientConfig& config() const noexcept { return config_; }
  std::string last_raw_response() const;
  int last_attempts() const;

 private:
  VlmClientConfig config_;
  ImageProvider images_;
  std::string scheme_host_port_;
  std::string path_;
  mutable std::mutex mutex_;
  std::string last_raw_response_;
  int last_attempts_ = 0;
};

}  // namespace amg
