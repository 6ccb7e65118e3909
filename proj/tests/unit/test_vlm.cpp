#include "amg/vlm.hpp"

#include <cstdlib>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "amg/map_io.hpp"
#include "test_util.hpp"
#include "vlm_stub.hpp"

namespace amg {
namespace {

using testing::closed_port;
using testing::code_of;
using testing::VlmStub;

const std::vector<std::uint8_t> kImage = {0xff, 0xd8, 0xff, 0xe0, 'j', 'p', 'g'};

VlmClientConfig stub_config(const std::string& url) {
  VlmClientConfig c;
  c.endpoint_url = url;
  c.api_key = "test-key";
  c.timeout_s = 5.0;
  c.backoff_base_s = 0.01;
  return c;
}

TEST(VlmParse, AcceptsExactTokensAfterNormalisation) {
  EXPECT_EQ(parse_vlm_answer("crowd"), AbstractLabel::crowd);
  EXPECT_EQ(parse_vlm_answer("free"), AbstractLabel::free);
  EXPECT_EQ(parse_vlm_answer("  Free\n"), AbstractLabel::free);
  EXPECT_EQ(parse_vlm_answer("\tCROWD \r\n"), AbstractLabel::crowd);
  EXPECT_EQ(code_of([] { parse_vlm_answer("there appears to be a crowd"); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_vlm_answer("crowd."); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_vlm_answer("\"crowd\""); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { parse_vlm_answer(""); }), ErrorCode::MalformedResponse);
}

TEST(VlmParse, RandomNonTokensAreMalformed) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(0, 12), ch(32, 126);
  for (int i = 0; i < 2000; ++i) {
    std::string s(static_cast<std::size_t>(len(rng)), ' ');
    for (auto& c : s) c = static_cast<char>(ch(rng));
    std::string norm;
    for (char c : s) norm += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto b = norm.find_first_not_of(' ');
    const auto e = norm.find_last_not_of(' ');
    norm = b == std::string::npos ? "" : norm.substr(b, e - b + 1);
    if (norm == "crowd" || norm == "free") continue;
    EXPECT_EQ(code_of([&] { parse_vlm_answer(s); }), ErrorCode::MalformedResponse) << s;
  }
}

TEST(VlmRequest, WireFormat) {
  VlmClientConfig c;
  const auto body = nlohmann::json::parse(build_chat_request(c, kImage, "image/jpeg"));
  EXPECT_EQ(body["model"], "gpt-4o-mini");
  const auto& content = body["messages"][0]["content"];
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(content[0]["type"], "text");
  EXPECT_EQ(content[0]["text"], std::string(kDefaultCrowdPrompt));
  EXPECT_EQ(content[1]["type"], "image_url");
  EXPECT_EQ(content[1]["image_url"]["url"], "data:image/jpeg;base64," + base64_encode(kImage));
  EXPECT_FALSE(body.contains("temperature"));
}

TEST(VlmRequest, Base64) {
  const std::string s = "foobar";
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>(s.begin(), s.begin() + 0)), "");
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>(s.begin(), s.begin() + 1)), "Zg==");
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>(s.begin(), s.begin() + 2)), "Zm8=");
  EXPECT_EQ(base64_encode(std::vector<std::uint8_t>(s.begin(), s.end())), "Zm9vYmFy");
}

TEST(VlmRequest, MimeFromExtension) {
  EXPECT_EQ(image_mime_type("a.png"), "image/png");
  EXPECT_EQ(image_mime_type("a.JPG"), "image/jpeg");
  EXPECT_EQ(image_mime_type("a.webp"), "image/webp");
}

TEST(VlmResponse, ExtractsMessageContent) {
  EXPECT_EQ(extract_message_text(R"({"choices":[{"message":{"content":"free"}}]})"), "free");
  EXPECT_EQ(code_of([] { extract_message_text(R"({"choices":[]})"); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(code_of([] { extract_message_text("not json"); }), ErrorCode::MalformedResponse);
}

TEST(VlmClassifier, TokenVariantsFromStub) {
  const std::vector<std::string> answers = {"crowd", "  Free\n", "CROWD", "free "};
  VlmStub stub([&](int i) { return VlmStub::Reply{200, answers[static_cast<std::size_t>(i)], ""}; });
  VlmClassifier vlm(stub_config(stub.url()));
  EXPECT_EQ(vlm.classify_image(kImage), AbstractLabel::crowd);
  EXPECT_EQ(vlm.classify_image(kImage), AbstractLabel::free);
  EXPECT_EQ(vlm.classify_image(kImage), AbstractLabel::crowd);
  EXPECT_EQ(vlm.classify_image(kImage), AbstractLabel::free);
  EXPECT_EQ(vlm.last_raw_response().find("free") != std::string::npos, true);
  const auto auth = stub.auth_headers();
  ASSERT_EQ(auth.size(), 4u);
  EXPECT_EQ(auth[0], "Bearer test-key");
  const auto body = nlohmann::json::parse(stub.bodies()[0]);
  EXPECT_EQ(body["messages"][0]["content"][0]["text"], std::string(kDefaultCrowdPrompt));
}

TEST(VlmClassifier, FreeTextIsMalformedAndNotRetried) {
  VlmStub stub([](int) { return VlmStub::Reply{200, "there appears to be a crowd", ""}; });
  VlmClassifier vlm(stub_config(stub.url()));
  EXPECT_EQ(code_of([&] { vlm.classify_image(kImage); }), ErrorCode::MalformedResponse);
  EXPECT_EQ(stub.requests(), 1u);
}

TEST(VlmClassifier, RetriesServerErrorsThenSucceeds) {
  VlmStub stub([](int i) { return i < 2 ? VlmStub::Reply{503, "", "{}"} : VlmStub::Reply{200, "crowd", ""}; });
  VlmClassifier vlm(stub_config(stub.url()));
  EXPECT_EQ(vlm.classify_image(kImage), AbstractLabel::crowd);
  EXPECT_EQ(vlm.last_attempts(), 3);
}

TEST(VlmClassifier, GivesUpAfterRetries) {
  VlmStub stub([](int) { return VlmStub::Reply{429, "", "{}"}; });
  auto cfg = stub_config(stub.url());
  cfg.max_retries = 1;
  VlmClassifier vlm(cfg);
  EXPECT_EQ(code_of([&] { vlm.classify_image(kImage); }), ErrorCode::TransportError);
  EXPECT_EQ(stub.requests(), 2u);
}

TEST(VlmClassifier, ClientErrorsAreNotRetried) {
  VlmStub stub([](int) { return VlmStub::Reply{400, "", "{}"}; });
  VlmClassifier vlm(stub_config(stub.url()));
  EXPECT_EQ(code_of([&] { vlm.classify_image(kImage); }), ErrorCode::TransportError);
  EXPECT_EQ(stub.requests(), 1u);
}

TEST(VlmClassifier, AuthFailure) {
  VlmStub stub([](int) { return VlmStub::Reply{401, "", "{}"}; });
  VlmClassifier vlm(stub_config(stub.url()));
  EXPECT_EQ(code_of([&] { vlm.classify_image(kImage); }), ErrorCode::AuthError);
}

TEST(VlmClassifier, ConnectionFailureRetriesThenTransportError) {
  auto cfg = stub_config("http://127.0.0.1:" + std::to_string(closed_port()));
  cfg.max_retries = 2;
  VlmClassifier vlm(cfg);
  EXPECT_EQ(code_of([&] { vlm.classify_image(kImage); }), ErrorCode::TransportError);
  EXPECT_EQ(vlm.last_attempts(), 3);
}

TEST(VlmClassifier, ConfigValidation) {
  EXPECT_EQ(code_of([] { VlmClassifier{VlmClientConfig{}}; }), ErrorCode::ConfigError);
  auto c = stub_config("ftp://host/x");
  EXPECT_EQ(code_of([&] { VlmClassifier{c}; }), ErrorCode::ConfigError);
  c = stub_config("http://host:1");
  c.prompt.clear();
  EXPECT_EQ(code_of([&] { VlmClassifier{c}; }), ErrorCode::ConfigError);
}

TEST(VlmClassifier, ImagesFromStationDirectory) {
  const auto dir = testing::scratch_dir("frames");
  const std::vector<std::uint8_t> png = {0x89, 'P', 'N', 'G', 1, 2, 3};
  write_file_bytes(dir / "station_0001.png", png);
  VlmStub stub([](int) { return VlmStub::Reply{200, "free", ""}; });
  VlmClassifier vlm(stub_config(stub.url()), directory_image_provider(dir));
  EXPECT_EQ(vlm.classify(Pose{}, ClassifyContext{1, "t"}), AbstractLabel::free);
  const auto body = nlohmann::json::parse(stub.bodies()[0]);
  EXPECT_EQ(body["messages"][0]["content"][1]["image_url"]["url"], "data:image/png;base64," + base64_encode(png));
  EXPECT_EQ(code_of([&] { vlm.classify(Pose{}, ClassifyContext{2, "t"}); }), ErrorCode::IoError);
}

TEST(VlmConfig, FromEnvironment) {
  ::setenv(kVlmEndpointEnv, "http://localhost:9", 1);
  ::setenv(kVlmApiKeyEnv, "k", 1);
  const auto c = vlm_config_from_env();
  EXPECT_EQ(c.endpoint_url, "http://localhost:9");
  EXPECT_EQ(c.api_key, "k");
  ::unsetenv(kVlmEndpointEnv);
  ::unsetenv(kVlmApiKeyEnv);
}

}  // namespace
}  // namespace amg
